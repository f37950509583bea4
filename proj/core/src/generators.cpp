#include "hsm/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hsm {

Graph path_graph(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex v = 1; v < n; ++v) e.emplace_back(v - 1, v);
  return Graph::from_edges(n, e);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw ValidationError("a cycle needs at least 3 vertices");
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex v = 0; v < n; ++v) e.emplace_back(v, Vertex((v + 1) % n));
  return Graph::from_edges(n, e);
}

Graph complete_graph(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph::from_edges(n, e);
}

Graph star_graph(std::size_t leaves) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return Graph::from_edges(leaves + 1, e);
}

Graph edgeless_graph(std::size_t n) { return Graph(n); }

Graph random_graph(std::size_t n, double p, Rng& rng) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (rng.uniform() < p) e.emplace_back(u, v);
  return Graph::from_edges(n, e);
}

Graph random_tree(std::size_t n, Rng& rng) {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex v = 1; v < n; ++v) e.emplace_back(Vertex(rng.index(v)), v);
  return Graph::from_edges(n, e);
}

Graph random_connected_graph(std::size_t n, double p, Rng& rng) {
  auto e = random_tree(n, rng).edges();
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (rng.uniform() < p) e.emplace_back(u, v);
  return Graph::from_edges(n, e);
}

std::vector<double> random_weights(std::size_t n, double lo, double hi, Rng& rng) {
  if (!(lo >= 0.0 && lo <= hi && std::isfinite(hi))) throw ValidationError("weight range must satisfy 0 <= lo <= hi");
  std::vector<double> w(n);
  for (double& x : w) x = lo + (hi - lo) * rng.uniform();
  return w;
}

CliqueCover random_disjoint_cover(const Graph& graph, Rng& rng) {
  const std::size_t n = graph.vertex_count();
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<bool> used(n, false);
  CliqueCover cover;
  for (Vertex s : order) {
    if (used[s]) continue;
    VertexSet k{s};
    used[s] = true;
    for (Vertex v : order) {
      if (used[v]) continue;
      // Stop growing at random so that not every clique is maximal.
      if (rng.uniform() < 0.3) break;
      if (std::all_of(k.begin(), k.end(), [&](Vertex u) { return graph.adjacent(u, v); })) {
        k.push_back(v);
        used[v] = true;
      }
    }
    std::sort(k.begin(), k.end());
    cover.cliques.push_back(std::move(k));
  }
  return cover;
}

CliqueCover random_clique_cover(const Graph& graph, Rng& rng, double overlap) {
  CliqueCover cover = random_disjoint_cover(graph, rng);
  for (Vertex v = 0; v < graph.vertex_count(); ++v) {
    if (rng.uniform() >= overlap) continue;
    const std::size_t start = rng.index(std::max<std::size_t>(1, cover.size()));
    for (std::size_t t = 0; t < cover.size(); ++t) {
      auto& k = cover.cliques[(start + t) % cover.size()];
      if (std::find(k.begin(), k.end(), v) != k.end()) continue;
      if (std::all_of(k.begin(), k.end(), [&](Vertex u) { return graph.adjacent(u, v); })) {
        k.insert(std::lower_bound(k.begin(), k.end(), v), v);
        break;
      }
    }
  }
  return cover;
}

std::vector<Graph> all_connected_graphs(std::size_t n) {
  if (n > 6) throw CapExceeded("all_connected_graphs is limited to n <= 6");
  std::vector<std::pair<Vertex, Vertex>> slots;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) slots.emplace_back(u, v);
  std::vector<Graph> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << slots.size()); ++bits) {
    std::vector<std::pair<Vertex, Vertex>> e;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if ((bits >> i) & 1) e.push_back(slots[i]);
    if (n > 0 && e.size() + 1 < n) continue;
    Graph g = Graph::from_edges(n, e);
    std::vector<bool> seen(n, false);
    std::vector<Vertex> stack;
    if (n > 0) {
      stack.push_back(0);
      seen[0] = true;
    }
    std::size_t count = n > 0 ? 1 : 0;
    while (!stack.empty()) {
      const Vertex u = stack.back();
      stack.pop_back();
      for (Vertex w : g.neighbors(u))
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          stack.push_back(w);
        }
    }
    if (count == n) out.push_back(std::move(g));
  }
  return out;
}

}  // namespace hsm
