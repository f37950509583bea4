#include "hsm/hardcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hsm {

namespace {

Mask bit(Vertex v) { return Mask{1} << v; }

void check_cap(std::size_t n, std::size_t cap) {
  if (cap > 63) throw ValidationError("brute-force cap must be at most 63");
  if (n > cap) {
    std::ostringstream os;
    os << "brute-force cap exceeded: " << n << " vertices > cap " << cap;
    throw CapExceeded(os.str());
  }
}

// Compensated summation for the partition-function sums.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct Enumerator {
  const std::vector<Mask>& nbr;
  const std::vector<double>& lambda;
  const std::function<void(Mask, double)>& fn;
  std::size_t n;

  void run(Mask current, double w, std::size_t next, Mask forbidden) const {
    fn(current, w);
    for (std::size_t v = next; v < n; ++v) {
      if (forbidden >> v & 1) continue;
      run(current | bit(Vertex(v)), w * lambda[v], v + 1, forbidden | nbr[v] | bit(Vertex(v)));
    }
  }
};

}  // namespace

Graph::Graph(std::size_t n) : adj_(n) {}

Graph Graph::from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  std::vector<VertexSet> adj(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      std::ostringstream os;
      os << "edge (" << u << "," << v << ") references a vertex outside [0," << n << ")";
      throw ValidationError(os.str());
    }
    if (u == v) throw ValidationError("graph invariant violated: self-loop at vertex " + std::to_string(u));
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  Graph g;
  g.adj_ = std::move(adj);
  return g;
}

Graph Graph::from_adjacency(std::vector<VertexSet> adjacency) {
  const std::size_t n = adjacency.size();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& list = adjacency[u];
    for (std::size_t k = 0; k < list.size(); ++k) {
      Vertex v = list[k];
      if (v >= n) {
        throw ValidationError("graph invariant violated: vertex " + std::to_string(u) +
                              " lists out-of-range neighbor " + std::to_string(v));
      }
      if (v == u) throw ValidationError("graph invariant violated: self-loop at vertex " + std::to_string(u));
      if (k > 0 && list[k - 1] >= v) {
        throw ValidationError("graph invariant violated: neighbor list of vertex " + std::to_string(u) +
                              " is not strictly sorted");
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (Vertex v : adjacency[u]) {
      const auto& back = adjacency[v];
      if (!std::binary_search(back.begin(), back.end(), Vertex(u))) {
        throw ValidationError("graph invariant violated: adjacency not symmetric (" + std::to_string(u) +
                              " lists " + std::to_string(v) + " but " + std::to_string(v) + " does not list " +
                              std::to_string(u) + ")");
      }
    }
  }
  Graph g;
  g.adj_ = std::move(adjacency);
  return g;
}

bool Graph::adjacent(Vertex u, Vertex v) const {
  const auto& list = adj_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::size_t Graph::max_degree() const {
  std::size_t d = 0;
  for (const auto& list : adj_) d = std::max(d, list.size());
  return d;
}

std::size_t Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& list : adj_) twice += list.size();
  return twice / 2;
}

std::vector<std::pair<Vertex, Vertex>> Graph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (Vertex u = 0; u < adj_.size(); ++u)
    for (Vertex v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

void Graph::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != adj_.size())
    throw ValidationError("label count does not match vertex count");
  labels_ = std::move(labels);
}

std::vector<Mask> Graph::neighbor_masks() const {
  if (adj_.size() > 64) throw CapExceeded("neighbor masks need at most 64 vertices");
  std::vector<Mask> out(adj_.size(), 0);
  for (Vertex u = 0; u < adj_.size(); ++u)
    for (Vertex v : adj_[u]) out[u] |= bit(v);
  return out;
}

HardCoreInstance::HardCoreInstance(Graph graph, std::vector<double> weights)
    : graph_(std::move(graph)), weights_(std::move(weights)) {
  if (weights_.size() != graph_.vertex_count()) {
    throw ValidationError("weight count " + std::to_string(weights_.size()) + " does not match vertex count " +
                          std::to_string(graph_.vertex_count()));
  }
  for (std::size_t v = 0; v < weights_.size(); ++v) {
    if (!(weights_[v] > 0.0) || !std::isfinite(weights_[v]))
      throw ValidationError("weight of vertex " + std::to_string(v) + " must be positive and finite");
  }
}

HardCoreInstance HardCoreInstance::uniform(Graph graph, double lambda) {
  std::vector<double> w(graph.vertex_count(), lambda);
  return HardCoreInstance(std::move(graph), std::move(w));
}

bool HardCoreInstance::univariate() const {
  return std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
}

bool IndependentSet::contains(Vertex v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

Mask IndependentSet::mask() const {
  Mask m = 0;
  for (Vertex v : members) {
    if (v >= 64) throw CapExceeded("mask representation needs vertex indices below 64");
    m |= bit(v);
  }
  return m;
}

IndependentSet IndependentSet::from_mask(Mask m) {
  IndependentSet s;
  while (m) {
    s.members.push_back(Vertex(std::countr_zero(m)));
    m &= m - 1;
  }
  return s;
}

PartialConfig& PartialConfig::set(Vertex v, bool occupied) {
  assignment_[v] = occupied;
  return *this;
}

PartialConfig PartialConfig::all_vacant(const VertexSet& s) {
  PartialConfig c;
  for (Vertex v : s) c.set(v, false);
  return c;
}

VertexSet PartialConfig::domain() const {
  VertexSet out;
  for (const auto& [v, s] : assignment_) out.push_back(v);
  return out;
}

Mask PartialConfig::occupied_mask() const {
  Mask m = 0;
  for (const auto& [v, s] : assignment_)
    if (s) m |= bit(v);
  return m;
}

Mask PartialConfig::vacant_mask() const {
  Mask m = 0;
  for (const auto& [v, s] : assignment_)
    if (!s) m |= bit(v);
  return m;
}

CliqueCover CliqueCover::singletons(std::size_t n) {
  CliqueCover c;
  for (Vertex v = 0; v < n; ++v) c.cliques.push_back({v});
  return c;
}

BlockCover BlockCover::from_cliques(const CliqueCover& cover) {
  BlockCover b;
  b.blocks = cover.cliques;
  return b;
}

bool is_independent(const Graph& graph, const VertexSet& set) {
  for (Vertex v : set) {
    if (v >= graph.vertex_count())
      throw ValidationError("vertex index " + std::to_string(v) + " out of range");
  }
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j)
      if (set[i] != set[j] && graph.adjacent(set[i], set[j])) return false;
  return true;
}

void for_each_independent_mask(const HardCoreInstance& instance, const std::function<void(Mask, double)>& fn,
                               std::size_t cap) {
  check_cap(instance.size(), cap);
  auto nbr = instance.graph().neighbor_masks();
  Enumerator e{nbr, instance.weights(), fn, instance.size()};
  e.run(0, 1.0, 0, 0);
}

void for_each_independent_set(const HardCoreInstance& instance,
                              const std::function<void(const IndependentSet&)>& fn, std::size_t cap) {
  for_each_independent_mask(
      instance, [&](Mask m, double) { fn(IndependentSet::from_mask(m)); }, cap);
}

std::vector<IndependentSet> enumerate_independent_sets(const HardCoreInstance& instance, std::size_t cap) {
  std::vector<IndependentSet> out;
  for_each_independent_set(instance, [&](const IndependentSet& s) { out.push_back(s); }, cap);
  return out;
}

double partition_function_bruteforce(const HardCoreInstance& instance, std::size_t cap) {
  KahanSum z;
  for_each_independent_mask(instance, [&](Mask, double w) { z.add(w); }, cap);
  if (!std::isfinite(z.sum)) throw NumericError("partition function overflows double precision");
  return z.sum;
}

GibbsDistribution::GibbsDistribution(const HardCoreInstance& instance, std::size_t cap) {
  KahanSum z;
  for_each_independent_mask(
      instance,
      [&](Mask m, double w) {
        masks_.push_back(m);
        weights_.push_back(w);
        z.add(w);
      },
      cap);
  if (!std::isfinite(z.sum)) throw NumericError("partition function overflows double precision");
  z_ = z.sum;
  probs_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) probs_[i] = weights_[i] / z_;
  order_.resize(masks_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return masks_[a] < masks_[b]; });
}

std::vector<IndependentSet> GibbsDistribution::states() const {
  std::vector<IndependentSet> out;
  out.reserve(masks_.size());
  for (Mask m : masks_) out.push_back(IndependentSet::from_mask(m));
  return out;
}

std::size_t GibbsDistribution::index_of(Mask m) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), m,
                             [&](std::size_t i, Mask key) { return masks_[i] < key; });
  if (it == order_.end() || masks_[*it] != m) throw ValidationError("set is not an independent set of the instance");
  return *it;
}

std::vector<VertexMarginal> marginals(const HardCoreInstance& instance, const PartialConfig& condition,
                                      std::size_t cap) {
  check_cap(instance.size(), cap);
  for (const auto& [v, s] : condition.assignment())
    if (v >= instance.size()) throw ValidationError("condition references vertex " + std::to_string(v) + " out of range");
  const Mask ones = condition.occupied_mask();
  const Mask zeros = condition.vacant_mask();
  if (!is_independent(instance.graph(), IndependentSet::from_mask(ones).members))
    throw ValidationError("inconsistent condition: occupied vertices are adjacent");

  const std::size_t n = instance.size();
  KahanSum total;
  std::vector<KahanSum> occ(n);
  for_each_independent_mask(
      instance,
      [&](Mask m, double w) {
        if ((m & ones) != ones || (m & zeros) != 0) return;
        total.add(w);
        for (Mask r = m; r; r &= r - 1) occ[std::countr_zero(r)].add(w);
      },
      cap);
  std::vector<VertexMarginal> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    double p = occ[v].sum / total.sum;
    if (ones >> v & 1) p = 1.0;
    if (zeros >> v & 1) p = 0.0;
    out[v].occupied = p;
    out[v].vacant = 1.0 - p;
  }
  return out;
}

InducedSubinstance induced_subinstance(const HardCoreInstance& instance, const VertexSet& subset) {
  VertexSet sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t n = instance.size();
  std::vector<std::int64_t> to_new(n, -1);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= n) throw ValidationError("subset vertex " + std::to_string(sorted[i]) + " out of range");
    to_new[sorted[i]] = std::int64_t(i);
  }
  std::vector<VertexSet> adj(sorted.size());
  std::vector<double> w(sorted.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    Vertex old = sorted[i];
    w[i] = instance.weight(old);
    for (Vertex u : instance.graph().neighbors(old))
      if (to_new[u] >= 0) adj[i].push_back(Vertex(to_new[u]));
    if (!instance.graph().labels().empty()) labels.push_back(instance.graph().labels()[old]);
  }
  Graph g = Graph::from_adjacency(std::move(adj));
  g.set_labels(std::move(labels));
  return {HardCoreInstance(std::move(g), std::move(w)), sorted};
}

CoverReport validate_clique_cover(const Graph& graph, const CliqueCover& cover) {
  CoverReport r;
  const std::size_t n = graph.vertex_count();
  std::vector<int> count(n, 0);
  r.all_cliques = true;
  std::ostringstream msg;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const auto& k = cover.cliques[i];
    for (std::size_t a = 0; a < k.size(); ++a) {
      if (k[a] >= n) {
        r.message = "clique " + std::to_string(i) + " references vertex " + std::to_string(k[a]) + " out of range";
        return r;
      }
      ++count[k[a]];
      for (std::size_t b = a + 1; b < k.size(); ++b) {
        if (k[a] == k[b]) {
          r.message = "clique " + std::to_string(i) + " lists vertex " + std::to_string(k[a]) + " twice";
          return r;
        }
        if (!graph.adjacent(k[a], k[b]) && r.all_cliques) {
          r.all_cliques = false;
          msg << "clique " << i << " is not complete (" << k[a] << " and " << k[b] << " not adjacent); ";
        }
      }
    }
  }
  r.covers_all = std::all_of(count.begin(), count.end(), [](int c) { return c > 0; });
  r.disjoint = std::all_of(count.begin(), count.end(), [](int c) { return c <= 1; });
  if (!r.covers_all) {
    auto it = std::find(count.begin(), count.end(), 0);
    msg << "vertex " << (it - count.begin()) << " is not covered; ";
  }
  r.valid = r.covers_all && r.all_cliques;
  r.message = msg.str();
  if (!r.message.empty()) r.message.resize(r.message.size() - 2);
  return r;
}

CoverReport validate_clique_cover(const HardCoreInstance& instance, const CliqueCover& cover) {
  CoverReport r = validate_clique_cover(instance.graph(), cover);
  if (!r.valid) return r;
  double zmax = 1.0;
  for (const auto& k : cover.cliques) {
    double z = 1.0;
    for (Vertex v : k) z += instance.weight(v);
    zmax = std::max(zmax, z);
  }
  r.max_clique_z = zmax;
  return r;
}

CliqueCover greedy_clique_cover(const Graph& graph) {
  const std::size_t n = graph.vertex_count();
  std::vector<bool> covered(n, false);
  CliqueCover cover;
  for (Vertex v = 0; v < n; ++v) {
    if (covered[v]) continue;
    VertexSet clique{v};
    for (Vertex u : graph.neighbors(v)) {
      if (u < v && covered[u]) continue;
      bool ok = std::all_of(clique.begin(), clique.end(), [&](Vertex w) { return graph.adjacent(u, w); });
      if (ok) clique.push_back(u);
    }
    std::sort(clique.begin(), clique.end());
    for (Vertex u : clique) covered[u] = true;
    cover.cliques.push_back(std::move(clique));
  }
  return cover;
}

double tree_threshold(std::uint64_t delta) {
  if (delta < 3) throw ValidationError("tree threshold needs max degree >= 3");
  const double d = double(delta);
  if (delta <= 100) return std::pow(d - 1.0, d - 1.0) / std::pow(d - 2.0, d);
  // (1/(D-2)) * (1 + 1/(D-2))^(D-1), evaluated in log space
  return std::exp((d - 1.0) * std::log1p(1.0 / (d - 2.0)) - std::log(d - 2.0));
}

SubsetPartitionTable::SubsetPartitionTable(const HardCoreInstance& instance) {
  const std::size_t n = instance.size();
  if (n > 22) throw CapExceeded("subset partition table needs at most 22 vertices");
  auto nbr = instance.graph().neighbor_masks();
  closed_.resize(n);
  for (std::size_t v = 0; v < n; ++v) closed_[v] = nbr[v] | bit(Vertex(v));
  full_ = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
  table_.assign(std::size_t{1} << n, 1.0);
  for (Mask s = 1; s <= full_; ++s) {
    int v = std::countr_zero(s);
    table_[s] = table_[s & (s - 1)] + instance.weight(Vertex(v)) * table_[s & ~closed_[v]];
  }
}

}  // namespace hsm
