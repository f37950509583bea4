#include "hsm/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include <Eigen/Eigenvalues>

#include "hsm/rng.hpp"

namespace hsm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
void for_each_bit(Mask m, F&& f) {
  while (m) {
    f(Vertex(std::countr_zero(m)));
    m &= m - 1;
  }
}

void require_positive(const std::vector<double>& values, std::size_t n, const char* what) {
  if (values.size() != n) throw ValidationError(std::string(what) + " must have one entry per vertex");
  for (double x : values)
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(std::string(what) + " must be positive and finite");
}

CoverReport require_disjoint(const HardCoreInstance& instance, const CliqueCover& cover) {
  auto report = validate_clique_cover(instance, cover);
  if (!report.valid) throw ValidationError("invalid clique cover: " + report.message);
  if (!report.disjoint) throw ValidationError("clique cover must be disjoint; see disjointify_cover");
  for (const auto& k : cover.cliques)
    if (k.empty()) throw ValidationError("clique cover contains an empty clique");
  return report;
}

}  // namespace

// ---------------------------------------------------------------- pairwise influence

std::size_t InfluenceMatrix::position(Vertex v) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
  if (it == vertices.end() || *it != v)
    throw ValidationError("vertex " + std::to_string(v) + " is conditioned or out of range");
  return std::size_t(it - vertices.begin());
}

bool InfluenceMatrix::defined(std::size_t i, std::size_t j) const { return !std::isnan(entries(i, j)); }

double InfluenceMatrix::operator()(Vertex v, Vertex w) const {
  const double x = entries(position(v), position(w));
  if (std::isnan(x))
    throw NumericError("influence of " + std::to_string(v) + " on " + std::to_string(w) +
                       " is undefined: a conditional has zero probability");
  return x;
}

InfluenceMatrix pairwise_influence(const HardCoreInstance& instance, const PartialConfig& condition,
                                   std::size_t cap) {
  const std::size_t n = instance.size();
  if (n > cap) throw CapExceeded("pairwise influence: " + std::to_string(n) + " vertices exceed cap " + std::to_string(cap));
  for (const auto& [v, s] : condition.assignment())
    if (v >= n) throw ValidationError("condition mentions vertex " + std::to_string(v) + " outside the graph");
  const Mask occ = condition.occupied_mask();
  const Mask vac = condition.vacant_mask();

  std::vector<double> w1(n, 0.0), w0(n, 0.0);
  Eigen::MatrixXd w11 = Eigen::MatrixXd::Zero(n, n);  // v and w in I
  Eigen::MatrixXd w01 = Eigen::MatrixXd::Zero(n, n);  // v not in I, w in I
  double z = 0.0;
  const Mask full = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
  for_each_independent_mask(
      instance,
      [&](Mask m, double w) {
        if ((m & occ) != occ || (m & vac) != 0) return;
        z += w;
        for_each_bit(m, [&](Vertex v) {
          w1[v] += w;
          for_each_bit(m, [&](Vertex u) { w11(v, u) += w; });
        });
        for_each_bit(full & ~m, [&](Vertex v) {
          w0[v] += w;
          for_each_bit(m, [&](Vertex u) { w01(v, u) += w; });
        });
      },
      cap);
  if (z == 0.0) throw ValidationError("conditioning configuration has zero probability");

  InfluenceMatrix out;
  out.condition = condition;
  for (Vertex v = 0; v < n; ++v)
    if (!condition.contains(v)) out.vertices.push_back(v);
  const std::size_t k = out.vertices.size();
  out.entries = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vertex v = out.vertices[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const Vertex u = out.vertices[j];
      if (w1[v] == 0.0 || w0[v] == 0.0) {
        out.entries(i, j) = kNaN;
        continue;
      }
      out.entries(i, j) = w11(v, u) / w1[v] - w01(v, u) / w0[v];
    }
  }
  return out;
}

SubsetInfluence::SubsetInfluence(const HardCoreInstance& instance)
    : table_(instance), weights_(instance.weights()) {}

double SubsetInfluence::operator()(Mask subset, Vertex r, Vertex v) const {
  if (r == v) return 0.0;
  const auto& closed = table_.closed_neighborhoods();
  const Mask rm = Mask{1} << r;
  const double lam = weights_[v];
  const double occupied =
      (closed[r] >> v) & 1 ? 0.0 : lam * table_.z(subset & ~closed[r] & ~closed[v]) / table_.z(subset & ~closed[r]);
  const Mask rest = subset & ~rm;
  const double vacant = lam * table_.z(rest & ~closed[v]) / table_.z(rest);
  return occupied - vacant;
}

std::vector<std::pair<Vertex, Vertex>> sign_asymmetric_pairs(const InfluenceMatrix& psi, double tolerance) {
  auto sgn = [&](double x) { return x > tolerance ? 1 : (x < -tolerance ? -1 : 0); };
  std::vector<std::pair<Vertex, Vertex>> out;
  const auto k = std::size_t(psi.entries.rows());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!psi.defined(i, j) || !psi.defined(j, i)) continue;
      if (sgn(psi.entries(i, j)) != sgn(psi.entries(j, i))) out.emplace_back(psi.vertices[i], psi.vertices[j]);
    }
  return out;
}

// ---------------------------------------------------------------- influence conditions

std::string SubsetPolicy::describe() const {
  if (kind == Kind::Exhaustive) return "all nonempty subsets";
  return std::to_string(samples) + " uniformly sampled nonempty subsets (seed " + std::to_string(seed) + ")";
}

std::vector<Mask> policy_subsets(std::size_t n, const SubsetPolicy& policy) {
  std::vector<Mask> out;
  if (n == 0) return out;
  if (policy.kind == SubsetPolicy::Kind::Exhaustive) {
    if (n > kExhaustiveSubsetCap)
      throw CapExceeded("exhaustive subset check needs n <= " + std::to_string(kExhaustiveSubsetCap));
    for (Mask s = 1; s < (Mask{1} << n); ++s) out.push_back(s);
    return out;
  }
  if (n > 63) throw CapExceeded("subset sampling needs n <= 63");
  const Mask full = (Mask{1} << n) - 1;
  Rng rng(policy.seed);
  while (out.size() < policy.samples) {
    const Mask s = rng.next() & full;
    if (s) out.push_back(s);
  }
  return out;
}

InfluenceConditionResult check_influence_condition(const HardCoreInstance& instance, const std::vector<double>& q,
                                                   double c, const SubsetPolicy& policy) {
  const std::size_t n = instance.size();
  require_positive(q, n, "q");
  if (!(c >= 0.0)) throw ValidationError("C must be nonnegative");
  const auto subsets = policy_subsets(n, policy);
  InfluenceConditionResult res;
  res.q = q;
  res.c = c;
  res.policy = policy;
  res.worst_slack = std::numeric_limits<double>::infinity();
  if (n == 0) return res;
  const SubsetInfluence psi(instance);
  for (Mask s : subsets) {
    ++res.checked_subsets;
    for_each_bit(s, [&](Vertex r) {
      double lhs = 0.0;
      for_each_bit(s, [&](Vertex v) { lhs += std::abs(psi(s, r, v)) * q[v]; });
      const double rhs = c * q[r];
      res.worst_ratio = std::max(res.worst_ratio, lhs / q[r]);
      res.worst_slack = std::min(res.worst_slack, rhs - lhs);
      if (lhs > rhs + kBoundTolerance && !res.counterexample) {
        res.holds = false;
        res.counterexample = InfluenceViolation{s, r, lhs, rhs};
      }
    });
  }
  return res;
}

CdcResult check_strict_cdc(const HardCoreInstance& instance, const std::vector<double>& mu, double alpha) {
  const std::size_t n = instance.size();
  require_positive(mu, n, "mu");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  CdcResult res;
  res.mu = mu;
  res.alpha = alpha;
  res.lhs.assign(n, 0.0);
  res.worst_slack = std::numeric_limits<double>::infinity();
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex w : instance.graph().neighbors(v)) {
      const double lam = instance.weight(w);
      res.lhs[v] += lam / (1.0 + lam) * mu[w];
    }
    const double slack = (1.0 - alpha) * mu[v] - res.lhs[v];
    res.worst_slack = std::min(res.worst_slack, slack);
    if (slack < -1e-12 && !res.counterexample) {
      res.holds = false;
      res.counterexample = v;
    }
  }
  return res;
}

CdcImpliesReport cdc_implies_influence_bound_check(const HardCoreInstance& instance, const std::vector<double>& mu,
                                                   double alpha, std::uint64_t sample_seed) {
  CdcImpliesReport rep;
  rep.cdc = check_strict_cdc(instance, mu, alpha);
  if (!rep.cdc.holds)
    throw ValidationError("strict clique dynamics condition fails at vertex " + std::to_string(*rep.cdc.counterexample));
  const auto policy = instance.size() <= 10 ? SubsetPolicy::exhaustive() : SubsetPolicy::sampled(4096, sample_seed);
  rep.influence = check_influence_condition(instance, mu, 1.0 / alpha, policy);
  rep.passed = rep.influence.holds;
  return rep;
}

// ---------------------------------------------------------------- SAW tree

SawTree::SawTree(const HardCoreInstance& instance, Vertex root, std::size_t cap) : instance_(&instance) {
  const std::size_t n = instance.size();
  if (root >= n) throw ValidationError("SAW tree root out of range");
  const Graph& g = instance.graph();
  std::vector<std::int64_t> pos(n, -1);
  VertexSet path{root};
  pos[root] = 0;
  nodes_.push_back({root, SawStatus::Free, -1, 0, {}});

  auto add = [&](std::size_t parent, Vertex v, SawStatus st) {
    if (nodes_.size() >= cap) throw CapExceeded("SAW tree exceeds " + std::to_string(cap) + " nodes");
    nodes_.push_back({v, st, std::int64_t(parent), nodes_[parent].depth + 1, {}});
    nodes_[parent].children.push_back(nodes_.size() - 1);
    return nodes_.size() - 1;
  };

  auto grow = [&](auto& self, std::size_t node) -> void {
    const std::size_t k = path.size() - 1;
    const Vertex u = path[k];
    VertexSet nbrs = g.neighbors(u);
    std::sort(nbrs.begin(), nbrs.end());
    for (Vertex w : nbrs) {
      const std::int64_t j = pos[w];
      if (j >= 0) {
        if (std::size_t(j) + 1 == k) continue;  // stepping back
        // Closing a cycle at w: compare the walk's exit from w with its return.
        add(node, w, path[std::size_t(j) + 1] > u ? SawStatus::Fixed1 : SawStatus::Fixed0);
        continue;
      }
      const std::size_t child = add(node, w, SawStatus::Free);
      pos[w] = std::int64_t(path.size());
      path.push_back(w);
      self(self, child);
      path.pop_back();
      pos[w] = -1;
    }
  };
  grow(grow, 0);
}

double SawTree::weight(std::size_t node) const {
  const auto& nd = nodes_.at(node);
  return nd.status == SawStatus::Free ? instance_->weight(nd.origin) : 0.0;
}

std::vector<std::size_t> SawTree::copies(Vertex v) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].origin == v && nodes_[i].status == SawStatus::Free) out.push_back(i);
  return out;
}

std::vector<double> SawTree::root_influence() const {
  const std::size_t t = nodes_.size();
  // Children always follow their parent in node order.
  std::vector<double> ratio(t, 0.0);
  for (std::size_t i = t; i-- > 0;) {
    const auto& nd = nodes_[i];
    if (nd.status != SawStatus::Free) continue;
    double r = weight(i);
    for (std::size_t c : nd.children) {
      switch (nodes_[c].status) {
        case SawStatus::Free: r /= 1.0 + ratio[c]; break;
        case SawStatus::Fixed1: r = 0.0; break;
        case SawStatus::Fixed0: break;
      }
    }
    ratio[i] = r;
  }
  std::vector<double> p1(t, 0.0), p0(t, 0.0), out(t, 0.0);
  p1[0] = 1.0;
  for (std::size_t i = 1; i < t; ++i) {
    const auto& nd = nodes_[i];
    if (nd.status != SawStatus::Free) continue;
    const auto par = std::size_t(nd.parent);
    const double q = ratio[i] / (1.0 + ratio[i]);
    p1[i] = (1.0 - p1[par]) * q;
    p0[i] = (1.0 - p0[par]) * q;
    out[i] = p1[i] - p0[i];
  }
  return out;
}

SawInstance SawTree::to_instance() const {
  const std::size_t t = nodes_.size();
  std::vector<bool> removed(t, false);
  for (std::size_t i = 0; i < t; ++i) {
    if (nodes_[i].status == SawStatus::Fixed0) removed[i] = true;
    if (nodes_[i].status == SawStatus::Fixed1) {
      removed[i] = true;
      removed[std::size_t(nodes_[i].parent)] = true;
    }
  }
  SawInstance out;
  out.vertex_of.assign(t, -1);
  for (std::size_t i = 0; i < t; ++i) {
    if (removed[i]) continue;
    out.vertex_of[i] = std::int64_t(out.node_of.size());
    out.node_of.push_back(i);
  }
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::vector<double> weights;
  for (std::size_t i : out.node_of) {
    weights.push_back(weight(i));
    const auto par = nodes_[i].parent;
    if (par >= 0 && !removed[std::size_t(par)])
      edges.emplace_back(Vertex(out.vertex_of[std::size_t(par)]), Vertex(out.vertex_of[i]));
  }
  out.instance = HardCoreInstance(Graph::from_edges(out.node_of.size(), edges), std::move(weights));
  return out;
}

std::vector<double> forest_root_influence(const HardCoreInstance& forest, Vertex root) {
  const std::size_t n = forest.size();
  if (root >= n) throw ValidationError("root out of range");
  const Graph& g = forest.graph();
  std::vector<std::int64_t> parent(n, -2);
  std::vector<Vertex> order{root};
  parent[root] = -1;
  for (std::size_t h = 0; h < order.size(); ++h) {
    const Vertex u = order[h];
    for (Vertex w : g.neighbors(u)) {
      if (std::int64_t(w) == parent[u]) continue;
      if (parent[w] != -2) throw ValidationError("graph is not a forest: cycle through vertex " + std::to_string(w));
      parent[w] = u;
      order.push_back(w);
    }
  }
  std::vector<double> ratio(n, 0.0);
  for (std::size_t h = order.size(); h-- > 0;) {
    const Vertex u = order[h];
    double r = forest.weight(u);
    for (Vertex w : g.neighbors(u))
      if (std::int64_t(w) != parent[u]) r /= 1.0 + ratio[w];
    ratio[u] = r;
  }
  std::vector<double> p1(n, 0.0), p0(n, 0.0), out(n, 0.0);
  p1[root] = 1.0;
  for (std::size_t h = 1; h < order.size(); ++h) {
    const Vertex u = order[h];
    const auto par = std::size_t(parent[u]);
    const double q = ratio[u] / (1.0 + ratio[u]);
    p1[u] = (1.0 - p1[par]) * q;
    p0[u] = (1.0 - p0[par]) * q;
    out[u] = p1[u] - p0[u];
  }
  return out;
}

SawInfluenceReport verify_saw_influence(const HardCoreInstance& instance, Vertex root, std::size_t cap) {
  const std::size_t n = instance.size();
  const SawTree tree(instance, root, cap);
  const auto psi = pairwise_influence(instance);
  const auto tree_psi = tree.root_influence();

  SawInfluenceReport rep;
  rep.root = root;
  rep.tree_nodes = tree.size();
  rep.graph_influence.assign(n, 0.0);
  rep.tree_influence.assign(n, 0.0);
  for (Vertex v = 0; v < n; ++v) {
    if (v != root) rep.graph_influence[v] = psi(root, v);
    for (std::size_t node : tree.copies(v))
      if (node != 0) rep.tree_influence[v] += tree_psi[node];
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(rep.graph_influence[v] - rep.tree_influence[v]));
  }

  const auto surgery = tree.to_instance();
  const auto forest_psi = forest_root_influence(surgery.instance, Vertex(surgery.vertex_of[0]));
  for (std::size_t node = 0; node < tree.size(); ++node) {
    const double other = surgery.vertex_of[node] >= 0 ? forest_psi[std::size_t(surgery.vertex_of[node])] : 0.0;
    rep.surgery_discrepancy = std::max(rep.surgery_discrepancy, std::abs(other - tree_psi[node]));
  }
  return rep;
}

TreeMultiplicativityReport verify_tree_multiplicativity(const HardCoreInstance& tree) {
  const std::size_t n = tree.size();
  const Graph& g = tree.graph();
  if (n == 0) return {};
  if (g.edge_count() != n - 1) throw ValidationError("instance graph is not a tree (edge count)");
  // BFS parents from every source give the unique paths.
  std::vector<std::vector<std::int64_t>> parent(n, std::vector<std::int64_t>(n, -2));
  for (Vertex s = 0; s < n; ++s) {
    std::queue<Vertex> queue;
    queue.push(s);
    parent[s][s] = -1;
    std::size_t seen = 1;
    while (!queue.empty()) {
      const Vertex u = queue.front();
      queue.pop();
      for (Vertex w : g.neighbors(u))
        if (parent[s][w] == -2) {
          parent[s][w] = u;
          ++seen;
          queue.push(w);
        }
    }
    if (seen != n) throw ValidationError("instance graph is not a tree (disconnected)");
  }
  const auto psi = pairwise_influence(tree);
  TreeMultiplicativityReport rep;
  for (Vertex v = 0; v < n; ++v)
    for (Vertex w = 0; w < n; ++w) {
      if (v == w || g.adjacent(v, w)) continue;
      for (auto u = parent[v][w]; u != std::int64_t(v); u = parent[v][std::size_t(u)]) {
        const auto uu = Vertex(u);
        const double defect = std::abs(psi(v, w) - psi(v, uu) * psi(uu, w));
        rep.max_defect = std::max(rep.max_defect, defect);
        ++rep.checks;
      }
    }
  return rep;
}

InfluenceDecayReport influence_decay_check(const HardCoreInstance& instance, Vertex root,
                                           const std::vector<double>& mu, double alpha, std::size_t cap) {
  const auto cdc = check_strict_cdc(instance, mu, alpha);
  if (!cdc.holds)
    throw ValidationError("strict clique dynamics condition fails at vertex " + std::to_string(*cdc.counterexample));
  const SawTree tree(instance, root, cap);
  const auto psi = tree.root_influence();
  InfluenceDecayReport rep;
  std::size_t depth = 0;
  for (const auto& nd : tree.nodes()) depth = std::max(depth, nd.depth);
  rep.layer_sums.assign(depth, 0.0);
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const auto& nd = tree.nodes()[i];
    if (nd.status == SawStatus::Free) rep.layer_sums[nd.depth - 1] += std::abs(psi[i]) * mu[nd.origin];
  }
  for (std::size_t k = 1; k <= depth; ++k) {
    rep.bounds.push_back(std::pow(1.0 - alpha, double(k)) * mu[root]);
    if (rep.layer_sums[k - 1] > rep.bounds.back() + 1e-12) rep.holds = false;
  }
  return rep;
}

// ---------------------------------------------------------------- simplicial complex

ComplexRep::ComplexRep(const HardCoreInstance& instance, const CliqueCover& disjoint_cover, std::size_t face_cap) {
  require_disjoint(instance, disjoint_cover);
  const std::size_t n = instance.size();
  vertex_element_.assign(n, 0);
  for (std::size_t i = 0; i < disjoint_cover.size(); ++i) {
    VertexSet k = disjoint_cover.cliques[i];
    std::sort(k.begin(), k.end());
    std::vector<std::size_t> part{ground_.size()};
    ground_.push_back({i, std::nullopt});
    for (Vertex v : k) {
      vertex_element_[v] = ground_.size();
      part.push_back(ground_.size());
      ground_.push_back({i, v});
    }
    partitions_.push_back(std::move(part));
  }

  std::size_t count = 0;
  for_each_independent_mask(instance, [&](Mask, double) {
    if (++count > face_cap) throw CapExceeded("complex exceeds " + std::to_string(face_cap) + " faces");
  });
  const GibbsDistribution gibbs(instance);
  const std::size_t m = partitions_.size();
  for (std::size_t s = 0; s < gibbs.size(); ++s) {
    std::vector<std::size_t> face(m);
    for (std::size_t i = 0; i < m; ++i) face[i] = partitions_[i][0];
    for_each_bit(gibbs.masks()[s], [&](Vertex v) {
      const std::size_t x = vertex_element_[v];
      face[ground_[x].partition] = x;
    });
    faces_.push_back(std::move(face));
    sets_.push_back(gibbs.state(s));
  }
  weights_ = gibbs.probabilities();
}

bool ComplexRep::contains(std::size_t face, const std::vector<std::size_t>& tau) const {
  return std::all_of(tau.begin(), tau.end(), [&](std::size_t x) { return faces_[face][ground_.at(x).partition] == x; });
}

double ComplexRep::face_weight(const std::vector<std::size_t>& tau) const {
  double w = 0.0;
  for (std::size_t f = 0; f < faces_.size(); ++f)
    if (contains(f, tau)) w += weights_[f];
  return w;
}

ComplexRep ComplexRep::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("scale factor must be positive");
  ComplexRep out = *this;
  for (double& w : out.weights_) w *= factor;
  return out;
}

namespace {

/// Skeleton walk of the link of tau from the max faces containing tau; `fixed` marks
/// the partitions used by tau.
SkeletonWalk skeleton_from_faces(const ComplexRep& rep, const std::vector<std::size_t>& faces,
                                 const std::vector<bool>& fixed) {
  const std::size_t m = rep.dimension();
  std::map<std::size_t, std::size_t> local;
  for (std::size_t f : faces)
    for (std::size_t i = 0; i < m; ++i)
      if (!fixed[i]) local.emplace(rep.faces()[f][i], 0);
  if (local.size() < 2) throw ValidationError("degenerate link: fewer than two link vertices");
  SkeletonWalk out;
  for (auto& [x, idx] : local) {
    idx = out.elements.size();
    out.elements.push_back(x);
  }
  const std::size_t k = out.elements.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k);
  std::vector<std::size_t> free_idx;
  for (std::size_t f : faces) {
    free_idx.clear();
    for (std::size_t i = 0; i < m; ++i)
      if (!fixed[i]) free_idx.push_back(local[rep.faces()[f][i]]);
    const double wf = rep.face_weights()[f];
    for (std::size_t a : free_idx)
      for (std::size_t b : free_idx)
        if (a != b) w(a, b) += wf;
  }
  out.probabilities = Eigen::MatrixXd::Zero(k, k);
  out.stationary.assign(k, 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double row = w.row(a).sum();
    if (row <= 0.0) throw ValidationError("degenerate link: isolated skeleton vertex");
    out.probabilities.row(a) = w.row(a) / row;
    out.stationary[a] = row;
    total += row;
  }
  for (double& p : out.stationary) p /= total;
  return out;
}

std::vector<bool> tau_partitions(const ComplexRep& rep, const std::vector<std::size_t>& tau) {
  std::vector<bool> fixed(rep.dimension(), false);
  for (std::size_t x : tau) {
    if (x >= rep.ground_size()) throw ValidationError("face element out of range");
    const std::size_t p = rep.ground()[x].partition;
    if (fixed[p]) throw ValidationError("face has two elements in one partition");
    fixed[p] = true;
  }
  return fixed;
}

double normalized_lambda2(const Eigen::MatrixXd& p, std::vector<double> pi) {
  double total = 0.0;
  for (double x : pi) total += x;
  for (double& x : pi) x /= total;
  return spectral_gap(p, pi).lambda2;
}

}  // namespace

SkeletonWalk skeleton_walk_matrix(const ComplexRep& rep, const std::vector<std::size_t>& tau) {
  const std::size_t m = rep.dimension();
  if (m < 2 || tau.size() + 2 > m) throw ValidationError("skeleton walk needs |tau| <= m - 2");
  const auto fixed = tau_partitions(rep, tau);
  std::vector<std::size_t> faces;
  for (std::size_t f = 0; f < rep.faces().size(); ++f)
    if (rep.contains(f, tau)) faces.push_back(f);
  if (faces.empty()) throw ValidationError("tau is not a face of the complex");
  return skeleton_from_faces(rep, faces, fixed);
}

TransitionMatrix two_step_walk_matrix(const ComplexRep& rep) {
  const std::size_t m = rep.dimension();
  const std::size_t nf = rep.faces().size();
  if (m == 0) throw ValidationError("two-step walk needs at least one partition");
  TransitionMatrix out;
  out.states = rep.face_sets();
  out.probabilities = Eigen::MatrixXd::Zero(nf, nf);
  constexpr std::size_t wildcard = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 0; k < m; ++k) {
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
    for (std::size_t f = 0; f < nf; ++f) {
      auto key = rep.faces()[f];
      key[k] = wildcard;
      groups[std::move(key)].push_back(f);
    }
    for (const auto& [key, members] : groups) {
      double total = 0.0;
      for (std::size_t f : members) total += rep.face_weights()[f];
      for (std::size_t a : members)
        for (std::size_t b : members) out.probabilities(a, b) += rep.face_weights()[b] / total / double(m);
    }
  }
  return out;
}

CliqueInfluenceMatrix clique_influence_matrix(const ComplexRep& rep) {
  const std::size_t u = rep.ground_size();
  std::vector<double> prob(u, 0.0);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(u, u);
  double total = 0.0;
  for (std::size_t f = 0; f < rep.faces().size(); ++f) {
    const double w = rep.face_weights()[f];
    total += w;
    for (std::size_t x : rep.faces()[f]) {
      prob[x] += w;
      for (std::size_t y : rep.faces()[f]) joint(x, y) += w;
    }
  }
  CliqueInfluenceMatrix out;
  out.ground = rep.ground();
  out.entries = Eigen::MatrixXd::Zero(u, u);
  for (std::size_t x = 0; x < u; ++x) {
    if (prob[x] <= 0.0)
      throw NumericError("ground event " + std::to_string(x) + " has zero probability; conditioning undefined");
    for (std::size_t y = 0; y < u; ++y) {
      if (rep.ground()[x].partition == rep.ground()[y].partition) continue;
      out.entries(x, y) = joint(x, y) / prob[x] - prob[y] / total;
    }
  }
  return out;
}

CliqueInfluenceMatrix clique_influence_matrix(const HardCoreInstance& instance, const CliqueCover& disjoint_cover) {
  return clique_influence_matrix(ComplexRep(instance, disjoint_cover));
}

double max_real_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ValidationError("matrix must be square");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  return solver.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ValidationError("matrix must be square");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- bound checks

BoundCheck make_bound_check(std::string name, double lhs, double rhs, double tolerance) {
  return {std::move(name), lhs, rhs, lhs <= rhs + tolerance};
}

bool SpectralBoundsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.holds; });
}

SpectralBoundsReport verify_spectral_bounds(const HardCoreInstance& instance, const CliqueCover& disjoint_cover,
                                            const std::optional<InfluenceConditionResult>& certificate) {
  const auto cover_report = require_disjoint(instance, disjoint_cover);
  const std::size_t m = disjoint_cover.size();
  if (m < 2) throw ValidationError("spectral bounds need at least two cliques");
  const ComplexRep rep(instance, disjoint_cover);
  const auto skeleton = skeleton_walk_matrix(rep);

  SpectralBoundsReport out;
  out.cliques = m;
  out.skeleton_lambda2 = normalized_lambda2(skeleton.probabilities, skeleton.stationary);
  out.influence_lambda1 = max_real_eigenvalue(clique_influence_matrix(rep).entries);
  out.max_clique_z = cover_report.max_clique_z;
  out.checks.push_back(
      make_bound_check("skeleton_vs_clique_influence", out.skeleton_lambda2, out.influence_lambda1 / double(m - 1)));
  out.checks.push_back(make_bound_check("skeleton_vs_max_clique_z", out.skeleton_lambda2,
                                        1.0 - 1.0 / (12.0 * out.max_clique_z * out.max_clique_z)));

  if (certificate) {
    double worst = 0.0;
    for (Mask s : policy_subsets(instance.size(), certificate->policy)) {
      VertexSet subset;
      for_each_bit(s, [&](Vertex v) { subset.push_back(v); });
      const auto sub = induced_subinstance(instance, subset);
      std::vector<std::int64_t> local(instance.size(), -1);
      for (std::size_t i = 0; i < sub.original.size(); ++i) local[sub.original[i]] = std::int64_t(i);
      CliqueCover restricted;
      for (const auto& k : disjoint_cover.cliques) {
        VertexSet r;
        for (Vertex v : k)
          if (local[v] >= 0) r.push_back(Vertex(local[v]));
        if (!r.empty()) restricted.cliques.push_back(std::move(r));
      }
      worst = std::max(worst, max_real_eigenvalue(clique_influence_matrix(sub.instance, restricted).entries));
    }
    const double c = certificate->c;
    out.checks.push_back(make_bound_check("clique_influence_vs_certificate", worst, (2.0 + c) * c));
  }
  return out;
}

BoundCheck check_clique_block_comparison(const HardCoreInstance& instance, const CliqueCover& cover) {
  const auto report = validate_clique_cover(instance, cover);
  if (!report.valid) throw ValidationError("invalid clique cover: " + report.message);
  const GibbsDistribution gibbs(instance);
  const auto clique = transition_matrix_exact(instance, DynamicsKind::clique(cover));
  const auto block = transition_matrix_exact(instance, DynamicsKind::block(BlockCover::from_cliques(cover)));
  const double l2c = spectral_gap(clique.probabilities, gibbs.probabilities()).lambda2;
  const double l2b = spectral_gap(block.probabilities, gibbs.probabilities()).lambda2;
  return make_bound_check("clique_vs_block_gap", l2c, 1.0 - (1.0 - l2b) / (2.0 * report.max_clique_z));
}

ExpansionProfile local_expansion_profile(const ComplexRep& rep) {
  const std::size_t m = rep.dimension();
  if (m < 2) throw ValidationError("local expansion needs m >= 2");
  if (m > 6) throw CapExceeded("local expansion profile is limited to m <= 6");
  ExpansionProfile out;
  for (std::size_t k = 0; k + 2 <= m; ++k) {
    double alpha = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    for (unsigned parts = 0; parts < (1u << m); ++parts) {
      if (std::size_t(std::popcount(parts)) != k) continue;
      std::vector<bool> fixed(m);
      for (std::size_t i = 0; i < m; ++i) fixed[i] = (parts >> i) & 1;
      std::map<std::vector<std::size_t>, std::vector<std::size_t>> links;
      for (std::size_t f = 0; f < rep.faces().size(); ++f) {
        std::vector<std::size_t> tau;
        for (std::size_t i = 0; i < m; ++i)
          if (fixed[i]) tau.push_back(rep.faces()[f][i]);
        links[std::move(tau)].push_back(f);
      }
      for (const auto& [tau, faces] : links) {
        const auto walk = skeleton_from_faces(rep, faces, fixed);
        alpha = std::max(alpha, normalized_lambda2(walk.probabilities, walk.stationary));
        ++count;
      }
    }
    out.alpha.push_back(alpha);
    out.faces.push_back(count);
  }
  const auto two_step = two_step_walk_matrix(rep);
  out.two_step_lambda2 = normalized_lambda2(two_step.probabilities, rep.face_weights());
  // A face with nonpositive lambda_2 is an alpha-expander for every alpha > 0.
  double prod = 1.0;
  for (double a : out.alpha) prod *= 1.0 - std::max(a, 0.0);
  out.implied_bound = 1.0 - prod / double(m);
  out.bound_holds = out.two_step_lambda2 <= out.implied_bound + kBoundTolerance;
  return out;
}

DisjointCover disjointify_cover(const Graph& graph, const CliqueCover& cover) {
  const auto report = validate_clique_cover(graph, cover);
  if (!report.valid) throw ValidationError("invalid clique cover: " + report.message);
  DisjointCover out;
  std::vector<bool> taken(graph.vertex_count(), false);
  for (const auto& c : cover.cliques) {
    VertexSet k;
    for (Vertex v : c)
      if (!taken[v]) k.push_back(v);
    for (Vertex v : c) taken[v] = true;
    out.changed = out.changed || k != c;
    out.emptied.push_back(k.empty());
    out.cover.cliques.push_back(std::move(k));
  }
  return out;
}

CliqueCover disjoint_nonempty(const Graph& graph, const CliqueCover& cover) {
  CliqueCover out;
  for (auto& k : disjointify_cover(graph, cover).cover.cliques)
    if (!k.empty()) out.cliques.push_back(std::move(k));
  return out;
}

SpectralRadiusCheck spectral_radius_bound_check(const Eigen::MatrixXd& a, const std::vector<double>& p, double xi) {
  const auto n = std::size_t(a.rows());
  if (a.cols() != a.rows() || p.size() != n) throw ValidationError("dimensions of A and p disagree");
  require_positive(p, n, "p");
  SpectralRadiusCheck out;
  out.row_condition = true;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j)) * p[j];
    if (row > xi * p[i] + 1e-12 * std::max(1.0, std::abs(xi * p[i]))) out.row_condition = false;
  }
  out.spectral_radius = spectral_radius(a);
  out.radius_within = out.spectral_radius <= xi + kBoundTolerance;
  return out;
}

}  // namespace hsm
