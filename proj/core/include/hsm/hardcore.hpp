#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hsm {

using Vertex = std::uint32_t;
using VertexSet = std::vector<Vertex>;
/// Bitmask over at most 64 vertices; used by the exact (small-instance) code paths.
using Mask = std::uint64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or a violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (brute force, SAW tree, complex, grid) was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Fugacity outside the regime in which the hard-sphere pipeline is defined.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Overflow or an undefined numeric quantity (never silently saturated).
class NumericError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultBruteForceCap = 24;

class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);

  static Graph from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges);
  /// Takes per-vertex neighbor lists as given; throws ValidationError if they are
  /// not symmetric, contain self-loops, duplicates or out-of-range indices.
  static Graph from_adjacency(std::vector<VertexSet> adjacency);

  std::size_t vertex_count() const { return adj_.size(); }
  const VertexSet& neighbors(Vertex v) const { return adj_.at(v); }
  bool adjacent(Vertex u, Vertex v) const;
  std::size_t degree(Vertex v) const { return adj_.at(v).size(); }
  std::size_t max_degree() const;
  std::size_t edge_count() const;
  /// Edges as (u, v) with u < v, in lexicographic order.
  std::vector<std::pair<Vertex, Vertex>> edges() const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);

  /// Neighborhood masks N(v); requires vertex_count() <= 64.
  std::vector<Mask> neighbor_masks() const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.adj_ == b.adj_; }

 private:
  std::vector<VertexSet> adj_;
  std::vector<std::string> labels_;
};

class HardCoreInstance {
 public:
  HardCoreInstance() = default;
  HardCoreInstance(Graph graph, std::vector<double> weights);
  static HardCoreInstance uniform(Graph graph, double lambda);

  const Graph& graph() const { return graph_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(Vertex v) const { return weights_.at(v); }
  std::size_t size() const { return graph_.vertex_count(); }
  bool univariate() const;

  friend bool operator==(const HardCoreInstance& a, const HardCoreInstance& b) {
    return a.graph_ == b.graph_ && a.weights_ == b.weights_;
  }

 private:
  Graph graph_;
  std::vector<double> weights_;
};

struct IndependentSet {
  VertexSet members;

  bool contains(Vertex v) const;
  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  Mask mask() const;
  static IndependentSet from_mask(Mask m);

  friend auto operator<=>(const IndependentSet&, const IndependentSet&) = default;
};

/// Spins fixed on a vertex subset S (true = occupied).
class PartialConfig {
 public:
  PartialConfig() = default;
  PartialConfig& set(Vertex v, bool occupied);
  static PartialConfig all_vacant(const VertexSet& s);

  bool contains(Vertex v) const { return assignment_.count(v) != 0; }
  bool spin(Vertex v) const { return assignment_.at(v); }
  VertexSet domain() const;
  const std::map<Vertex, bool>& assignment() const { return assignment_; }
  bool empty() const { return assignment_.empty(); }

  Mask occupied_mask() const;
  Mask vacant_mask() const;

 private:
  std::map<Vertex, bool> assignment_;
};

struct CliqueCover {
  std::vector<VertexSet> cliques;

  std::size_t size() const { return cliques.size(); }
  static CliqueCover singletons(std::size_t n);
};

struct BlockCover {
  std::vector<VertexSet> blocks;

  std::size_t size() const { return blocks.size(); }
  static BlockCover from_cliques(const CliqueCover& cover);
};

bool is_independent(const Graph& graph, const VertexSet& set);

/// Calls fn(mask, weight) once per independent set, in backtracking order starting
/// with the empty set. Requires instance.size() <= cap (and cap <= 63).
void for_each_independent_mask(const HardCoreInstance& instance,
                               const std::function<void(Mask, double)>& fn,
                               std::size_t cap = kDefaultBruteForceCap);

void for_each_independent_set(const HardCoreInstance& instance,
                              const std::function<void(const IndependentSet&)>& fn,
                              std::size_t cap = kDefaultBruteForceCap);

std::vector<IndependentSet> enumerate_independent_sets(const HardCoreInstance& instance,
                                                       std::size_t cap = kDefaultBruteForceCap);

double partition_function_bruteforce(const HardCoreInstance& instance,
                                     std::size_t cap = kDefaultBruteForceCap);

/// All independent sets of a small instance together with their Gibbs masses.
class GibbsDistribution {
 public:
  explicit GibbsDistribution(const HardCoreInstance& instance,
                             std::size_t cap = kDefaultBruteForceCap);

  std::size_t size() const { return masks_.size(); }
  double partition_function() const { return z_; }
  const std::vector<Mask>& masks() const { return masks_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& probabilities() const { return probs_; }
  IndependentSet state(std::size_t i) const { return IndependentSet::from_mask(masks_[i]); }
  std::vector<IndependentSet> states() const;
  /// Index of an independent set given as a mask; throws ValidationError if absent.
  std::size_t index_of(Mask m) const;
  std::size_t index_of(const IndependentSet& s) const { return index_of(s.mask()); }
  double probability(const IndependentSet& s) const { return probs_[index_of(s)]; }

 private:
  std::vector<Mask> masks_;
  std::vector<double> weights_;
  std::vector<double> probs_;
  std::vector<std::size_t> order_;  // indices sorted by mask, for lookup
  double z_ = 0.0;
};

inline GibbsDistribution gibbs_exact(const HardCoreInstance& instance,
                                     std::size_t cap = kDefaultBruteForceCap) {
  return GibbsDistribution(instance, cap);
}

struct VertexMarginal {
  double occupied = 0.0;
  double vacant = 0.0;
};

std::vector<VertexMarginal> marginals(const HardCoreInstance& instance,
                                      const PartialConfig& condition = {},
                                      std::size_t cap = kDefaultBruteForceCap);

struct InducedSubinstance {
  HardCoreInstance instance;
  /// original[i] is the parent index of vertex i of the subinstance.
  VertexSet original;
};

InducedSubinstance induced_subinstance(const HardCoreInstance& instance, const VertexSet& subset);

struct CoverReport {
  bool valid = false;
  bool covers_all = false;
  bool all_cliques = false;
  bool disjoint = false;
  /// max_i (1 + sum of weights in K_i); only meaningful when valid.
  double max_clique_z = 0.0;
  std::string message;
};

CoverReport validate_clique_cover(const HardCoreInstance& instance, const CliqueCover& cover);
/// Structural check only (no weights); max_clique_z is left at 0.
CoverReport validate_clique_cover(const Graph& graph, const CliqueCover& cover);

/// Greedy cover by maximal cliques in vertex order; deterministic.
CliqueCover greedy_clique_cover(const Graph& graph);

/// lambda_c(Delta) = (Delta-1)^(Delta-1) / (Delta-2)^Delta for Delta >= 3.
double tree_threshold(std::uint64_t delta);

/// Partition functions Z(G[S]) for every vertex subset S, indexed by mask.
/// Built with the deletion recurrence; requires n <= 22.
class SubsetPartitionTable {
 public:
  explicit SubsetPartitionTable(const HardCoreInstance& instance);

  double z(Mask subset) const { return table_[subset]; }
  Mask full() const { return full_; }
  const std::vector<Mask>& closed_neighborhoods() const { return closed_; }

 private:
  std::vector<double> table_;
  std::vector<Mask> closed_;
  Mask full_ = 0;
};

}  // namespace hsm
