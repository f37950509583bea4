#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsm/dynamics.hpp"
#include "hsm/hardcore.hpp"

namespace hsm {

inline constexpr std::size_t kSawTreeCap = 50000;
inline constexpr std::size_t kComplexFaceCap = 100000;
inline constexpr std::size_t kExhaustiveSubsetCap = 12;

// ---------------------------------------------------------------- pairwise influence

/// Psi(v,w) = mu(1_w | 1_v, sigma) - mu(1_w | 0_v, sigma) over the unconditioned vertices.
/// Entries whose conditional is undefined are NaN; see defined().
struct InfluenceMatrix {
  VertexSet vertices;
  Eigen::MatrixXd entries;
  PartialConfig condition;

  std::size_t position(Vertex v) const;
  bool defined(std::size_t i, std::size_t j) const;
  /// Entry by vertex id; throws NumericError if undefined.
  double operator()(Vertex v, Vertex w) const;
};

InfluenceMatrix pairwise_influence(const HardCoreInstance& instance, const PartialConfig& condition = {},
                                   std::size_t cap = kDefaultBruteForceCap);

/// Psi_{G[S]}(r, v) for arbitrary subsets S in O(1) per entry, from subset partition functions.
class SubsetInfluence {
 public:
  explicit SubsetInfluence(const HardCoreInstance& instance);

  /// Requires r, v in subset. Zero for r == v.
  double operator()(Mask subset, Vertex r, Vertex v) const;
  const SubsetPartitionTable& table() const { return table_; }
  std::size_t size() const { return weights_.size(); }

 private:
  SubsetPartitionTable table_;
  std::vector<double> weights_;
};

/// Pairs (v,w) with sign(Psi(v,w)) != sign(Psi(w,v)) beyond tolerance. Diagnostic only.
std::vector<std::pair<Vertex, Vertex>> sign_asymmetric_pairs(const InfluenceMatrix& psi, double tolerance = 1e-12);

// ---------------------------------------------------------------- influence conditions

struct SubsetPolicy {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static SubsetPolicy exhaustive() { return {}; }
  static SubsetPolicy sampled(std::uint64_t count, std::uint64_t seed) { return {Kind::Sampled, count, seed}; }
  std::string describe() const;
};

/// Nonempty subsets visited by a policy, in visiting order.
std::vector<Mask> policy_subsets(std::size_t n, const SubsetPolicy& policy);

struct InfluenceViolation {
  Mask subset = 0;
  Vertex root = 0;
  double lhs = 0.0;  ///< sum_{v in S} |Psi_{G[S]}(r,v)| q(v)
  double rhs = 0.0;  ///< C q(r)
};

struct InfluenceConditionResult {
  bool holds = true;
  std::vector<double> q;
  double c = 0.0;
  SubsetPolicy policy;
  std::uint64_t checked_subsets = 0;
  double worst_ratio = 0.0;  ///< max lhs / q(r)
  double worst_slack = 0.0;  ///< min (rhs - lhs)
  std::optional<InfluenceViolation> counterexample;  ///< first violation in visiting order
};

InfluenceConditionResult check_influence_condition(const HardCoreInstance& instance, const std::vector<double>& q,
                                                   double c, const SubsetPolicy& policy = SubsetPolicy::exhaustive());

struct CdcResult {
  bool holds = true;
  std::vector<double> mu;
  double alpha = 0.0;
  std::vector<double> lhs;  ///< sum_{w in N(v)} lambda_w/(1+lambda_w) mu(w)
  double worst_slack = 0.0;
  std::optional<Vertex> counterexample;
};

CdcResult check_strict_cdc(const HardCoreInstance& instance, const std::vector<double>& mu, double alpha);

struct CdcImpliesReport {
  CdcResult cdc;
  InfluenceConditionResult influence;
  bool passed = false;
};

/// Requires the strict CDC to hold (ValidationError otherwise); then checks the
/// influence condition with q = mu and C = 1/alpha, exhaustively for n <= 10.
CdcImpliesReport cdc_implies_influence_bound_check(const HardCoreInstance& instance, const std::vector<double>& mu,
                                                   double alpha, std::uint64_t sample_seed = 0);

// ---------------------------------------------------------------- SAW tree

enum class SawStatus { Free, Fixed1, Fixed0 };

struct SawNode {
  Vertex origin = 0;
  SawStatus status = SawStatus::Free;
  std::int64_t parent = -1;
  std::size_t depth = 0;
  std::vector<std::size_t> children;
};

struct SawInstance {
  HardCoreInstance instance;
  /// Tree node of each vertex of the instance.
  std::vector<std::size_t> node_of;
  /// Instance vertex of each tree node, or -1 if removed by the surgery.
  std::vector<std::int64_t> vertex_of;
};

class SawTree {
 public:
  SawTree(const HardCoreInstance& instance, Vertex root, std::size_t cap = kSawTreeCap);

  Vertex root() const { return nodes_[0].origin; }
  const std::vector<SawNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double weight(std::size_t node) const;
  /// Free copies of v.
  std::vector<std::size_t> copies(Vertex v) const;

  /// Psi_T(root, node) for every node (0 at the root and at fixed copies), by tree recursion.
  std::vector<double> root_influence() const;
  /// Hard-core instance on the free part: fixed_0 copies deleted, fixed_1 copies deleted
  /// together with their parent.
  SawInstance to_instance() const;

 private:
  const HardCoreInstance* instance_;
  std::vector<SawNode> nodes_;
};

inline SawTree saw_tree(const HardCoreInstance& instance, Vertex root, std::size_t cap = kSawTreeCap) {
  return SawTree(instance, root, cap);
}

/// Psi(root, v) for every vertex of a forest instance; 0 outside the root's component.
std::vector<double> forest_root_influence(const HardCoreInstance& forest, Vertex root);

struct SawInfluenceReport {
  Vertex root = 0;
  std::size_t tree_nodes = 0;
  std::vector<double> graph_influence;  ///< Psi_G(root, v)
  std::vector<double> tree_influence;   ///< sum over free copies of Psi_T(root, copy)
  double max_discrepancy = 0.0;
  /// Agreement of the recursion with the surgery instance.
  double surgery_discrepancy = 0.0;
};

SawInfluenceReport verify_saw_influence(const HardCoreInstance& instance, Vertex root,
                                        std::size_t cap = kSawTreeCap);

struct TreeMultiplicativityReport {
  std::uint64_t checks = 0;
  double max_defect = 0.0;
};

/// |Psi(v,w) - Psi(v,u) Psi(u,w)| over non-adjacent pairs and interior path vertices u.
TreeMultiplicativityReport verify_tree_multiplicativity(const HardCoreInstance& tree);

struct InfluenceDecayReport {
  std::vector<double> layer_sums;  ///< index k = depth
  std::vector<double> bounds;      ///< (1-alpha)^k mu(root)
  bool holds = true;
};

InfluenceDecayReport influence_decay_check(const HardCoreInstance& instance, Vertex root,
                                           const std::vector<double>& mu, double alpha,
                                           std::size_t cap = kSawTreeCap);

// ---------------------------------------------------------------- simplicial complex

struct GroundElement {
  std::size_t partition = 0;
  /// Empty-clique element o_i when nullopt, otherwise c_v.
  std::optional<Vertex> vertex;
};

/// Weighted pure m-partite complex of a disjoint clique cover. Max face k corresponds to
/// the k-th independent set of gibbs_exact(instance).
class ComplexRep {
 public:
  ComplexRep(const HardCoreInstance& instance, const CliqueCover& disjoint_cover,
             std::size_t face_cap = kComplexFaceCap);

  std::size_t dimension() const { return partitions_.size(); }
  std::size_t ground_size() const { return ground_.size(); }
  const std::vector<GroundElement>& ground() const { return ground_; }
  /// Element ids of U_i: o_i first, then c_v by vertex.
  const std::vector<std::vector<std::size_t>>& partitions() const { return partitions_; }
  std::size_t empty_element(std::size_t i) const { return partitions_[i][0]; }
  std::size_t vertex_element(Vertex v) const { return vertex_element_.at(v); }

  /// Per face, the chosen element of each partition.
  const std::vector<std::vector<std::size_t>>& faces() const { return faces_; }
  const std::vector<double>& face_weights() const { return weights_; }
  const std::vector<IndependentSet>& face_sets() const { return sets_; }

  /// w(tau): sum of max-face weights over faces containing tau (0 if tau is not a face).
  double face_weight(const std::vector<std::size_t>& tau) const;
  bool contains(std::size_t face, const std::vector<std::size_t>& tau) const;
  ComplexRep scaled(double factor) const;

 private:
  ComplexRep() = default;

  std::vector<GroundElement> ground_;
  std::vector<std::vector<std::size_t>> partitions_;
  std::vector<std::size_t> vertex_element_;
  std::vector<std::vector<std::size_t>> faces_;
  std::vector<double> weights_;
  std::vector<IndependentSet> sets_;
};

struct SkeletonWalk {
  std::vector<std::size_t> elements;  ///< link vertices (ground ids), increasing
  Eigen::MatrixXd probabilities;
  std::vector<double> stationary;
};

/// Non-lazy walk on the 1-skeleton of the link of tau. Requires |tau| <= m-2 and a
/// link with at least two vertices.
SkeletonWalk skeleton_walk_matrix(const ComplexRep& rep, const std::vector<std::size_t>& tau = {});

/// Down-up walk on max faces, in face order.
TransitionMatrix two_step_walk_matrix(const ComplexRep& rep);

struct CliqueInfluenceMatrix {
  std::vector<GroundElement> ground;
  Eigen::MatrixXd entries;
};

CliqueInfluenceMatrix clique_influence_matrix(const ComplexRep& rep);
CliqueInfluenceMatrix clique_influence_matrix(const HardCoreInstance& instance, const CliqueCover& disjoint_cover);

/// Largest real part over the spectrum of a square matrix.
double max_real_eigenvalue(const Eigen::MatrixXd& a);
double spectral_radius(const Eigen::MatrixXd& a);

// ---------------------------------------------------------------- bound checks

inline constexpr double kBoundTolerance = 1e-9;

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack() const { return rhs - lhs; }
};

BoundCheck make_bound_check(std::string name, double lhs, double rhs, double tolerance = kBoundTolerance);

struct SpectralBoundsReport {
  std::size_t cliques = 0;
  double skeleton_lambda2 = 0.0;
  double influence_lambda1 = 0.0;
  double max_clique_z = 0.0;
  std::vector<BoundCheck> checks;
  bool passed() const;
};

/// Skeleton-walk bounds through Psi^K and through Z_max. With a certificate (q, C),
/// also lambda_1(Psi^K of G[S]) <= (2+C)C over the certificate's subsets.
SpectralBoundsReport verify_spectral_bounds(const HardCoreInstance& instance, const CliqueCover& disjoint_cover,
                                            const std::optional<InfluenceConditionResult>& certificate = std::nullopt);

/// lambda_2(clique) <= 1 - (1 - lambda_2(block)) / (2 Z_max), blocks = cliques.
BoundCheck check_clique_block_comparison(const HardCoreInstance& instance, const CliqueCover& cover);

struct ExpansionProfile {
  std::vector<double> alpha;       ///< alpha_k = max lambda_2 over links of faces of size k
  std::vector<std::size_t> faces;  ///< number of faces of size k examined
  double two_step_lambda2 = 0.0;
  double implied_bound = 0.0;  ///< 1 - (1/m) prod (1 - max(alpha_k, 0))
  bool bound_holds = false;
};

ExpansionProfile local_expansion_profile(const ComplexRep& rep);

struct DisjointCover {
  CliqueCover cover;
  std::vector<bool> emptied;  ///< residual clique became empty
  bool changed = false;
};

/// K_i = C_i minus the union of C_1..C_{i-1}; cover size is preserved.
DisjointCover disjointify_cover(const Graph& graph, const CliqueCover& cover);
/// The nonempty cliques of disjointify_cover.
CliqueCover disjoint_nonempty(const Graph& graph, const CliqueCover& cover);

struct SpectralRadiusCheck {
  bool row_condition = false;
  double spectral_radius = 0.0;
  bool radius_within = false;
  /// Row condition failing is not a failure of the implication.
  bool passed() const { return !row_condition || radius_within; }
};

SpectralRadiusCheck spectral_radius_bound_check(const Eigen::MatrixXd& a, const std::vector<double>& p, double xi);

}  // namespace hsm
