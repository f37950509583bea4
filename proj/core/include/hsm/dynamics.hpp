#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hsm/hardcore.hpp"
#include "hsm/rng.hpp"

namespace hsm {

inline constexpr std::size_t kDefaultBlockCap = 20;

/// Current independent set of a running chain plus its private RNG stream.
class ChainState {
 public:
  ChainState(std::size_t vertex_count, std::uint64_t seed);
  ChainState(std::size_t vertex_count, std::uint64_t seed, const IndependentSet& start);

  IndependentSet current() const;
  bool occupied(Vertex v) const { return occ_[v] != 0; }
  std::uint64_t step_count() const { return steps_; }
  std::size_t vertex_count() const { return occ_.size(); }
  Rng& rng() { return rng_; }

  void set(Vertex v, bool on) { occ_[v] = on ? 1 : 0; }
  void advance() { ++steps_; }

 private:
  std::vector<std::uint8_t> occ_;
  std::uint64_t steps_ = 0;
  Rng rng_;
};

/// Clique dynamics on a fixed instance and cover. Each step consumes exactly two
/// draws: the clique index, then one uniform compared against the cumulative
/// clique-restricted Gibbs weights (empty set first, then members in cover order).
/// The instance must outlive this object.
class CliqueDynamics {
 public:
  CliqueDynamics(const HardCoreInstance& instance, CliqueCover cover);
  /// Skips cover validation; used for cliques restricted to an induced subgraph.
  static CliqueDynamics unchecked(const HardCoreInstance& instance, CliqueCover cover);

  void step(ChainState& state) const;
  /// Vertex selected by uniform u in clique i, or -1 for the empty outcome.
  std::int64_t outcome(std::size_t clique, double u) const;

  const CliqueCover& cover() const { return cover_; }
  double clique_z(std::size_t i) const { return z_[i]; }

 private:
  CliqueDynamics(const HardCoreInstance& instance, CliqueCover cover, bool validate);

  const HardCoreInstance* instance_;
  CliqueCover cover_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> z_;
};

/// Heat-bath block dynamics: resample one block from the Gibbs law conditioned on
/// the configuration outside it. Two draws per step. The instance must outlive this.
class BlockDynamics {
 public:
  BlockDynamics(const HardCoreInstance& instance, BlockCover cover, std::size_t block_cap = kDefaultBlockCap);

  void step(ChainState& state) const;

  /// Independent sets of G[B_i] (local masks over block order) with weights.
  struct Block {
    VertexSet vertices;
    std::vector<Mask> sets;
    std::vector<double> weights;
    std::vector<VertexSet> outside_neighbors;  // per local vertex
  };
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  const HardCoreInstance* instance_;
  std::vector<Block> blocks_;
};

struct DynamicsKind {
  enum class Type { Clique, Block, Glauber };

  Type type = Type::Glauber;
  CliqueCover cliques;
  BlockCover blocks;
  /// Hold with probability 1/2 before each step (one extra draw).
  bool lazy = false;

  static DynamicsKind clique(CliqueCover cover);
  static DynamicsKind block(BlockCover cover);
  /// Clique dynamics on the singleton cover.
  static DynamicsKind glauber();
  DynamicsKind as_lazy() const;
};

/// Type-erased stepper for any DynamicsKind. The instance must outlive this.
class Dynamics {
 public:
  Dynamics(const HardCoreInstance& instance, const DynamicsKind& kind);
  void step(ChainState& state) const;

 private:
  bool lazy_;
  std::unique_ptr<CliqueDynamics> clique_;
  std::unique_ptr<BlockDynamics> block_;
};

void clique_dynamics_step(const HardCoreInstance& instance, const CliqueCover& cover, ChainState& state);
void block_dynamics_step(const HardCoreInstance& instance, const BlockCover& cover, ChainState& state);

struct ChainRun {
  std::vector<IndependentSet> samples;
  std::vector<std::uint64_t> times;
  IndependentSet final_state;
};

/// Starts at the empty set; keeps the state after step t whenever t > burn_in and
/// (t - burn_in) is a multiple of thin.
ChainRun run_chain(const HardCoreInstance& instance, const DynamicsKind& kind, std::uint64_t steps,
                   std::uint64_t seed, std::uint64_t burn_in = 0, std::uint64_t thin = 1);

/// One JSON object per retained sample: {"t": step, "set": [vertices]}.
void write_trajectory_jsonl(std::ostream& out, const ChainRun& run);

struct TransitionMatrix {
  std::vector<IndependentSet> states;
  Eigen::MatrixXd probabilities;
};

/// States are ordered as in gibbs_exact(instance).
TransitionMatrix transition_matrix_exact(const HardCoreInstance& instance, const DynamicsKind& kind,
                                         std::size_t cap = kDefaultBruteForceCap);

double tv_distance(std::span<const double> p, std::span<const double> q);

/// max_j |(pi P)_j - pi_j|
double stationarity_defect(const Eigen::MatrixXd& p, std::span<const double> pi);
/// max_{i,j} |pi_i P_ij - pi_j P_ji|
double detailed_balance_defect(const Eigen::MatrixXd& p, std::span<const double> pi);

struct MixingTime {
  bool mixed = false;
  std::uint64_t steps = 0;
  double distance = 1.0;
};

inline constexpr std::uint64_t kDefaultMixingCap = 100000;

MixingTime mixing_time_exact(const Eigen::MatrixXd& p, std::span<const double> pi, std::size_t start,
                             double epsilon, std::uint64_t cap = kDefaultMixingCap);
MixingTime mixing_time_exact(const HardCoreInstance& instance, const DynamicsKind& kind, double epsilon,
                             const IndependentSet& start, std::uint64_t cap = kDefaultMixingCap);

struct SpectralGap {
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double gap = 0.0;
};

/// Eigenvalues of D^{1/2} P D^{-1/2}; throws ValidationError if detailed balance
/// fails by more than tolerance.
SpectralGap spectral_gap(const Eigen::MatrixXd& p, std::span<const double> pi, double tolerance = 1e-9);

/// (1/gap) * ln(1/(pi_min * epsilon))
double mixing_time_bound(const SpectralGap& gap, double pi_min, double epsilon);

}  // namespace hsm
