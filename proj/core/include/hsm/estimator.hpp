#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsm/hardcore.hpp"
#include "hsm/hs_model.hpp"
#include "hsm/rng.hpp"

namespace hsm {

enum class SamplingMode {
  /// One chain per (ratio, replicate): burn in for steps_per_sample steps, then
  /// record a sample every `thin` steps.
  Thinned,
  /// Every sample comes from its own run of steps_per_sample steps started at the empty set.
  Restart,
};

struct EstimatorConfig {
  double epsilon = 0.1;
  double sample_constant = 48.0;  ///< s = ceil(c * m * Zmax / eps^2)
  double tv_constant = 0.125;     ///< eps_s = c * eps / (m * Zmax)
  double chain_constant = 64.0;   ///< steps = ceil(c * m * ln(m * Zmax / eps_s))
  std::uint64_t samples_per_ratio = 0;       ///< 0 = from the budget
  std::uint64_t chain_steps_per_sample = 0;  ///< 0 = from the budget
  std::uint64_t master_seed = 0;
  unsigned parallel_chains = 1;  ///< replicate chains per ratio; part of the seed->result map
  unsigned threads = 1;          ///< worker threads; never changes results
  SamplingMode mode = SamplingMode::Thinned;
  std::uint64_t thin = 0;  ///< 0 = one sweep, i.e. the number of active cliques
};

struct SampleBudget {
  std::uint64_t samples = 0;
  double per_sample_tv = 0.0;
  std::uint64_t steps_per_sample = 0;
};

SampleBudget sample_budget(std::size_t m, double max_clique_z, double epsilon, const EstimatorConfig& config = {});

struct RatioEstimate {
  std::size_t clique = 0;
  double ratio = 1.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  std::uint64_t steps = 0;
};

struct DiscretizationSummary {
  double rho = 0.0;
  std::int64_t grid_side = 0;
  double lambda_rho = 0.0;
  std::int64_t cell_side = 0;
  std::uint64_t cells = 0;
  double max_clique_z = 0.0;
  double degree_bound = 0.0;
  double degree_threshold = 0.0;
  double convergence_constant = 0.0;
  double error_bound = 0.0;
  std::string edge_rule = "strict";
};

struct EstimateReport {
  double estimate = 0.0;
  double log_estimate = 0.0;
  std::vector<RatioEstimate> ratios;
  SampleBudget budget;
  std::size_t cliques = 0;
  double max_clique_z = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 0;
  unsigned parallel_chains = 1;
  SamplingMode mode = SamplingMode::Thinned;
  double wall_time_seconds = 0.0;
  std::vector<std::pair<std::string, bool>> regime_flags;
  std::optional<DiscretizationSummary> discretization;
};

/// V_i = V minus the union of K_j for j < i, for i = 1..m+1 (0-based: index 0..m).
std::vector<VertexSet> residual_vertex_sets(std::size_t vertex_count, const CliqueCover& cover);

/// Exact ratios Z(G[V_{i+1}]) / Z(G[V_i]) by brute force.
std::vector<double> exact_ratios(const HardCoreInstance& instance, const CliqueCover& cover);

RatioEstimate ratio_estimate(const HardCoreInstance& instance, const CliqueCover& cover, std::size_t i,
                             const EstimatorConfig& config);

EstimateReport estimate_partition_function(const HardCoreInstance& instance, const CliqueCover& cover,
                                           const EstimatorConfig& config);

/// Same telescoping estimator, with every sample drawn exactly from the Gibbs
/// distribution of G[V_i] instead of a chain. Small instances only.
EstimateReport estimate_with_exact_sampler(const HardCoreInstance& instance, const CliqueCover& cover,
                                           const EstimatorConfig& config);

/// Clique dynamics on the implicit grid graph using the cell cover. Cells with index
/// below first_active are masked out (never occupied).
class GridCliqueDynamics {
 public:
  GridCliqueDynamics(const Discretization& disc, const CellCover& cover, std::uint64_t first_active = 0);

  void reset();
  void step(Rng& rng);
  bool cell_empty(std::uint64_t cell) const { return !has_[cell]; }
  std::vector<GridPoint> configuration() const;
  std::uint64_t active_cells() const { return cover_->cell_count() - first_; }

 private:
  const Discretization* disc_;
  const CellCover* cover_;
  std::uint64_t first_;
  std::vector<GridPoint> occupant_;
  std::vector<std::uint8_t> has_;
  std::vector<GridPoint> cell_offsets_;
};

RatioEstimate grid_ratio_estimate(const Discretization& disc, const CellCover& cover, std::size_t i,
                                  const EstimatorConfig& config);

/// Estimates Z(G_rho, lambda_rho) through the implicit grid and its cell cover.
EstimateReport estimate_grid(const Discretization& disc, const EstimatorConfig& config);

/// Full pipeline: regime check, resolution for eps/3 and gamma = delta/2, cell cover,
/// grid estimation at eps/3. Throws RegimeError outside the fugacity regime.
EstimateReport estimate_hard_sphere(const HardSphereInstance& instance, double epsilon, double delta,
                                    std::uint64_t seed, EstimatorConfig base = {},
                                    EdgeRule rule = EdgeRule::Strict);

}  // namespace hsm
