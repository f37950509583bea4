#include "hsm/estimator.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>

#include "hsm/dynamics.hpp"
#include "parallel.hpp"

namespace hsm {

namespace {

struct Counts {
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  std::uint64_t steps = 0;
};

// worker(ratio index, number of samples, stream seed) -> counts
using RatioWorker = std::function<Counts(std::size_t, std::uint64_t, std::uint64_t)>;

std::uint64_t ceil_guarded(double x) {
  // Absorb representation error such as 384 / 0.1^2 = 38399.999...
  return std::uint64_t(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
}

std::vector<RatioEstimate> run_ratios(std::size_t m, const std::vector<bool>& trivial, const SampleBudget& budget,
                                      const EstimatorConfig& config, const RatioWorker& worker) {
  const unsigned reps = std::max(1u, config.parallel_chains);
  struct Task {
    std::size_t ratio;
    unsigned replicate;
    std::uint64_t samples;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < m; ++i) {
    if (trivial[i]) continue;
    for (unsigned r = 0; r < reps; ++r) {
      const std::uint64_t share = budget.samples / reps + (r < budget.samples % reps ? 1 : 0);
      if (share > 0) tasks.push_back({i, r, share});
    }
  }
  std::vector<Counts> results(tasks.size());
  detail::parallel_for(tasks.size(), config.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    results[t] = worker(task.ratio, task.samples, derive_seed(config.master_seed, {task.ratio, task.replicate}));
  });
  std::vector<RatioEstimate> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i].clique = i;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& r = out[tasks[t].ratio];
    r.hits += results[t].hits;
    r.samples += results[t].samples;
    r.steps += results[t].steps;
  }
  for (auto& r : out) {
    if (trivial[r.clique]) {
      r.ratio = 1.0;
      continue;
    }
    if (r.hits == 0)
      throw NumericError("ratio " + std::to_string(r.clique) +
                         ": no sample had the clique empty (zero empirical frequency); increase the sample budget");
    r.ratio = double(r.hits) / double(r.samples);
  }
  return out;
}

EstimateReport assemble(std::vector<RatioEstimate> ratios, const SampleBudget& budget, std::size_t m, double zmax,
                        const EstimatorConfig& config, std::chrono::steady_clock::time_point start) {
  EstimateReport rep;
  double log_est = 0.0;
  for (const auto& r : ratios) {
    log_est -= std::log(r.ratio);
    rep.total_steps += r.steps;
  }
  rep.log_estimate = log_est;
  rep.estimate = std::exp(log_est);
  if (!std::isfinite(rep.estimate)) throw NumericError("estimate overflows double precision; use log_estimate");
  rep.ratios = std::move(ratios);
  rep.budget = budget;
  rep.cliques = m;
  rep.max_clique_z = zmax;
  rep.epsilon = config.epsilon;
  rep.seed = config.master_seed;
  rep.parallel_chains = std::max(1u, config.parallel_chains);
  rep.mode = config.mode;
  rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

struct ExplicitRatio {
  CliqueCover active;  // K_j restricted to V_i, j >= i, nonempty
  VertexSet target;    // K_i restricted to V_i
  VertexSet residual;  // V_i
};

std::vector<ExplicitRatio> explicit_setup(const HardCoreInstance& instance, const CliqueCover& cover) {
  const auto residuals = residual_vertex_sets(instance.size(), cover);
  std::vector<ExplicitRatio> out(cover.size());
  for (std::size_t i = 0; i < cover.size(); ++i) {
    std::vector<bool> in_vi(instance.size(), false);
    for (Vertex v : residuals[i]) in_vi[v] = true;
    out[i].residual = residuals[i];
    for (std::size_t j = i; j < cover.size(); ++j) {
      VertexSet k;
      for (Vertex v : cover.cliques[j])
        if (in_vi[v]) k.push_back(v);
      if (j == i) out[i].target = k;
      if (!k.empty()) out[i].active.cliques.push_back(std::move(k));
    }
  }
  return out;
}

CoverReport require_valid_cover(const HardCoreInstance& instance, const CliqueCover& cover) {
  auto report = validate_clique_cover(instance, cover);
  if (!report.valid) throw ValidationError("invalid clique cover: " + report.message);
  if (cover.size() == 0) throw ValidationError("clique cover is empty");
  return report;
}

Counts run_explicit(const HardCoreInstance& instance, const ExplicitRatio& setup, const SampleBudget& budget,
                    const EstimatorConfig& config, std::uint64_t samples, std::uint64_t seed) {
  auto dyn = CliqueDynamics::unchecked(instance, setup.active);
  ChainState state(instance.size(), seed);
  auto target_empty = [&] {
    return std::none_of(setup.target.begin(), setup.target.end(), [&](Vertex v) { return state.occupied(v); });
  };
  Counts c;
  if (config.mode == SamplingMode::Restart) {
    for (std::uint64_t k = 0; k < samples; ++k) {
      for (Vertex v : setup.residual) state.set(v, false);
      for (std::uint64_t t = 0; t < budget.steps_per_sample; ++t) dyn.step(state);
      c.hits += target_empty();
    }
  } else {
    const std::uint64_t thin = config.thin ? config.thin : setup.active.size();
    for (std::uint64_t t = 0; t < budget.steps_per_sample; ++t) dyn.step(state);
    for (std::uint64_t k = 0; k < samples; ++k) {
      if (k > 0)
        for (std::uint64_t t = 0; t < thin; ++t) dyn.step(state);
      c.hits += target_empty();
    }
  }
  c.samples = samples;
  c.steps = state.step_count();
  return c;
}

Counts run_grid(const Discretization& disc, const CellCover& cover, std::size_t i, const SampleBudget& budget,
                const EstimatorConfig& config, std::uint64_t samples, std::uint64_t seed) {
  GridCliqueDynamics dyn(disc, cover, i);
  Rng rng(seed);
  Counts c;
  std::uint64_t steps = 0;
  if (config.mode == SamplingMode::Restart) {
    for (std::uint64_t k = 0; k < samples; ++k) {
      dyn.reset();
      for (std::uint64_t t = 0; t < budget.steps_per_sample; ++t) dyn.step(rng);
      steps += budget.steps_per_sample;
      c.hits += dyn.cell_empty(i);
    }
  } else {
    const std::uint64_t thin = config.thin ? config.thin : dyn.active_cells();
    for (std::uint64_t t = 0; t < budget.steps_per_sample; ++t) dyn.step(rng);
    steps += budget.steps_per_sample;
    for (std::uint64_t k = 0; k < samples; ++k) {
      if (k > 0) {
        for (std::uint64_t t = 0; t < thin; ++t) dyn.step(rng);
        steps += thin;
      }
      c.hits += dyn.cell_empty(i);
    }
  }
  c.samples = samples;
  c.steps = steps;
  return c;
}

}  // namespace

SampleBudget sample_budget(std::size_t m, double max_clique_z, double epsilon, const EstimatorConfig& config) {
  if (m == 0) throw ValidationError("sample budget needs at least one clique");
  if (!(max_clique_z >= 1.0)) throw ValidationError("max clique partition function must be >= 1");
  check_epsilon(epsilon);
  const double mz = double(m) * max_clique_z;
  SampleBudget b;
  b.samples = config.samples_per_ratio ? config.samples_per_ratio
                                       : ceil_guarded(config.sample_constant * mz / (epsilon * epsilon));
  b.per_sample_tv = config.tv_constant * epsilon / mz;
  b.steps_per_sample = config.chain_steps_per_sample
                           ? config.chain_steps_per_sample
                           : ceil_guarded(config.chain_constant * double(m) * std::log(mz / b.per_sample_tv));
  return b;
}

std::vector<VertexSet> residual_vertex_sets(std::size_t vertex_count, const CliqueCover& cover) {
  std::vector<bool> removed(vertex_count, false);
  std::vector<VertexSet> out;
  for (std::size_t i = 0; i <= cover.size(); ++i) {
    VertexSet vi;
    for (Vertex v = 0; v < vertex_count; ++v)
      if (!removed[v]) vi.push_back(v);
    out.push_back(std::move(vi));
    if (i < cover.size())
      for (Vertex v : cover.cliques[i]) removed.at(v) = true;
  }
  return out;
}

std::vector<double> exact_ratios(const HardCoreInstance& instance, const CliqueCover& cover) {
  const auto residuals = residual_vertex_sets(instance.size(), cover);
  std::vector<double> z;
  for (const auto& vi : residuals) z.push_back(partition_function_bruteforce(induced_subinstance(instance, vi).instance));
  std::vector<double> out;
  for (std::size_t i = 0; i < cover.size(); ++i) out.push_back(z[i + 1] / z[i]);
  return out;
}

RatioEstimate ratio_estimate(const HardCoreInstance& instance, const CliqueCover& cover, std::size_t i,
                             const EstimatorConfig& config) {
  const auto report = require_valid_cover(instance, cover);
  if (i >= cover.size()) throw ValidationError("clique index out of range");
  const auto budget = sample_budget(cover.size(), report.max_clique_z, config.epsilon, config);
  const auto setups = explicit_setup(instance, cover);
  std::vector<bool> trivial(cover.size(), true);
  trivial[i] = setups[i].target.empty();
  auto ratios = run_ratios(cover.size(), trivial, budget, config, [&](std::size_t r, std::uint64_t s, std::uint64_t seed) {
    return run_explicit(instance, setups[r], budget, config, s, seed);
  });
  return ratios[i];
}

EstimateReport estimate_partition_function(const HardCoreInstance& instance, const CliqueCover& cover,
                                           const EstimatorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = require_valid_cover(instance, cover);
  const auto budget = sample_budget(cover.size(), report.max_clique_z, config.epsilon, config);
  const auto setups = explicit_setup(instance, cover);
  std::vector<bool> trivial(cover.size());
  for (std::size_t i = 0; i < cover.size(); ++i) trivial[i] = setups[i].target.empty();
  auto ratios = run_ratios(cover.size(), trivial, budget, config, [&](std::size_t r, std::uint64_t s, std::uint64_t seed) {
    return run_explicit(instance, setups[r], budget, config, s, seed);
  });
  return assemble(std::move(ratios), budget, cover.size(), report.max_clique_z, config, start);
}

EstimateReport estimate_with_exact_sampler(const HardCoreInstance& instance, const CliqueCover& cover,
                                           const EstimatorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = require_valid_cover(instance, cover);
  const auto budget = sample_budget(cover.size(), report.max_clique_z, config.epsilon, config);
  const auto setups = explicit_setup(instance, cover);
  struct Exact {
    std::vector<double> cumulative;
    std::vector<Mask> masks;
    Mask target = 0;
  };
  std::vector<Exact> exact(cover.size());
  std::vector<bool> trivial(cover.size());
  for (std::size_t i = 0; i < cover.size(); ++i) {
    trivial[i] = setups[i].target.empty();
    if (trivial[i]) continue;
    auto sub = induced_subinstance(instance, setups[i].residual);
    GibbsDistribution gibbs(sub.instance);
    double acc = 0.0;
    for (double p : gibbs.probabilities()) exact[i].cumulative.push_back(acc += p);
    exact[i].cumulative.back() = 1.0;
    exact[i].masks = gibbs.masks();
    for (std::size_t k = 0; k < sub.original.size(); ++k)
      if (std::binary_search(setups[i].target.begin(), setups[i].target.end(), sub.original[k]))
        exact[i].target |= Mask{1} << k;
  }
  auto ratios = run_ratios(cover.size(), trivial, budget, config, [&](std::size_t r, std::uint64_t s, std::uint64_t seed) {
    Rng rng(seed);
    Counts c;
    const auto& e = exact[r];
    for (std::uint64_t k = 0; k < s; ++k) {
      auto pos = std::size_t(std::upper_bound(e.cumulative.begin(), e.cumulative.end(), rng.uniform()) -
                             e.cumulative.begin());
      pos = std::min(pos, e.masks.size() - 1);
      c.hits += (e.masks[pos] & e.target) == 0;
    }
    c.samples = s;
    return c;
  });
  return assemble(std::move(ratios), budget, cover.size(), report.max_clique_z, config, start);
}

GridCliqueDynamics::GridCliqueDynamics(const Discretization& disc, const CellCover& cover, std::uint64_t first_active)
    : disc_(&disc), cover_(&cover), first_(first_active) {
  const std::uint64_t m = cover.cell_count();
  if (m > 50'000'000) throw CapExceeded("too many cells for the implicit grid sampler");
  if (first_active >= m) throw ValidationError("no active cells");
  occupant_.resize(m);
  has_.assign(m, 0);
  // Cell offsets whose cells can hold a point in conflict with a point of the origin cell.
  const int d = disc.dim();
  const auto reach = std::int64_t(std::ceil(disc.conflict_radius() / double(cover.side()))) + 1;
  GridPoint off;
  std::function<void(int, long double)> rec = [&](int axis, long double min_sq) {
    if (axis == d) {
      bool zero = std::all_of(off.coords.begin(), off.coords.begin() + d, [](std::int64_t c) { return c == 0; });
      if (!zero && min_sq <= disc.threshold_squared()) cell_offsets_.push_back(off);
      return;
    }
    for (std::int64_t o = -reach; o <= reach; ++o) {
      const long double gap = o == 0 ? 0.0L : (long double)(std::abs(o) - 1) * cover.side() + 1.0L;
      off.coords[axis] = o;
      rec(axis + 1, min_sq + gap * gap);
    }
    off.coords[axis] = 0;
  };
  rec(0, 0.0L);
}

void GridCliqueDynamics::reset() { std::fill(has_.begin(), has_.end(), 0); }

void GridCliqueDynamics::step(Rng& rng) {
  const std::uint64_t c = first_ + rng.index(cover_->cell_count() - first_);
  const double u = rng.uniform();
  const std::uint64_t size = cover_->cell_size(c);
  const double t = u * (1.0 + double(size) * disc_->lambda_rho());
  if (t < 1.0) {
    has_[c] = 0;
    return;
  }
  // The cell is a clique: any occupant blocks (or equals) the proposed point.
  if (has_[c]) return;
  auto k = std::uint64_t((t - 1.0) / disc_->lambda_rho());
  if (k >= size) k = size - 1;
  const GridPoint p = cover_->cell_point(c, k);
  const GridPoint cc = cover_->cell_coords(c);
  const int d = disc_->dim();
  for (const auto& off : cell_offsets_) {
    GridPoint nc;
    bool inside = true;
    for (int a = 0; a < d && inside; ++a) {
      nc.coords[a] = cc.coords[a] + off.coords[a];
      inside = nc.coords[a] >= 0 && nc.coords[a] < cover_->cells_per_axis();
    }
    if (!inside) continue;
    const std::uint64_t idx = cover_->cell_index(nc);
    if (has_[idx] && disc_->conflicts(p, occupant_[idx])) return;
  }
  occupant_[c] = p;
  has_[c] = 1;
}

std::vector<GridPoint> GridCliqueDynamics::configuration() const {
  std::vector<GridPoint> out;
  for (std::size_t c = 0; c < has_.size(); ++c)
    if (has_[c]) out.push_back(occupant_[c]);
  return out;
}

RatioEstimate grid_ratio_estimate(const Discretization& disc, const CellCover& cover, std::size_t i,
                                  const EstimatorConfig& config) {
  const std::size_t m = cover.cell_count();
  if (i >= m) throw ValidationError("cell index out of range");
  const auto budget = sample_budget(m, cover.max_clique_z(), config.epsilon, config);
  std::vector<bool> trivial(m, true);
  trivial[i] = false;
  auto ratios = run_ratios(m, trivial, budget, config, [&](std::size_t r, std::uint64_t s, std::uint64_t seed) {
    return run_grid(disc, cover, r, budget, config, s, seed);
  });
  return ratios[i];
}

EstimateReport estimate_grid(const Discretization& disc, const EstimatorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const CellCover cover(disc);
  const std::size_t m = cover.cell_count();
  const auto budget = sample_budget(m, cover.max_clique_z(), config.epsilon, config);
  std::vector<bool> trivial(m, false);
  auto ratios = run_ratios(m, trivial, budget, config, [&](std::size_t r, std::uint64_t s, std::uint64_t seed) {
    return run_grid(disc, cover, r, budget, config, s, seed);
  });
  auto rep = assemble(std::move(ratios), budget, m, cover.max_clique_z(), config, start);
  DiscretizationSummary sum;
  sum.rho = disc.rho();
  sum.grid_side = disc.grid_side();
  sum.lambda_rho = disc.lambda_rho();
  sum.cell_side = cover.side();
  sum.cells = cover.cell_count();
  sum.max_clique_z = cover.max_clique_z();
  sum.edge_rule = disc.rule() == EdgeRule::Strict ? "strict" : "inclusive";
  rep.discretization = sum;
  return rep;
}

EstimateReport estimate_hard_sphere(const HardSphereInstance& instance, double epsilon, double delta,
                                    std::uint64_t seed, EstimatorConfig base, EdgeRule rule) {
  instance.validate();
  check_epsilon(epsilon);
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0,1]");
  if (!check_fugacity_regime(instance, delta)) {
    throw RegimeError("fugacity " + std::to_string(instance.lambda) + " exceeds (1-delta) e / 2^d = " +
                      std::to_string((1.0 - delta) * std::exp(1.0) / std::pow(2.0, instance.d)));
  }
  const double gamma = delta / 2.0;
  const Resolution res = choose_resolution(instance, epsilon / 3.0, gamma, rule);
  const DegreeBound deg = max_degree_bound(res.disc, gamma);
  const CellCover cover(res.disc);

  base.epsilon = epsilon / 3.0;
  base.master_seed = seed;
  EstimateReport rep = estimate_grid(res.disc, base);
  rep.epsilon = epsilon;
  auto& sum = *rep.discretization;
  sum.degree_bound = deg.bound;
  sum.degree_threshold = deg.rho_threshold;
  sum.convergence_constant = res.c_conv;
  sum.error_bound = res.error_bound;
  rep.regime_flags = {
      {"fugacity_regime", true},
      {"degree_precondition", deg.precondition_met},
      {"weight_below_tree_threshold", discretized_weight_below_threshold(res.disc, delta)},
      {"cell_side_positive", cover.side() >= 1},
      {"discretization_error_within_budget", res.error_bound <= epsilon / 3.0},
  };
  return rep;
}

}  // namespace hsm
