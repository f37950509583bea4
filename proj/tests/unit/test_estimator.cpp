#include <doctest.h>

#include <cmath>

#include "hsm/estimator.hpp"
#include "hsm/generators.hpp"
#include "oracles.hpp"

using namespace hsm;

TEST_CASE("sample budget defaults") {
  const auto b = sample_budget(2, 4.0, 0.1);
  CHECK(b.samples == 38400);
  CHECK(b.per_sample_tv == doctest::Approx(0.125 * 0.1 / 8.0));
  CHECK(b.steps_per_sample == std::uint64_t(std::ceil(128.0 * std::log(8.0 / (0.125 * 0.1 / 8.0)))));
  EstimatorConfig cfg;
  cfg.samples_per_ratio = 10;
  cfg.chain_steps_per_sample = 3;
  const auto o = sample_budget(2, 4.0, 0.1, cfg);
  CHECK(o.samples == 10);
  CHECK(o.steps_per_sample == 3);
  CHECK_THROWS_AS(sample_budget(0, 4.0, 0.1), ValidationError);
  CHECK_THROWS_AS(sample_budget(2, 4.0, 0.0), ValidationError);
  CHECK_THROWS_AS(sample_budget(2, 4.0, 1.5), ValidationError);
}

TEST_CASE("residual sets and exact telescoping") {
  const auto inst = HardCoreInstance(path_graph(5), {0.5, 1.0, 1.5, 2.0, 0.7});
  const CliqueCover cover{{{0, 1}, {1, 2}, {3}, {3, 4}}};
  const auto v = residual_vertex_sets(5, cover);
  REQUIRE(v.size() == 5);
  CHECK(v[0] == VertexSet{0, 1, 2, 3, 4});
  CHECK(v[1] == VertexSet{2, 3, 4});
  CHECK(v[2] == VertexSet{3, 4});
  CHECK(v[3] == VertexSet{4});
  CHECK(v[4].empty());
  double prod = 1.0;
  for (double r : exact_ratios(inst, cover)) prod *= r;
  CHECK(1.0 / prod == doctest::Approx(oracle::z(inst)).epsilon(1e-12));
}

TEST_CASE("exact-sampler estimates concentrate") {
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    const auto inst = oracle::random_instance(rng, 8, 0.3, 0.3, 1.5);
    const auto z = oracle::z(inst);
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.master_seed = std::uint64_t(t);
    const auto rep = estimate_with_exact_sampler(inst, greedy_clique_cover(inst.graph()), cfg);
    CHECK(std::abs(rep.estimate - z) / z < 0.1);
  }
}

TEST_CASE("chain estimates on small instances") {
  Rng rng(15);
  int inside = 0;
  for (int t = 0; t < 10; ++t) {
    const auto inst = oracle::random_instance(rng, 6 + rng.index(4), 0.3, 0.2, 2.0);
    const auto z = oracle::z(inst);
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.master_seed = std::uint64_t(100 + t);
    const auto rep = estimate_partition_function(inst, random_clique_cover(inst.graph(), rng), cfg);
    inside += std::abs(rep.estimate - z) / z <= 0.1;
    CHECK(rep.log_estimate == doctest::Approx(std::log(rep.estimate)));
    CHECK(rep.ratios.size() == rep.cliques);
    for (const auto& r : rep.ratios) {
      CHECK(r.hits <= r.samples);
      // a clique already removed by earlier ones contributes an exact ratio of 1
      if (r.samples == 0)
        CHECK(r.ratio == 1.0);
      else
        CHECK(r.samples == rep.budget.samples);
    }
  }
  CHECK(inside >= 9);
}

TEST_CASE("results depend on the seed but not on the thread count") {
  const auto inst = HardCoreInstance(cycle_graph(7), {0.4, 1.1, 0.9, 1.6, 0.3, 0.8, 1.2});
  const auto cover = greedy_clique_cover(inst.graph());
  EstimatorConfig cfg;
  cfg.epsilon = 0.2;
  cfg.master_seed = 42;
  cfg.parallel_chains = 3;
  const auto a = estimate_partition_function(inst, cover, cfg);
  cfg.threads = 4;
  const auto b = estimate_partition_function(inst, cover, cfg);
  CHECK(a.estimate == b.estimate);
  CHECK(a.total_steps == b.total_steps);
  cfg.master_seed = 43;
  const auto c = estimate_partition_function(inst, cover, cfg);
  CHECK(a.estimate != c.estimate);
}

TEST_CASE("restart mode") {
  const auto inst = HardCoreInstance::uniform(path_graph(4), 1.0);
  EstimatorConfig cfg;
  cfg.epsilon = 0.2;
  cfg.mode = SamplingMode::Restart;
  cfg.samples_per_ratio = 4000;
  cfg.chain_steps_per_sample = 60;
  const auto rep = estimate_partition_function(inst, greedy_clique_cover(inst.graph()), cfg);
  CHECK(rep.mode == SamplingMode::Restart);
  CHECK(std::abs(rep.estimate - 8.0) / 8.0 < 0.1);
  CHECK(rep.total_steps == rep.cliques * 4000 * 60);
}

TEST_CASE("single ratio") {
  const auto inst = HardCoreInstance::uniform(complete_graph(3), 1.0);
  EstimatorConfig cfg;
  cfg.epsilon = 0.1;
  const auto r = ratio_estimate(inst, CliqueCover{{{0, 1, 2}}}, 0, cfg);
  CHECK(r.ratio == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS_AS(ratio_estimate(inst, CliqueCover{{{0, 1, 2}}}, 1, cfg), ValidationError);
}

TEST_CASE("estimator errors") {
  const auto inst = HardCoreInstance::uniform(path_graph(3), 1.0);
  EstimatorConfig cfg;
  CHECK_THROWS_AS(estimate_partition_function(inst, CliqueCover{{{0, 2}, {1}}}, cfg), ValidationError);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(estimate_partition_function(inst, greedy_clique_cover(inst.graph()), cfg), ValidationError);

  // a heavy vertex is essentially never empty: a one-sample estimate has no hits
  const auto heavy = HardCoreInstance::uniform(edgeless_graph(1), 1e9);
  EstimatorConfig one;
  one.samples_per_ratio = 1;
  one.chain_steps_per_sample = 50;
  CHECK_THROWS_AS(estimate_partition_function(heavy, CliqueCover::singletons(1), one), NumericError);
}

TEST_CASE("grid estimator against the d = 1 recurrence") {
  const HardSphereInstance rods{1, 4.0, 1.0};
  const Discretization disc(rods, 8.0);
  const double z = oracle::grid_line_z(32, 1.0 / 8.0, 8);
  EstimatorConfig cfg;
  cfg.epsilon = 0.05;
  cfg.master_seed = 5;
  const auto rep = estimate_grid(disc, cfg);
  CHECK(std::abs(rep.estimate - z) / z < 0.05);
  REQUIRE(rep.discretization.has_value());
  CHECK(rep.discretization->grid_side == 32);
  CHECK(rep.discretization->cells == CellCover(disc).cell_count());
}

TEST_CASE("grid dynamics keeps one occupant per cell and no conflicts") {
  const Discretization disc({2, 2.0, 0.3}, 6.0);
  const CellCover cells(disc);
  GridCliqueDynamics dyn(disc, cells, 1);
  Rng rng(2);
  for (int t = 0; t < 5000; ++t) {
    dyn.step(rng);
    if (t % 100) continue;
    const auto conf = dyn.configuration();
    for (std::size_t i = 0; i < conf.size(); ++i) {
      CHECK(cells.cell_of(conf[i]) >= 1);
      for (std::size_t j = i + 1; j < conf.size(); ++j) CHECK_FALSE(disc.conflicts(conf[i], conf[j]));
    }
  }
  CHECK(dyn.cell_empty(0));
  CHECK(dyn.active_cells() == cells.cell_count() - 1);
  dyn.reset();
  CHECK(dyn.configuration().empty());
}

TEST_CASE("hard-sphere pipeline") {
  CHECK_THROWS_AS(estimate_hard_sphere({1, 4.0, 2.0}, 0.3, 0.2, 1), RegimeError);
  const auto rep = estimate_hard_sphere({1, 4.0, 1.0}, 0.3, 0.2, 1);
  CHECK(std::abs(rep.estimate - 10.875) / 10.875 < 0.3);
  std::size_t true_flags = 0;
  for (const auto& [name, ok] : rep.regime_flags) true_flags += ok;
  CHECK(true_flags == rep.regime_flags.size());
  CHECK(rep.regime_flags.size() == 5);
  REQUIRE(rep.discretization.has_value());
  CHECK(rep.discretization->error_bound <= 0.1 + 1e-12);
}
