#include <benchmark/benchmark.h>

#include "hsm/dynamics.hpp"
#include "hsm/estimator.hpp"
#include "hsm/generators.hpp"
#include "hsm/hs_model.hpp"
#include "hsm/spectral.hpp"

using namespace hsm;

namespace {

HardCoreInstance random_instance(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  auto g = random_graph(n, p, rng);
  return HardCoreInstance(std::move(g), random_weights(n, 0.2, 2.0, rng));
}

void BM_BruteForceZ(benchmark::State& state) {
  const auto inst = random_instance(std::size_t(state.range(0)), 0.2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(partition_function_bruteforce(inst));
}
BENCHMARK(BM_BruteForceZ)->DenseRange(10, 22, 4)->Unit(benchmark::kMillisecond);

void BM_SubsetTable(benchmark::State& state) {
  const auto inst = random_instance(std::size_t(state.range(0)), 0.3, 2);
  for (auto _ : state) {
    SubsetPartitionTable t(inst);
    benchmark::DoNotOptimize(t.z(t.full()));
  }
}
BENCHMARK(BM_SubsetTable)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_CliqueStep(benchmark::State& state) {
  const auto inst = random_instance(std::size_t(state.range(0)), 8.0 / double(state.range(0)), 3);
  const CliqueDynamics dyn(inst, greedy_clique_cover(inst.graph()));
  ChainState chain(inst.size(), 4);
  for (auto _ : state) dyn.step(chain);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CliqueStep)->Arg(100)->Arg(10000);

void BM_BlockStep(benchmark::State& state) {
  const auto inst = random_instance(200, 0.04, 5);
  const BlockDynamics dyn(inst, BlockCover::from_cliques(greedy_clique_cover(inst.graph())));
  ChainState chain(inst.size(), 6);
  for (auto _ : state) dyn.step(chain);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BlockStep);

void BM_GridStep(benchmark::State& state) {
  const int d = int(state.range(0));
  const Discretization disc({d, d == 1 ? 4.0 : 2.0, d == 1 ? 1.0 : 0.3}, double(state.range(1)));
  const CellCover cells(disc);
  GridCliqueDynamics dyn(disc, cells);
  Rng rng(7);
  for (auto _ : state) dyn.step(rng);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GridStep)->Args({1, 1000})->Args({1, 222682})->Args({2, 50})->Args({2, 500});

void BM_TransitionMatrix(benchmark::State& state) {
  const auto inst = random_instance(std::size_t(state.range(0)), 0.3, 8);
  const auto kind = DynamicsKind::clique(greedy_clique_cover(inst.graph()));
  for (auto _ : state) benchmark::DoNotOptimize(transition_matrix_exact(inst, kind));
}
BENCHMARK(BM_TransitionMatrix)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_SawInfluence(benchmark::State& state) {
  Rng rng(9);
  const std::size_t n = std::size_t(state.range(0));
  const HardCoreInstance inst(random_connected_graph(n, 0.2, rng), random_weights(n, 0.2, 2.0, rng));
  for (auto _ : state) benchmark::DoNotOptimize(verify_saw_influence(inst, 0));
}
BENCHMARK(BM_SawInfluence)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
  const auto inst = random_instance(14, 0.25, 10);
  const auto cover = greedy_clique_cover(inst.graph());
  EstimatorConfig cfg;
  cfg.epsilon = 0.1;
  for (auto _ : state) {
    cfg.master_seed++;
    benchmark::DoNotOptimize(estimate_partition_function(inst, cover, cfg).estimate);
  }
}
BENCHMARK(BM_Estimate)->Unit(benchmark::kMillisecond);

void BM_HardSpherePipeline(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_hard_sphere({1, 4.0, 1.0}, 0.3, 0.2, seed++).estimate);
}
BENCHMARK(BM_HardSpherePipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
