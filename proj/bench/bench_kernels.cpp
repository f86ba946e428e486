// Serial reference vs OpenMP kernel, pairwise on the same inputs.
#include <benchmark/benchmark.h>

#include "mlcache/bounds.hpp"
#include "mlcache/diagnostics.hpp"
#include "mlcache/kernels.hpp"
#include "mlcache/pama.hpp"
#include "mlcache/popularity.hpp"
#include "mlcache/sim.hpp"

using namespace mlcache;

namespace {

SystemConfig gap3() {
  SystemConfig c;
  c.num_caches = 10;
  c.levels = {{500, 9, 1}, {1500, 5, 3}, {8000, 1, 5}};
  c.memory = 400;
  return c;
}

std::vector<double> grid(std::int64_t points) {
  return kernels::memory_grid(kernels::parse_sweep_spec("1:2000:" + std::to_string(points) + ":log"));
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
  const auto c = gap3();
  const auto g = grid(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? kernels::sweep_parallel(c, g) : kernels::sweep(c, g));
}

template <bool Parallel>
void BM_Gap(benchmark::State& state) {
  const auto c = gap3();
  const auto g = grid(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? bounds::gap_profile_parallel(c, g) : bounds::gap_profile(c, g));
}

template <bool Parallel>
void BM_GridSearch(benchmark::State& state) {
  const auto c = gap3();
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? pama::grid_search_alpha_parallel(c, step) : pama::grid_search_alpha(c, step));
}

template <bool Parallel>
void BM_BruteForce(benchmark::State& state) {
  const auto z = popularity::zipf_distribution(0.8, 10000);
  popularity::BruteForceOptions o;
  o.num_levels = static_cast<std::size_t>(state.range(0));
  o.memory = 500;
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? popularity::brute_force_partition_parallel(z, o)
                                      : popularity::brute_force_partition(z, o));
}

template <bool Parallel>
void BM_Stochastic(benchmark::State& state) {
  const auto z = popularity::zipf_distribution(0.8, 10000);
  ScopedWarningCapture quiet;
  const auto levels = popularity::discretize(z, popularity::LevelPartition(10000, {500}), 10, 100, {}, 500.0);
  const auto trials = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? sim::simulate_stochastic_parallel(levels, z, 100, trials, 1)
                                      : sim::simulate_stochastic(levels, z, 100, trials, 1));
}

}  // namespace

BENCHMARK(BM_Sweep<false>)->Arg(1000);
BENCHMARK(BM_Sweep<true>)->Arg(1000);
BENCHMARK(BM_Gap<false>)->Arg(50);
BENCHMARK(BM_Gap<true>)->Arg(50);
BENCHMARK(BM_GridSearch<false>)->Arg(50);
BENCHMARK(BM_GridSearch<true>)->Arg(50);
BENCHMARK(BM_BruteForce<false>)->Arg(2)->Arg(3);
BENCHMARK(BM_BruteForce<true>)->Arg(2)->Arg(3);
BENCHMARK(BM_Stochastic<false>)->Arg(100);
BENCHMARK(BM_Stochastic<true>)->Arg(100);

BENCHMARK_MAIN();
