#include <benchmark/benchmark.h>

#include "qwalk/dynamics.hpp"

namespace {

void BM_CtqwSurvival(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = qwalk::generate_er({n, 0.5, 11}).graph;
  const auto h = qwalk::build_hamiltonian(g, qwalk::place_traps(g, 1, 0.1, 12));
  const auto times = qwalk::make_time_grid(0.1, 1e4, 400);
  for (auto _ : state) benchmark::DoNotOptimize(qwalk::ctqw_survival(h, times, {}));
}
BENCHMARK(BM_CtqwSurvival)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_CtrwSurvival(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = qwalk::generate_er({n, 0.5, 11}).graph;
  const auto t = qwalk::build_transfer(g, qwalk::place_traps(g, 1, 0.1, 12));
  const auto times = qwalk::make_time_grid(0.1, 1e4, 400);
  for (auto _ : state) benchmark::DoNotOptimize(qwalk::ctrw_survival(t, times, {}));
}
BENCHMARK(BM_CtrwSurvival)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

// Matrix-exponential reference for one time point, for scale.
void BM_OracleQuantum(benchmark::State& state) {
  const auto g = qwalk::generate_er({40, 0.5, 11}).graph;
  const auto h = qwalk::build_hamiltonian(g, qwalk::place_traps(g, 1, 0.1, 12));
  const std::vector<double> times{100.0};
  for (auto _ : state) benchmark::DoNotOptimize(qwalk::oracle_ctqw_survival(h, times));
}
BENCHMARK(BM_OracleQuantum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
