#include <benchmark/benchmark.h>

#include "qwalk/dynamics.hpp"
#include "qwalk/spectra.hpp"

namespace {

qwalk::EffectiveHamiltonian hamiltonian(std::size_t n) {
  const auto g = qwalk::generate_er({n, 0.5, 7}).graph;
  return qwalk::build_hamiltonian(g, qwalk::place_traps(g, 1, 0.1, 8));
}

void BM_EigComplex(benchmark::State& state) {
  const auto h = hamiltonian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qwalk::eig_complex(h.matrix));
}
BENCHMARK(BM_EigComplex)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EigSymmetric(benchmark::State& state) {
  const auto g = qwalk::generate_er({static_cast<std::size_t>(state.range(0)), 0.1, 3}).graph;
  const Eigen::MatrixXd l = qwalk::laplacian(g);
  for (auto _ : state) benchmark::DoNotOptimize(qwalk::eig_symmetric(l));
}
BENCHMARK(BM_EigSymmetric)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GenerateEr(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qwalk::generate_er({static_cast<std::size_t>(state.range(0)), 0.5, ++seed}));
  }
}
BENCHMARK(BM_GenerateEr)->Arg(40)->Arg(400);

}  // namespace
