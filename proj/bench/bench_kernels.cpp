// Serial reference kernels against their OpenMP versions, over grid sizes.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sddvir/kernels.hpp"

namespace k = sddvir::kernels;

namespace {

std::vector<double> wave(std::size_t n, double base) {
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = base + std::cos(0.001 * static_cast<double>(i));
  return u;
}

template <auto Kernel>
void laplacian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = wave(n, 1.0);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(u, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void trapezoid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = wave(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(u, 1e-3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void rhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto T = wave(n, 50.0), Ts = wave(n, 10.0), V = wave(n, 10.0);
  std::vector<double> oT(n), oTs(n), oV(n);
  sddvir::ModelParams p;
  p.diff = {1e-3, 1e-3, 1e-3};
  const auto coeffs = k::ReactionCoeffs::from(p);
  const auto f = sddvir::IncidenceFn::saturated(0.1, 0.01);
  const k::ConstState now{T, Ts, V};
  for (auto _ : state) {
    Kernel(coeffs, f, now, now, 1.0, k::MutState{oT, oTs, oV});
    benchmark::DoNotOptimize(oV.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(laplacian<k::serial::laplacian_neumann>)->Name("laplacian/serial")->RangeMultiplier(8)->Range(64, 1 << 21);
BENCHMARK(laplacian<k::omp::laplacian_neumann>)->Name("laplacian/omp")->RangeMultiplier(8)->Range(64, 1 << 21);
BENCHMARK(trapezoid<k::serial::trapezoid>)->Name("trapezoid/serial")->RangeMultiplier(8)->Range(64, 1 << 21);
BENCHMARK(trapezoid<k::omp::trapezoid>)->Name("trapezoid/omp")->RangeMultiplier(8)->Range(64, 1 << 21);
BENCHMARK(rhs<k::serial::rhs>)->Name("rhs/serial")->RangeMultiplier(8)->Range(64, 1 << 21);
BENCHMARK(rhs<k::omp::rhs>)->Name("rhs/omp")->RangeMultiplier(8)->Range(64, 1 << 21);

BENCHMARK_MAIN();
