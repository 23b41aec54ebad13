#pragma once

// Node loops of the method-of-lines system. Every kernel exists twice: `serial` is the
// plain reference used by the tests, `omp` is the OpenMP version used by the library.
// Elementwise kernels give bit-identical results in both; the OpenMP trapezoid sums
// fixed-size blocks in a fixed order, so its result does not depend on the thread count.

#include <array>
#include <cstddef>
#include <span>

#include "sddvir/model.hpp"

namespace sddvir::kernels {

/// Below this many nodes the OpenMP kernels run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 4096;
/// Block length of the deterministic parallel sum.
inline constexpr std::size_t kSumBlock = 1024;

struct ReactionCoeffs {
  double lambda = 0.0;
  double d = 0.0;
  double delta = 0.0;
  double burst_n = 0.0;
  double c = 0.0;
  double survival = 1.0;  // e^{-omega h}
  std::array<double, 3> diff{};

  static ReactionCoeffs from(const ModelParams& p) {
    return {p.lambda, p.d, p.delta, p.burst_n, p.c, p.survival(), p.diff};
  }
};

struct ConstState {
  std::span<const double> T, T_star, V;
};

struct MutState {
  std::span<double> T, T_star, V;
};

/// Mirrored second difference at node i.
inline double laplacian_at(std::span<const double> u, std::size_t i, double inv_dx2) noexcept {
  const std::size_t n = u.size();
  const double left = i == 0 ? u[1] : u[i - 1];
  const double right = i + 1 == n ? u[n - 2] : u[i + 1];
  return (left - 2.0 * u[i] + right) * inv_dx2;
}

namespace serial {
void laplacian_neumann(std::span<const double> u, double inv_dx2, std::span<double> out);
double trapezoid(std::span<const double> u, double dx);
void rhs(const ReactionCoeffs& p, const IncidenceFn& f, ConstState now, ConstState delayed, double inv_dx2,
         MutState out);
/// y = x + a * k
void axpy(std::span<const double> x, double a, std::span<const double> k, std::span<double> y);
}  // namespace serial

namespace omp {
void laplacian_neumann(std::span<const double> u, double inv_dx2, std::span<double> out);
double trapezoid(std::span<const double> u, double dx);
void rhs(const ReactionCoeffs& p, const IncidenceFn& f, ConstState now, ConstState delayed, double inv_dx2,
         MutState out);
void axpy(std::span<const double> x, double a, std::span<const double> k, std::span<double> y);
}  // namespace omp

}  // namespace sddvir::kernels
