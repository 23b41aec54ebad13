#include "sddvir/kernels.hpp"

#include <cstddef>
#include <vector>

namespace sddvir::kernels {

namespace {

inline void rhs_node(const ReactionCoeffs& p, const IncidenceFn& f, ConstState now, ConstState delayed,
                     double inv_dx2, MutState out, std::size_t i) noexcept {
  const double T = now.T[i];
  const double Ts = now.T_star[i];
  const double V = now.V[i];
  double dT = p.lambda - p.d * T - f.value(T, V);
  double dTs = p.survival * f.value(delayed.T[i], delayed.V[i]) - p.delta * Ts;
  double dV = p.burst_n * p.delta * Ts - p.c * V;
  if (p.diff[0] != 0.0) dT += p.diff[0] * laplacian_at(now.T, i, inv_dx2);
  if (p.diff[1] != 0.0) dTs += p.diff[1] * laplacian_at(now.T_star, i, inv_dx2);
  if (p.diff[2] != 0.0) dV += p.diff[2] * laplacian_at(now.V, i, inv_dx2);
  out.T[i] = dT;
  out.T_star[i] = dTs;
  out.V[i] = dV;
}

}  // namespace

namespace serial {

void laplacian_neumann(std::span<const double> u, double inv_dx2, std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = laplacian_at(u, i, inv_dx2);
}

double trapezoid(std::span<const double> u, double dx) {
  const std::size_t n = u.size();
  if (n < 2) return 0.0;
  double sum = 0.5 * u[0];
  for (std::size_t i = 1; i + 1 < n; ++i) sum += u[i];
  sum += 0.5 * u[n - 1];
  return sum * dx;
}

void rhs(const ReactionCoeffs& p, const IncidenceFn& f, ConstState now, ConstState delayed, double inv_dx2,
         MutState out) {
  for (std::size_t i = 0; i < now.T.size(); ++i) rhs_node(p, f, now, delayed, inv_dx2, out, i);
}

void axpy(std::span<const double> x, double a, std::span<const double> k, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * k[i];
}

}  // namespace serial

namespace omp {

void laplacian_neumann(std::span<const double> u, double inv_dx2, std::span<double> out) {
  // an inactive parallel region still costs about a microsecond, so small grids skip it
  if (u.size() < kParallelThreshold) return serial::laplacian_neumann(u, inv_dx2, out);
  const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = laplacian_at(u, static_cast<std::size_t>(i), inv_dx2);
}

double trapezoid(std::span<const double> u, double dx) {
  const std::size_t n = u.size();
  if (n < 2) return 0.0;
  const auto block_sum = [&](std::size_t b) {
    const std::size_t lo = b * kSumBlock;
    const std::size_t hi = std::min(n, lo + kSumBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += (i == 0 || i + 1 == n) ? 0.5 * u[i] : u[i];
    return s;
  };
  const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
  double sum = 0.0;
  if (n < kParallelThreshold) {
    for (std::size_t b = 0; b < blocks; ++b) sum += block_sum(b);
    return sum * dx;
  }
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) partial[static_cast<std::size_t>(b)] = block_sum(static_cast<std::size_t>(b));
  for (double s : partial) sum += s;
  return sum * dx;
}

void rhs(const ReactionCoeffs& p, const IncidenceFn& f, ConstState now, ConstState delayed, double inv_dx2,
         MutState out) {
  if (now.T.size() < kParallelThreshold) return serial::rhs(p, f, now, delayed, inv_dx2, out);
  const auto n = static_cast<std::ptrdiff_t>(now.T.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) rhs_node(p, f, now, delayed, inv_dx2, out, static_cast<std::size_t>(i));
}

void axpy(std::span<const double> x, double a, std::span<const double> k, std::span<double> y) {
  if (x.size() < kParallelThreshold) return serial::axpy(x, a, k, y);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] + a * k[i];
}

}  // namespace omp

}  // namespace sddvir::kernels
