#include "sddvir/grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sddvir/errors.hpp"
#include "sddvir/kernels.hpp"

namespace sddvir {

Grid1D::Grid1D(double x_min, double x_max, std::size_t nx) : x_min_(x_min), x_max_(x_max), nx_(nx), dx_(0.0) {
  if (nx < 3) throw DomainError(fmt::format("grid needs at least 3 nodes (got {})", nx));
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw DomainError(fmt::format("grid interval [{}, {}] is empty", x_min, x_max));
  }
  dx_ = (x_max - x_min) / static_cast<double>(nx - 1);
}

Field::Field(const Grid1D& grid, double value) : grid_(grid), values_(grid.nx(), value) {}

Field::Field(const Grid1D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.nx()) {
    throw DomainError(fmt::format("field has {} values for a {}-node grid", values_.size(), grid_.nx()));
  }
  if (!all_finite()) throw DomainError("field values must be finite");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::mean() const { return integrate(*this) / grid_.length(); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field laplacian_neumann(const Field& u) {
  Field out(u.grid());
  const double dx = u.grid().dx();
  kernels::omp::laplacian_neumann(u.values(), 1.0 / (dx * dx), out.values());
  return out;
}

double integrate(const Field& u) { return kernels::omp::trapezoid(u.values(), u.grid().dx()); }

Field gradient(const Field& u) {
  Field g(u.grid());
  const std::size_t n = u.size();
  const double dx = u.grid().dx();
  g[0] = (u[1] - u[0]) / dx;
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  g[n - 1] = (u[n - 1] - u[n - 2]) / dx;
  return g;
}

GreenIdentity green_identity(const Field& u, const std::function<double(double)>& p,
                             const std::function<double(double)>& p_prime) {
  const Field lap = laplacian_neumann(u);
  const Field grad = gradient(u);
  const std::size_t n = u.size();
  Field left(u.grid()), right(u.grid());
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = p(u[i]) * lap[i];
    right[i] = p_prime(u[i]) * grad[i] * grad[i];
  }
  GreenIdentity out;
  out.laplacian_side = integrate(left);
  out.gradient_side = -integrate(right);
  out.residual = std::abs(out.laplacian_side - out.gradient_side);
  out.boundary_gradient = std::max(std::abs(grad[0]), std::abs(grad[n - 1]));
  // A smooth field with zero normal derivative has one-sided end gradients of about |u''| dx / 2.
  // Interior nodes only: the end values of the Laplacian blow up exactly when u is incompatible.
  double curvature = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) curvature = std::max(curvature, std::abs(lap[i]));
  const double allowed = u.grid().dx() * (curvature + 1e-12);
  out.neumann_compatible = out.boundary_gradient <= allowed;
  if (!out.neumann_compatible) {
    spdlog::warn("green identity: end gradient {:.3e} exceeds {:.3e}; field is not Neumann-compatible",
                 out.boundary_gradient, allowed);
  }
  return out;
}

double green_identity_residual(const Field& u, const std::function<double(double)>& p,
                               const std::function<double(double)>& p_prime) {
  return green_identity(u, p, p_prime).residual;
}

}  // namespace sddvir
