#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sddvir {

/// Uniform node-centred grid on [x_min, x_max]; nodes x_min + i dx, i = 0..nx-1.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t nx);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t nx() const { return nx_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }
  double node(std::size_t i) const { return i + 1 == nx_ ? x_max_ : x_min_ + dx_ * static_cast<double>(i); }

  bool operator==(const Grid1D&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t nx_;
  double dx_;
};

/// One scalar per grid node.
class Field {
 public:
  explicit Field(const Grid1D& grid, double value = 0.0);
  Field(const Grid1D& grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(const Grid1D& grid, Fn&& fn) {
    Field out(grid);
    for (std::size_t i = 0; i < grid.nx(); ++i) out.values_[i] = fn(grid.node(i));
    return out;
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const;
  double mean() const;
  double max_abs() const;

  bool operator==(const Field&) const = default;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// Second difference with mirrored ghost nodes (zero normal derivative at both ends).
Field laplacian_neumann(const Field& u);

/// Composite trapezoidal rule over the grid.
double integrate(const Field& u);

/// Central differences inside, one-sided first differences at the two end nodes.
Field gradient(const Field& u);

struct GreenIdentity {
  double residual = 0.0;           ///< |∫ p(u) Δu + ∫ p'(u) |∇u|^2|
  double laplacian_side = 0.0;     ///< ∫ p(u) Δu
  double gradient_side = 0.0;      ///< -∫ p'(u) |∇u|^2
  double boundary_gradient = 0.0;  ///< larger one-sided end gradient
  bool neumann_compatible = true;
};

/// Discrete check of ∫ p(u)Δu = -∫ p'(u)|∇u|^2 for Neumann-compatible u. Logs a warning
/// when the end gradients are not O(dx).
GreenIdentity green_identity(const Field& u, const std::function<double(double)>& p,
                             const std::function<double(double)>& p_prime);

double green_identity_residual(const Field& u, const std::function<double(double)>& p,
                               const std::function<double(double)>& p_prime);

}  // namespace sddvir
