#include "sddvir/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "sddvir/errors.hpp"

namespace sddvir {

std::string_view to_string(EquilibriumKind k) { return k == EquilibriumKind::trivial ? "trivial" : "interior"; }

double Equilibrium::norm() const {
  return std::sqrt(T_hat * T_hat + T_star_hat * T_star_hat + V_hat * V_hat);
}

double root_bracket_max(const ModelParams& p) { return p.lambda * std::exp(p.omega * p.h_max) / p.delta; }

double h_f(const ModelParams& p, const IncidenceFn& f, double s) {
  const double s_max = root_bracket_max(p);
  if (!(s >= 0.0) || s > s_max * (1.0 + 1e-12)) {
    throw DomainError(fmt::format("h_f argument {} outside [0, {}]", s, s_max));
  }
  const double growth = std::exp(p.omega * p.h_max);
  // Rounding can push the first argument a hair below zero at s = s_max.
  const double T = std::max(0.0, p.lambda / p.d - (p.delta / p.d) * growth * s);
  const double V = p.burst_n * p.delta / p.c * s;
  return f.value(T, V) - p.delta * growth * s;
}

double stationary_residual(const ModelParams& p, const IncidenceFn& f, double T, double T_star, double V) {
  const double fv = f.value(T, V);
  const double r1 = p.lambda - p.d * T - fv;
  const double r2 = p.survival() * fv - p.delta * T_star;
  const double r3 = p.burst_n * p.delta * T_star - p.c * V;
  return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
}

namespace {

std::optional<double> bisect_cell(const ModelParams& p, const IncidenceFn& f, double a, double b, double fa,
                                  double fb, double tol) {
  if (fb == 0.0) return b;
  if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = h_f(p, f, m);
    if (std::abs(fm) <= tol || m == a || m == b) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> find_interior_roots(const ModelParams& p, const IncidenceFn& f, int subdivisions, double tol) {
  if (subdivisions < 10) throw DomainError(fmt::format("root scan needs >= 10 cells (got {})", subdivisions));
  if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");
  const double s_max = root_bracket_max(p);
  const double s_lo = 1e-9 * s_max;
  const auto n = static_cast<std::size_t>(subdivisions);

  std::vector<double> nodes(n + 1), values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    nodes[i] = i == n ? s_max : s_lo + (s_max - s_lo) * static_cast<double>(i) / static_cast<double>(n);
  }
  const auto cells = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i <= cells; ++i) values[i] = h_f(p, f, nodes[i]);

  std::vector<std::optional<double>> found(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < cells; ++i) {
    const auto k = static_cast<std::size_t>(i);
    found[k] = bisect_cell(p, f, nodes[k], nodes[k + 1], values[k], values[k + 1], tol);
  }

  std::vector<double> roots;
  for (const auto& r : found) {
    if (!r) continue;
    if (!roots.empty() && std::abs(*r - roots.back()) <= 10.0 * tol) continue;
    roots.push_back(*r);
  }
  return roots;
}

Equilibrium assemble_equilibrium(const ModelParams& p, const IncidenceFn& f, double s_root, double max_residual) {
  const double s_max = root_bracket_max(p);
  if (!(s_root > 0.0) || s_root > s_max * (1.0 + 1e-12)) {
    throw DomainError(fmt::format("root {} outside (0, {}]", s_root, s_max));
  }
  Equilibrium e;
  e.kind = EquilibriumKind::interior;
  e.T_star_hat = s_root;
  e.T_hat = std::max(0.0, (p.lambda - p.delta * s_root * std::exp(p.omega * p.h_max)) / p.d);
  e.V_hat = p.burst_n * p.delta / p.c * s_root;
  e.degenerate = e.T_hat <= 1e-12 * p.lambda / p.d;
  e.residual = stationary_residual(p, f, e.T_hat, e.T_star_hat, e.V_hat);
  if (!(e.residual <= max_residual)) {
    throw DomainError(fmt::format("candidate ({}, {}, {}) has stationary residual {} > {}", e.T_hat, e.T_star_hat,
                                  e.V_hat, e.residual, max_residual));
  }
  return e;
}

Equilibrium trivial_equilibrium(const ModelParams& p) {
  Equilibrium e;
  e.kind = EquilibriumKind::trivial;
  e.T_hat = p.lambda / p.d;
  e.residual = stationary_residual(p, IncidenceFn::bilinear(0.0), e.T_hat, 0.0, 0.0);
  return e;
}

std::vector<Equilibrium> find_equilibria(const ModelParams& p, const IncidenceFn& f, int subdivisions, double tol) {
  std::vector<Equilibrium> out{trivial_equilibrium(p)};
  // f(T, 0) = 0, so the trivial residual does not depend on f.
  for (double s : find_interior_roots(p, f, subdivisions, tol)) {
    // |h_f| <= tol bounds the first two residuals by tol; keep slack for rounding.
    out.push_back(assemble_equilibrium(p, f, s, std::max(1e-8, 100.0 * tol)));
  }
  return out;
}

}  // namespace sddvir
