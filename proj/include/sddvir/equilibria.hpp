#pragma once

#include <string_view>
#include <vector>

#include "sddvir/history.hpp"
#include "sddvir/model.hpp"

namespace sddvir {

enum class EquilibriumKind { trivial, interior };
std::string_view to_string(EquilibriumKind k);

/// Spatially constant stationary triple.
struct Equilibrium {
  double T_hat = 0.0;
  double T_star_hat = 0.0;
  double V_hat = 0.0;
  EquilibriumKind kind = EquilibriumKind::trivial;
  double residual = 0.0;    ///< max |residual| of the three stationary equations
  bool degenerate = false;  ///< T_hat = 0 at the closed end of the bracket

  double norm() const;
  FieldState lift(const Grid1D& grid) const { return FieldState::constant(grid, T_hat, T_star_hat, V_hat); }
};

/// Upper end of the root bracket, λ e^{ωh} / δ.
double root_bracket_max(const ModelParams& p);

/// h_f(s) = f(λ/d - (δ/d) e^{ωh} s, (Nδ/c) s) - δ e^{ωh} s on [0, λ e^{ωh}/δ].
double h_f(const ModelParams& p, const IncidenceFn& f, double s);

/// Max absolute residual of 0 = λ - dT - f, 0 = e^{-ωh} f - δT*, 0 = NδT* - cV.
double stationary_residual(const ModelParams& p, const IncidenceFn& f, double T, double T_star, double V);

/// Roots of h_f on (ε_s, λe^{ωh}/δ] from a sign scan plus bisection. Tangential roots are
/// not detected.
std::vector<double> find_interior_roots(const ModelParams& p, const IncidenceFn& f, int subdivisions, double tol);

/// Interior equilibrium for a root s of h_f; throws DomainError when the residual exceeds
/// `max_residual`.
Equilibrium assemble_equilibrium(const ModelParams& p, const IncidenceFn& f, double s_root,
                                 double max_residual = 1e-8);

Equilibrium trivial_equilibrium(const ModelParams& p);

/// Trivial equilibrium followed by every interior one, in increasing T*.
std::vector<Equilibrium> find_equilibria(const ModelParams& p, const IncidenceFn& f, int subdivisions = 1000,
                                         double tol = 1e-10);

}  // namespace sddvir
