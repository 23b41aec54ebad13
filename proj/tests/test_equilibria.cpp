#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sddvir/equilibria.hpp"
#include "sddvir/errors.hpp"

using namespace sddvir;

namespace {

ModelParams reference_params() {
  ModelParams p;
  p.lambda = 10;
  p.d = 0.1;
  p.delta = 0.5;
  p.burst_n = 10;
  p.c = 5;
  p.omega = 0;
  p.h_max = 1;
  return p;
}

}  // namespace

TEST_CASE("h_f values") {
  const ModelParams p = reference_params();
  const auto f = IncidenceFn::bilinear(0.1);
  CHECK(h_f(p, f, 0.0) == 0.0);
  CHECK(std::abs(h_f(p, f, 19.0)) < 1e-12);
  CHECK(h_f(p, f, 20.0) == doctest::Approx(-10.0));
  CHECK(root_bracket_max(p) == doctest::Approx(20.0));
  CHECK_THROWS_AS(h_f(p, f, 20.5), DomainError);
  CHECK_THROWS_AS(h_f(p, f, -1.0), DomainError);
}

TEST_CASE("interior roots") {
  const ModelParams p = reference_params();
  const auto roots = find_interior_roots(p, IncidenceFn::bilinear(0.1), 1000, 1e-10);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(oracle::bilinear_root(10, 0.1, 0.5, 10, 5, 0.1, 0, 1)).epsilon(1e-10));
  CHECK(std::abs(roots[0] - 19.0) <= 1e-8);

  // R0 < 1: h_f < 0 on the whole bracket
  CHECK(find_interior_roots(p, IncidenceFn::bilinear(0.001), 1000, 1e-10).empty());

  // brute-force scan oracle for the saturated root
  const auto sat = find_interior_roots(p, IncidenceFn::saturated(0.1, 0.01), 1000, 1e-10);
  const auto scanned = oracle::scan_roots(
      [](double s) { return oracle::saturated_hf(10, 0.1, 0.5, 10, 5, 0.1, 0.01, s); }, 0.0, 20.0, 1'000'000);
  REQUIRE(sat.size() == 1);
  REQUIRE(scanned.size() == 1);
  CHECK(sat[0] == doctest::Approx(scanned[0]).epsilon(1e-9));
  CHECK(sat[0] == doctest::Approx(9.5 / 0.505).epsilon(1e-10));
}

TEST_CASE("with intracellular death the root shifts by e^{-omega h}") {
  ModelParams p = reference_params();
  p.omega = 0.1;
  p.h_max = 2.0;
  const auto roots = find_interior_roots(p, IncidenceFn::bilinear(0.1), 1000, 1e-12);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(oracle::bilinear_root(10, 0.1, 0.5, 10, 5, 0.1, 0.1, 2.0)).epsilon(1e-10));
  const Equilibrium e = assemble_equilibrium(p, IncidenceFn::bilinear(0.1), roots[0]);
  CHECK(stationary_residual(p, IncidenceFn::bilinear(0.1), e.T_hat, e.T_star_hat, e.V_hat) <= 1e-9);
}

TEST_CASE("assembled equilibria") {
  const ModelParams p = reference_params();
  const auto f = IncidenceFn::bilinear(0.1);
  const Equilibrium e = assemble_equilibrium(p, f, 19.0);
  CHECK(e.kind == EquilibriumKind::interior);
  CHECK(e.T_hat == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(e.T_star_hat == 19.0);
  CHECK(e.V_hat == doctest::Approx(19.0).epsilon(1e-14));
  CHECK(e.residual <= 1e-10);
  CHECK(f.value(e.T_hat, e.V_hat) == doctest::Approx(p.lambda - p.d * e.T_hat));
  CHECK(p.burst_n * p.delta * e.T_star_hat == doctest::Approx(p.c * e.V_hat));

  const Equilibrium t = trivial_equilibrium(p);
  CHECK(t.T_hat == 100.0);
  CHECK(t.T_star_hat == 0.0);
  CHECK(t.V_hat == 0.0);
  CHECK(t.residual == 0.0);
  CHECK(t.kind == EquilibriumKind::trivial);

  CHECK_THROWS_AS(assemble_equilibrium(p, f, 10.0), DomainError);
}

TEST_CASE("closed end of the bracket gives T = 0, flagged degenerate") {
  // h_f(s_max) = -λ for any incidence vanishing at T = 0, so this is only reachable with a
  // loose residual bound.
  const ModelParams p = reference_params();
  const Equilibrium e = assemble_equilibrium(p, IncidenceFn::bilinear(0.1), root_bracket_max(p), 1e3);
  CHECK(e.degenerate);
  CHECK(e.T_hat == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(assemble_equilibrium(p, IncidenceFn::bilinear(0.1), 19.0).degenerate);
}

TEST_CASE("find_equilibria ordering") {
  const ModelParams p = reference_params();
  const auto all = find_equilibria(p, IncidenceFn::bilinear(0.1));
  REQUIRE(all.size() == 2);
  CHECK(all[0].kind == EquilibriumKind::trivial);
  CHECK(all[1].kind == EquilibriumKind::interior);
  CHECK(all[1].norm() == doctest::Approx(std::sqrt(25.0 + 361.0 + 361.0)));

  const auto none = find_equilibria(p, IncidenceFn::bilinear(0.0));
  CHECK(none.size() == 1);
}
