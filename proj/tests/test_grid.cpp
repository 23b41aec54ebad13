#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <omp.h>

#include "sddvir/errors.hpp"
#include "sddvir/grid.hpp"
#include "sddvir/kernels.hpp"
#include "sddvir/model.hpp"

using namespace sddvir;
using std::numbers::pi;

TEST_CASE("grid construction") {
  const Grid1D g(0.0, 1.0, 11);
  CHECK(g.dx() == doctest::Approx(0.1));
  CHECK(g.node(10) == 1.0);
  CHECK_THROWS(Grid1D(0.0, 1.0, 2));
  CHECK_THROWS(Grid1D(1.0, 1.0, 5));
  CHECK_THROWS(Field(g, std::vector<double>(10, 0.0)));
  CHECK_THROWS(Field(g, std::vector<double>(11, NAN)));
}

TEST_CASE("Neumann Laplacian") {
  const Grid1D g(0.0, 1.0, 201);
  const Field c(g, 3.5);
  CHECK(laplacian_neumann(c).max_abs() == 0.0);

  const Field u = Field::from_function(g, [](double x) { return std::cos(pi * x); });
  const Field lap = laplacian_neumann(u);
  double err = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) err = std::max(err, std::abs(lap[i] + pi * pi * std::cos(pi * g.node(i))));
  CHECK(err <= 2.0 * g.dx() * g.dx() * std::pow(pi, 4) / 12.0);

  const Field x = Field::from_function(g, [](double s) { return s; });
  const Field lx = laplacian_neumann(x);
  for (std::size_t i = 1; i + 1 < g.nx(); ++i) CHECK(std::abs(lx[i]) < 1e-8);
  CHECK(std::abs(lx[0]) > 1.0);
  CHECK(std::abs(lx[g.nx() - 1]) > 1.0);
}

TEST_CASE("trapezoid integration") {
  const Grid1D g(0.0, 1.0, 7);
  CHECK(integrate(Field(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t n : {3u, 4u, 17u, 200u}) {
    const Grid1D gn(0.0, 1.0, n);
    CHECK(integrate(Field::from_function(gn, [](double s) { return s; })) == doctest::Approx(0.5).epsilon(1e-14));
  }
  const Grid1D fine(0.0, 1.0, 201);
  CHECK(std::abs(integrate(Field::from_function(fine, [](double s) { return std::cos(pi * s); }))) < 1e-4);
  CHECK(Field(g, 2.0).mean() == doctest::Approx(2.0));
}

TEST_CASE("Green identity") {
  const Grid1D g(0.0, 1.0, 201);
  const Field u = Field::from_function(g, [](double x) { return std::cos(pi * x); });
  const auto id = [](double s) { return s; };
  const auto one = [](double) { return 1.0; };
  const GreenIdentity gi = green_identity(u, id, one);
  CHECK(gi.residual <= 1e-3);
  CHECK(gi.laplacian_side == doctest::Approx(-pi * pi / 2).epsilon(1e-3));
  CHECK(gi.neumann_compatible);

  CHECK(green_identity_residual(Field(g, 4.0), id, one) == 0.0);

  // p(s) = 1 - a / f(s, v_hat), shifted so that u stays positive
  const auto f = IncidenceFn::saturated(0.1, 0.01);
  const double v_hat = 18.8, a = f.value(5.0, v_hat);
  const Grid1D g401(0.0, 1.0, 401);
  const Field w = Field::from_function(g401, [](double x) { return 5.0 + std::cos(pi * x); });
  const auto p = [&](double s) { return 1.0 - a / f.value(s, v_hat); };
  const auto dp = [&](double s) { return a * f.d_dT(s, v_hat) / (f.value(s, v_hat) * f.value(s, v_hat)); };
  CHECK(green_identity_residual(w, p, dp) <= 1e-3);

  const Field x = Field::from_function(g, [](double s) { return s; });
  CHECK_FALSE(green_identity(x, id, one).neumann_compatible);
}

TEST_CASE("gradient") {
  const Grid1D g(0.0, 2.0, 21);
  const Field u = Field::from_function(g, [](double x) { return 3.0 * x - 1.0; });
  const Field du = gradient(u);
  for (std::size_t i = 0; i < g.nx(); ++i) CHECK(du[i] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("parallel kernels agree with the serial reference") {
  const std::size_t n = 3 * kernels::kParallelThreshold + 17;
  const Grid1D g(0.0, 1.0, n);
  const auto wave = [](double a, double b) {
    return [=](double x) { return a + std::sin(b * x) * std::sin(b * x); };
  };
  const Field T = Field::from_function(g, wave(40.0, 7.0));
  const Field Ts = Field::from_function(g, wave(10.0, 3.0));
  const Field V = Field::from_function(g, wave(15.0, 11.0));
  const kernels::ConstState now{T.values(), Ts.values(), V.values()};
  const kernels::ConstState del{Ts.values(), V.values(), T.values()};
  ModelParams p;
  p.diff = {0.01, 0.02, 0.03};
  const auto coeffs = kernels::ReactionCoeffs::from(p);
  const auto f = IncidenceFn::beddington_deangelis(0.1, 0.02, 0.01);
  const double inv_dx2 = 1.0 / (g.dx() * g.dx());

  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    std::vector<double> a(n), b(n);
    kernels::serial::laplacian_neumann(T.values(), inv_dx2, a);
    kernels::omp::laplacian_neumann(T.values(), inv_dx2, b);
    CHECK(a == b);

    CHECK(kernels::serial::trapezoid(V.values(), g.dx()) ==
          doctest::Approx(kernels::omp::trapezoid(V.values(), g.dx())).epsilon(1e-14));

    std::array<std::vector<double>, 3> rs{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    std::array<std::vector<double>, 3> ro = rs;
    kernels::serial::rhs(coeffs, f, now, del, inv_dx2, {rs[0], rs[1], rs[2]});
    kernels::omp::rhs(coeffs, f, now, del, inv_dx2, {ro[0], ro[1], ro[2]});
    CHECK(rs == ro);

    kernels::serial::axpy(T.values(), 0.3, V.values(), a);
    kernels::omp::axpy(T.values(), 0.3, V.values(), b);
    CHECK(a == b);
  }
  // block summation makes the parallel sum independent of the thread count
  omp_set_num_threads(1);
  const double one = kernels::omp::trapezoid(V.values(), g.dx());
  omp_set_num_threads(3);
  CHECK(kernels::omp::trapezoid(V.values(), g.dx()) == one);
}
