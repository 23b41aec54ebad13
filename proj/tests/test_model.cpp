#include <doctest.h>

#include <cmath>

#include "sddvir/errors.hpp"
#include "sddvir/model.hpp"

using namespace sddvir;

TEST_CASE("incidence values") {
  CHECK(eval_incidence(IncidenceFn::beddington_deangelis(1.0, 0.0, 1.0), 2.0, 3.0) == doctest::Approx(1.5));
  CHECK(eval_incidence(IncidenceFn::bilinear(0.1), 5.0, 19.0) == doctest::Approx(9.5).epsilon(1e-15));
  for (const auto& f : {IncidenceFn::bilinear(0.1), IncidenceFn::saturated(0.1, 0.01),
                        IncidenceFn::beddington_deangelis(1, 2, 3), IncidenceFn::crowley_martin(1, 1, 1)}) {
    CHECK(eval_incidence(f, 5.0, 0.0) == 0.0);
    CHECK(eval_incidence(f, 0.0, 5.0) == 0.0);
  }
  CHECK(eval_incidence(IncidenceFn::crowley_martin(2.0, 1.0, 0.5), 1.0, 2.0) == doctest::Approx(2.0 * 2.0 / (2.0 * 2.0)));
  CHECK_THROWS_AS(eval_incidence(IncidenceFn::bilinear(1.0), -1.0, 1.0), DomainError);
}

TEST_CASE("incidence derivative in T matches a central difference") {
  for (const auto& f : {IncidenceFn::bilinear(0.1), IncidenceFn::saturated(0.1, 0.01),
                        IncidenceFn::beddington_deangelis(0.5, 0.2, 0.3), IncidenceFn::crowley_martin(1, 0.4, 0.7)}) {
    for (double T : {0.5, 3.0, 40.0}) {
      const double h = 1e-5 * T;
      const double fd = (f.value(T + h, 7.0) - f.value(T - h, 7.0)) / (2 * h);
      CHECK(f.d_dT(T, 7.0) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.diff = {0.0, -1e-3, 0.0};
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.omega = 0.2;
  p.h_max = 2.0;
  CHECK(p.survival() == doctest::Approx(std::exp(-0.4)));
  CHECK_THROWS_AS(IncidenceFn::saturated(0.1, 0.0).validate(), DomainError);
  CHECK(parse_incidence_kind("crowley_martin") == IncidenceKind::crowley_martin);
  CHECK_FALSE(parse_incidence_kind("linear").has_value());
}

TEST_CASE("Hf1") {
  const auto r = check_hf1(IncidenceFn::saturated(0.1, 0.1), SampleBox{0, 100, 0, 200}, 50);
  CHECK(r.verdict.holds());
  REQUIRE(r.mu.has_value());
  CHECK(*r.mu == doctest::Approx(1.0));

  auto bil = IncidenceFn::bilinear(0.1);
  bil.mu = 1.0;
  const auto bad = check_hf1(bil, SampleBox{1, 2, 0, 20}, 2);
  CHECK(bad.verdict.verdict == Verdict::fails);
  REQUIRE(bad.verdict.witness.has_value());
  CHECK(bad.verdict.witness->first == 1.0);
  CHECK(bad.verdict.witness->second == 20.0);

  CHECK(check_hf1(IncidenceFn::bilinear(0.1), SampleBox{0, 1, 0, 1}, 5).verdict.verdict == Verdict::not_applicable);
  CHECK_THROWS_AS(check_hf1(IncidenceFn::saturated(0.1, 0.1), SampleBox{1, 1, 0, 1}, 5), DomainError);
}

TEST_CASE("Hf1+") {
  CHECK(check_hf1_plus(IncidenceFn::beddington_deangelis(0.3, 0.2, 0.5), SampleBox{0, 50, 0, 50}, 40).holds());
  CHECK(check_hf1_plus(IncidenceFn::crowley_martin(1, 1, 1), SampleBox{0, 10, 0, 10}, 40).holds());
  const auto zero = check_hf1_plus(IncidenceFn::bilinear(0.0), SampleBox{0, 10, 0, 10}, 11);
  CHECK(zero.verdict == Verdict::fails);
  REQUIRE(zero.witness.has_value());
  CHECK(zero.witness->first > 0.0);
  CHECK(zero.witness->second > 0.0);
  // decreasing in V somewhere
  const IncidenceCallable hump = [](double T, double V) { return T * V * std::exp(-V); };
  CHECK(check_hf1_plus(hump, SampleBox{0, 5, 0, 5}, 21).verdict == Verdict::fails);
}

TEST_CASE("Hf3") {
  // hand-evaluated point: saturated k = k2 = 1, v_hat = 2, (T, V) = (1, 4)
  const auto f = IncidenceFn::saturated(1.0, 1.0);
  const double ratio = f.value(1, 4) / f.value(1, 2);
  CHECK(ratio == doctest::Approx(1.2));
  CHECK((4.0 / 2.0 - ratio) * (ratio - 1.0) == doctest::Approx(0.16));
  CHECK(check_hf3(f, 2.0, SampleBox{1, 1.5, 4, 4.5}, 2).holds());
  CHECK(check_hf3(f, 2.0, SampleBox{0, 50, 0, 50}, 60).holds());

  const auto bil = check_hf3(IncidenceFn::bilinear(0.1), 19.0, SampleBox{0, 10, 0, 40}, 11);
  CHECK(bil.verdict == Verdict::fails);

  // V = v_hat rows are skipped: a box containing only that row has nothing to check
  const auto only_row = check_hf3(IncidenceFn::bilinear(0.1), 4.0, SampleBox{1, 2, 0, 4}, 2);
  CHECK(only_row.verdict != Verdict::fails);
}

TEST_CASE("Hf4") {
  const auto bda = check_hf4(IncidenceFn::beddington_deangelis(0.3, 0.2, 0.5), 3.0, SampleBox{0, 20, 0, 20}, 41);
  CHECK(bda.verdict.holds());
  CHECK(bda.differentiable);

  // f(T, 1) = T/2 so 1/f = 0 + 2/T
  const auto sat = check_hf4(IncidenceFn::saturated(1.0, 1.0), 1.0, SampleBox{0, 10, 0, 10}, 41);
  CHECK(sat.verdict.holds());
  REQUIRE(sat.c1.has_value());
  CHECK(*sat.c1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(*sat.c2 == doctest::Approx(2.0).epsilon(1e-9));

  const IncidenceCallable kinked = [](double T, double V) { return V * (T < 3.0 ? T : 3.0 + 0.5 * (T - 3.0)); };
  const auto k = check_hf4(kinked, 1.0, SampleBox{0, 10, 0, 10}, 21);
  CHECK_FALSE(k.differentiable);
  CHECK(k.c1.has_value());
  CHECK(k.verdict.holds());
  const double c1 = *k.c1, c2 = *k.c2;
  for (double T = 0.5; T <= 10.0; T += 0.5) CHECK(1.0 / kinked(T, 1.0) >= c1 + c2 / T - 1e-12);
}

TEST_CASE("hypothesis report and default box") {
  ModelParams p;
  const auto f = IncidenceFn::saturated(0.1, 0.01);
  const SampleBox box = default_sample_box(p, f);
  CHECK(box.t_max == doctest::Approx(200.0));
  CHECK(box.v_max == doctest::Approx(2 * 10 * 10 * 10.0 / (0.1 * 5)));
  const auto r = check_hypotheses(f, 18.8, box, 41);
  CHECK(r.theorem_hypotheses_hold());
  const auto b = check_hypotheses(IncidenceFn::bilinear(0.1), 19.0, box, 41);
  CHECK_FALSE(b.theorem_hypotheses_hold());
  const auto no_v = check_hypotheses(f, std::nullopt, box, 11);
  CHECK(no_v.hf3.verdict == Verdict::not_applicable);
}
