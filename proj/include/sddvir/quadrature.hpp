#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace sddvir {

namespace detail {

template <class Fn>
double simpson_step(const Fn& fn, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of fn over [a, b] (b < a gives the negated integral).
/// Stops when the Richardson error estimate is below max(rel_tol |estimate|, abs_tol), or
/// below the rounding level of the sampled integrand values. When the integrand itself is
/// computed with cancellation, pass an abs_tol that reflects its absolute rounding error.
template <class Fn>
double adaptive_simpson(const Fn& fn, double a, double b, double rel_tol = 1e-8, double abs_tol = 1e-300,
                        int max_depth = 30) {
  if (a == b) return 0.0;
  const double fa = fn(a);
  const double fb = fn(b);
  const double fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(b - a) *
                      std::max({std::abs(fa), std::abs(fm), std::abs(fb)});
  const double tol = std::max({abs_tol, rel_tol * std::abs(whole), noise});
  return detail::simpson_step(fn, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace sddvir
