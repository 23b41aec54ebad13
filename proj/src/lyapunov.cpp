#include "sddvir/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sddvir/errors.hpp"
#include "sddvir/quadrature.hpp"

namespace sddvir {

double volterra_v(double s) {
  if (!(s > 0.0)) throw DomainError(fmt::format("volterra_v needs s > 0 (got {})", s));
  const double x = s - 1.0;
  if (std::abs(x) < 0.01) {
    // x^2/2 - x^3/3 + x^4/4 - ..., truncated well below double precision
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k <= 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
      term *= x;
    }
    return sum;
  }
  // s - 1 loses s entirely once s is below about 1e-16
  if (s < 0.5) return x - std::log(s);
  return x - std::log1p(x);
}

namespace {

std::optional<double> v_checked(double s) {
  if (!(s > kLogFloor)) return std::nullopt;
  return volterra_v(s);
}

// ∫_{t-η}^{t} v(f(T(θ),V(θ))/f̂) dθ at one node; empty when an argument hits the floor.
std::optional<double> delayed_v_integral(const HistorySegment& seg, const IncidenceFn& f, double f_hat, double eta,
                                         std::size_t node) {
  if (!(eta > 0.0)) return 0.0;
  const double t = seg.newest_time();
  const double lower = t - eta;
  if (lower < seg.oldest_time() - seg.time_tolerance()) {
    throw HistoryError(fmt::format("history starts at {} but the delay reaches back to {}", seg.oldest_time(), lower));
  }
  const auto g = [&](std::size_t j) -> std::optional<double> {
    const FieldState& s = seg.state(j);
    return v_checked(f.value(s.T[node], s.V[node]) / f_hat);
  };
  double total = 0.0;
  std::size_t j = seg.size() - 1;
  auto right = g(j);
  if (!right) return std::nullopt;
  while (j > 0 && seg.time(j - 1) >= lower - seg.time_tolerance()) {
    auto left = g(j - 1);
    if (!left) return std::nullopt;
    total += 0.5 * (seg.time(j) - seg.time(j - 1)) * (*left + *right);
    right = left;
    --j;
  }
  const double t_j = seg.time(j);
  if (j > 0 && t_j - lower > seg.time_tolerance()) {
    const double t_prev = seg.time(j - 1);
    const double w = (lower - t_prev) / (t_j - t_prev);
    const FieldState& a = seg.state(j - 1);
    const FieldState& b = seg.state(j);
    const double T = (1.0 - w) * a.T[node] + w * b.T[node];
    const double V = (1.0 - w) * a.V[node] + w * b.V[node];
    const auto left = v_checked(f.value(T, V) / f_hat);
    if (!left) return std::nullopt;
    total += 0.5 * (t_j - lower) * (*left + *right);
  }
  return total;
}

}  // namespace

LyapunovFunctional::LyapunovFunctional(const Equilibrium& eq, const ModelParams& p, const IncidenceFn& f,
                                       const DelayFunctional& df)
    : eq_(eq), p_(p), f_(f), df_(df) {
  if (!(eq.T_hat > 0.0 && eq.T_star_hat > 0.0 && eq.V_hat > 0.0)) {
    throw DomainError("the Lyapunov functional needs an interior equilibrium");
  }
  f_hat_ = f.value(eq.T_hat, eq.V_hat);
  if (!(f_hat_ > 0.0)) throw DomainError("f(T̂, V̂) must be positive");
  survival_ = p.survival();
}

double LyapunovFunctional::monotone_integral(double T) const {
  if (T == eq_.T_hat) return 0.0;
  const double v_hat = eq_.V_hat;
  const auto integrand = [&](double theta) { return (f_.value(theta, v_hat) - f_hat_) / f_.value(theta, v_hat); };
  // the integrand carries O(1e-16) absolute rounding from the subtraction
  return survival_ * adaptive_simpson(integrand, eq_.T_hat, T, 1e-8, 1e-14 * std::abs(T - eq_.T_hat));
}

std::optional<double> u_sdd_pointwise(const HistorySegment& seg, const Equilibrium& eq, const ModelParams& p,
                                      const IncidenceFn& f, const DelayFunctional& df, std::size_t node) {
  const LyapunovFunctional lf(eq, p, f, df);
  const FieldState& s = seg.newest();
  const double T = s.T[node];
  if (!(T > kLogFloor) || !(f.value(T, eq.V_hat) > kLogFloor)) return std::nullopt;
  const auto v2 = v_checked(s.T_star[node] / eq.T_star_hat);
  const auto v3 = v_checked(s.V[node] / eq.V_hat);
  if (!v2 || !v3) return std::nullopt;
  const auto delayed =
      delayed_v_integral(seg, f, f.value(eq.T_hat, eq.V_hat), evaluate_eta(df, seg), node);
  if (!delayed) return std::nullopt;
  return lf.monotone_integral(T) + eq.T_star_hat * *v2 + eq.V_hat / p.burst_n * *v3 +
         p.delta * eq.T_star_hat * *delayed;
}

LyapunovInstant LyapunovFunctional::instant(const HistorySegment& seg, double eta) const {
  const FieldState& s = seg.newest();
  const Grid1D& grid = s.grid();
  const std::size_t n = grid.nx();
  const double T_hat = eq_.T_hat;
  const double Ts_hat = eq_.T_star_hat;
  const double V_hat = eq_.V_hat;
  const double N = p_.burst_n;

  LyapunovInstant out;
  out.t = seg.newest_time();
  out.eta = eta;

  const FieldState delayed = delayed_state(seg, std::min(eta, seg.h_max()));
  const Field lap_T = laplacian_neumann(s.T);
  const Field lap_Ts = laplacian_neumann(s.T_star);
  const Field lap_V = laplacian_neumann(s.V);
  const Field grad_T = gradient(s.T);
  const Field grad_Ts = gradient(s.T_star);
  const Field grad_V = gradient(s.V);

  Field u(grid), mono(grid), dissip(grid), vb_field(grid), c1p(grid), c1s(grid), c1abs(grid);
  std::array<Field, 3> direct{Field(grid), Field(grid), Field(grid)};
  std::array<Field, 3> gradf{Field(grid), Field(grid), Field(grid)};

  for (std::size_t i = 0; i < n; ++i) {
    const double T = s.T[i];
    const double Ts = s.T_star[i];
    const double V = s.V[i];
    const double f_now = f_.value(T, V);
    const double f_tv = f_.value(T, V_hat);
    const double f_del = f_.value(delayed.T[i], delayed.V[i]);
    if (!(T > kLogFloor && Ts > kLogFloor && V > kLogFloor && f_now > kLogFloor && f_tv > kLogFloor &&
          f_del > kLogFloor)) {
      out.valid = false;
      continue;
    }
    const double a = f_now / f_tv;
    const double b = f_del / f_hat_;
    const double c = f_hat_ / f_tv;
    const double dd = f_now / f_hat_;
    const double e = f_del * Ts_hat / (f_hat_ * Ts);
    const double g = Ts * V_hat / (Ts_hat * V);
    const double h = V / V_hat;
    const double va = volterra_v(a), vb = volterra_v(b), vc = volterra_v(c), vd = volterra_v(dd);
    const double ve = volterra_v(e), vg = volterra_v(g), vh = volterra_v(h);

    const auto delayed_int = delayed_v_integral(seg, f_, f_hat_, eta, i);
    if (!delayed_int) {
      out.valid = false;
      continue;
    }
    vb_field[i] = vb;
    u[i] = monotone_integral(T) + Ts_hat * volterra_v(Ts / Ts_hat) + V_hat / N * vh +
           p_.delta * Ts_hat * *delayed_int;

    mono[i] = p_.d * T_hat * survival_ * (1.0 - T / T_hat) * (1.0 - c);
    dissip[i] = f_hat_ * survival_ * (-vc - ve - vg - (vh - va));

    c1p[i] = 3.0 + a + b - c - dd - e - g - h;
    c1s[i] = va + vb - vc - vd - ve - vg - vh;
    c1abs[i] = 3.0 + a + b + c + dd + e + g + h;

    direct[0][i] = survival_ * (1.0 - c) * p_.diff[0] * lap_T[i];
    direct[1][i] = (1.0 - Ts_hat / Ts) * p_.diff[1] * lap_Ts[i];
    direct[2][i] = (1.0 - V_hat / V) / N * p_.diff[2] * lap_V[i];

    const double dfdT = f_.d_dT(T, V_hat);
    gradf[0][i] = -p_.diff[0] * survival_ * f_hat_ * dfdT / (f_tv * f_tv) * grad_T[i] * grad_T[i];
    gradf[1][i] = -p_.diff[1] * Ts_hat * grad_Ts[i] * grad_Ts[i] / (Ts * Ts);
    gradf[2][i] = -p_.diff[2] * (V_hat / N) * grad_V[i] * grad_V[i] / (V * V);

    out.distance = std::max({out.distance, std::abs(T - T_hat), std::abs(Ts - Ts_hat), std::abs(V - V_hat)});
  }
  if (!out.valid) return out;

  out.U = integrate(u);
  out.monotone_term = integrate(mono);
  out.volterra_terms = integrate(dissip);
  out.v_delayed_int = integrate(vb_field);
  out.c1_algebraic = integrate(c1p);
  out.c1_seven = integrate(c1s);
  out.c1_scale = integrate(c1abs);
  for (std::size_t k = 0; k < 3; ++k) {
    out.ddiff_direct[k] = p_.diff[k] == 0.0 ? 0.0 : integrate(direct[k]);
    out.ddiff_gradient[k] = p_.diff[k] == 0.0 ? 0.0 : integrate(gradf[k]);
  }
  return out;
}

LyapunovSample rate_decomposition(const LyapunovInstant& prev, const LyapunovInstant& now,
                                  const LyapunovInstant& next, double prefactor) {
  LyapunovSample s;
  s.t = now.t;
  s.U = now.U;
  s.eta = now.eta;
  s.distance = now.distance;
  s.valid = prev.valid && now.valid && next.valid;
  if (!s.valid) return s;
  const double span = next.t - prev.t;
  s.dU_dt_fd = (next.U - prev.U) / span;
  s.eta_rate = (next.eta - prev.eta) / span;
  s.S_int = s.eta_rate == 0.0 ? 0.0 : s.eta_rate * now.v_delayed_int;
  s.ddiff_terms = now.ddiff_direct;
  s.ddiff_gradient = now.ddiff_gradient;
  s.Ddiff = now.ddiff_direct[0] + now.ddiff_direct[1] + now.ddiff_direct[2];
  s.D_int = -(now.monotone_term + now.volterra_terms + s.Ddiff) / prefactor;
  s.C1_int = now.c1_seven;
  s.C1_algebraic_int = now.c1_algebraic;
  s.c1_identity_error = std::abs(now.c1_algebraic - now.c1_seven) / now.c1_scale;
  const double analytic = prefactor * (-s.D_int + s.S_int);
  s.residual = std::abs(s.dU_dt_fd - analytic);
  const double ref = std::max(std::abs(analytic), std::abs(s.dU_dt_fd));
  s.residual_rel = ref > 0.0 ? s.residual / ref : 0.0;
  return s;
}

void LyapunovMonitor::observe(const HistorySegment& seg, const SampleDiagnostics& diag) {
  instants_.push_back(functional_.instant(seg, diag.eta));
}

StepObserver LyapunovMonitor::observer() {
  return [this](const HistorySegment& seg, const SampleDiagnostics& diag) { observe(seg, diag); };
}

std::vector<LyapunovSample> LyapunovMonitor::samples() const {
  std::vector<LyapunovSample> out;
  if (instants_.size() < 3) return out;
  out.reserve(instants_.size() - 2);
  for (std::size_t j = 1; j + 1 < instants_.size(); ++j) {
    out.push_back(rate_decomposition(instants_[j - 1], instants_[j], instants_[j + 1], functional_.prefactor()));
  }
  return out;
}

std::string_view to_string(StabilityLabel l) {
  switch (l) {
    case StabilityLabel::stable_evidence: return "stable_evidence";
    case StabilityLabel::inconclusive: return "inconclusive";
    case StabilityLabel::instability_evidence: return "instability_evidence";
  }
  return "unknown";
}

std::vector<PerturbationDirection> default_directions(std::uint64_t seed, const Grid1D& grid) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::array<double, 3> w{};
  double norm = 0.0;
  while (norm < 1e-6) {
    for (double& x : w) x = normal(rng);
    norm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  }
  for (double& x : w) x /= norm;

  PerturbationDirection flat;
  flat.shape = InitialPreset::equilibrium_perturbation;
  flat.weights = {1.0, 1.0, 1.0};
  PerturbationDirection bump;
  bump.shape = InitialPreset::gaussian_bump;
  bump.weights = w;
  bump.bump_center = 0.5 * (grid.x_min() + grid.x_max());
  bump.bump_width = 0.1 * grid.length();
  return {flat, bump};
}

StabilityRun certify_run(const Equilibrium& eq, double eps, const PerturbationDirection& dir, const Grid1D& grid,
                         const ModelParams& p, const IncidenceFn& f, const DelayFunctional& df,
                         const SolverConfig& cfg, const CertifyOptions& opts) {
  StabilityRun r;
  r.eps = eps;
  r.direction = dir;

  const double wn = std::sqrt(dir.weights[0] * dir.weights[0] + dir.weights[1] * dir.weights[1] +
                              dir.weights[2] * dir.weights[2]);
  if (!(wn > 0.0)) throw DomainError("perturbation direction must be nonzero");
  InitialData init;
  init.preset = dir.shape;
  init.reference = eq;
  init.amplitude = eps * eq.norm();
  init.direction = {dir.weights[0] / wn, dir.weights[1] / wn, dir.weights[2] / wn};
  init.bump_center = dir.bump_center;
  init.bump_width = dir.bump_width;

  LyapunovMonitor monitor(LyapunovFunctional(eq, p, f, df));
  const Trajectory traj = run(grid, init, p, f, df, cfg, {}, monitor.observer());
  r.aborted = traj.abort.has_value();

  const auto& inst = monitor.instants();
  if (!inst.empty()) {
    r.initial_distance = inst.front().distance;
    r.terminal_distance = inst.back().distance;
  }
  const double start = opts.monitor_start.value_or(2.0 * p.h_max);
  double min_d = std::numeric_limits<double>::infinity();
  r.max_ddiff_term = -std::numeric_limits<double>::infinity();
  for (const LyapunovSample& s : monitor.samples()) {
    r.max_eta_rate = std::max(r.max_eta_rate, std::abs(s.eta_rate));
    if (s.t < start - 1e-9 * cfg.dt) continue;
    ++r.samples;
    r.series.push_back(s);
    if (!s.valid) continue;
    ++r.valid_samples;
    if (s.dU_dt_fd <= opts.tol_decrease) ++r.decreasing;
    r.max_abs_S = std::max(r.max_abs_S, std::abs(s.S_int));
    min_d = std::min(min_d, s.D_int);
    if (s.D_int > 0.0) r.s_over_d = std::max(r.s_over_d, std::abs(s.S_int) / s.D_int);
    r.max_residual_rel = std::max(r.max_residual_rel, s.residual_rel);
    r.max_c1_identity_error = std::max(r.max_c1_identity_error, s.c1_identity_error);
    for (double term : s.ddiff_terms) r.max_ddiff_term = std::max(r.max_ddiff_term, term);
  }
  r.min_D = std::isfinite(min_d) ? min_d : 0.0;
  if (!std::isfinite(r.max_ddiff_term)) r.max_ddiff_term = 0.0;
  r.decrease_fraction = r.valid_samples > 0 ? static_cast<double>(r.decreasing) / r.valid_samples : 0.0;

  if (r.aborted || r.terminal_distance > r.initial_distance) {
    r.label = StabilityLabel::instability_evidence;
  } else if (r.valid_samples > 0 && r.decrease_fraction >= opts.required_fraction &&
             r.terminal_distance < r.initial_distance) {
    r.label = StabilityLabel::stable_evidence;
  } else {
    r.label = StabilityLabel::inconclusive;
  }
  return r;
}

namespace {

int severity(StabilityLabel l) {
  switch (l) {
    case StabilityLabel::stable_evidence: return 0;
    case StabilityLabel::inconclusive: return 1;
    case StabilityLabel::instability_evidence: return 2;
  }
  return 2;
}

}  // namespace

std::vector<StabilityVerdict> certify_local_stability(const Equilibrium& eq, const Grid1D& grid,
                                                      const ModelParams& p, const IncidenceFn& f,
                                                      const DelayFunctional& df, const SolverConfig& cfg,
                                                      const CertifyOptions& opts) {
  const std::vector<PerturbationDirection> dirs =
      opts.directions.empty() ? default_directions(0, grid) : opts.directions;
  const std::size_t n_dir = dirs.size();
  const std::size_t total = opts.eps.size() * n_dir;
  std::vector<StabilityRun> runs(total);
  std::vector<std::exception_ptr> errors(total);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(total); ++job) {
    const auto j = static_cast<std::size_t>(job);
    try {
      runs[j] = certify_run(eq, opts.eps[j / n_dir], dirs[j % n_dir], grid, p, f, df, cfg, opts);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<StabilityVerdict> out;
  for (std::size_t k = 0; k < opts.eps.size(); ++k) {
    StabilityVerdict v;
    v.equilibrium = eq;
    v.eps = opts.eps[k];
    v.decrease_fraction = 1.0;
    v.label = StabilityLabel::stable_evidence;
    for (std::size_t d = 0; d < n_dir; ++d) {
      StabilityRun& r = runs[k * n_dir + d];
      v.decrease_fraction = std::min(v.decrease_fraction, r.decrease_fraction);
      v.initial_distance = std::max(v.initial_distance, r.initial_distance);
      v.terminal_distance = std::max(v.terminal_distance, r.terminal_distance);
      v.max_eta_rate = std::max(v.max_eta_rate, r.max_eta_rate);
      v.s_over_d = std::max(v.s_over_d, r.s_over_d);
      if (severity(r.label) > severity(v.label)) v.label = r.label;
      v.runs.push_back(std::move(r));
    }
    spdlog::info("eps = {}: {} (decrease fraction {:.4f})", v.eps, to_string(v.label), v.decrease_fraction);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace sddvir
