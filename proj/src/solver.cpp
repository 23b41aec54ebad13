#include "sddvir/solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sddvir/errors.hpp"
#include "sddvir/kernels.hpp"

namespace sddvir {

std::string_view to_string(Stepper s) { return s == Stepper::euler ? "euler" : "rk4_frozen_lag"; }

std::optional<Stepper> parse_stepper(std::string_view name) {
  if (name == "euler") return Stepper::euler;
  if (name == "rk4_frozen_lag") return Stepper::rk4_frozen_lag;
  return std::nullopt;
}

std::string_view to_string(InitialPreset p) {
  switch (p) {
    case InitialPreset::uniform: return "uniform";
    case InitialPreset::equilibrium_perturbation: return "equilibrium_perturbation";
    case InitialPreset::gaussian_bump: return "gaussian_bump";
  }
  return "unknown";
}

std::optional<InitialPreset> parse_initial_preset(std::string_view name) {
  for (auto p : {InitialPreset::uniform, InitialPreset::equilibrium_perturbation, InitialPreset::gaussian_bump}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(HistoryProfile p) {
  return p == HistoryProfile::constant_in_time ? "constant_in_time" : "linear_ramp";
}

std::optional<HistoryProfile> parse_history_profile(std::string_view name) {
  if (name == "constant_in_time") return HistoryProfile::constant_in_time;
  if (name == "linear_ramp") return HistoryProfile::linear_ramp;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError(fmt::format("dt must be positive (got {})", dt));
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError(fmt::format("t_end must be >= 0 (got {})", t_end));
  if (!(invariance_tol >= 0.0)) throw DomainError("invariance_tol must be >= 0");
  if (sample_every == 0) throw DomainError("sample_every must be >= 1");
}

void InitialData::validate(double h_max) const {
  if ((preset == InitialPreset::equilibrium_perturbation) && !reference) {
    throw DomainError("equilibrium_perturbation needs a reference equilibrium");
  }
  if (preset == InitialPreset::gaussian_bump && !(bump_width > 0.0)) {
    throw DomainError("gaussian_bump width must be positive");
  }
  if (profile == HistoryProfile::linear_ramp && !(ramp_rate >= 0.0 && ramp_rate * h_max <= 1.0)) {
    throw DomainError(fmt::format("ramp_rate must lie in [0, 1/h] (got {})", ramp_rate));
  }
  for (double v : uniform_values) {
    if (!std::isfinite(v)) throw DomainError("initial values must be finite");
  }
  if (!std::isfinite(amplitude)) throw DomainError("perturbation amplitude must be finite");
}

FieldState InitialData::state_at(const Grid1D& grid, double theta) const {
  std::array<double, 3> base = uniform_values;
  if (reference && preset != InitialPreset::uniform) {
    base = {reference->T_hat, reference->T_star_hat, reference->V_hat};
  }
  FieldState s(grid);
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    double shape = 0.0;
    if (preset == InitialPreset::equilibrium_perturbation) {
      shape = 1.0;
    } else if (preset == InitialPreset::gaussian_bump) {
      const double z = (grid.node(i) - bump_center) / bump_width;
      shape = std::exp(-0.5 * z * z);
    }
    s.T[i] = base[0] + amplitude * direction[0] * shape;
    s.T_star[i] = base[1] + amplitude * direction[1] * shape;
    s.V[i] = base[2] + amplitude * direction[2] * shape;
  }
  if (profile == HistoryProfile::linear_ramp) {
    const double scale = 1.0 + ramp_rate * theta;
    for (auto* fld : {&s.T, &s.T_star, &s.V}) {
      for (double& v : fld->values()) v *= scale;
    }
  }
  return s;
}

HistorySegment InitialData::build_history(const Grid1D& grid, double h_max, double dt) const {
  validate(h_max);
  HistorySegment seg(grid, h_max, dt);
  const auto k = static_cast<long>(std::ceil(h_max / dt - 1e-9));
  for (long j = -k; j <= 0; ++j) {
    const double theta = static_cast<double>(j) * dt;
    seg.push(theta, state_at(grid, theta));
  }
  return seg;
}

void ParamSchedule::validate(double t_end) const {
  static constexpr std::array<std::string_view, 7> kNames{"lambda", "d", "delta", "N", "c", "omega", "k"};
  double prev = 0.0;
  for (const auto& j : jumps) {
    if (std::find(kNames.begin(), kNames.end(), j.name) == kNames.end()) {
      throw DomainError(fmt::format("schedule: unknown parameter '{}'", j.name));
    }
    if (!(j.t > prev) || !(j.t < t_end)) {
      throw DomainError(fmt::format("schedule: jump times must increase strictly inside (0, {}) (got {})", t_end, j.t));
    }
    prev = j.t;
  }
}

void apply_jump(const ParamJump& jump, ModelParams& params, IncidenceFn& f) {
  if (jump.name == "lambda") params.lambda = jump.value;
  else if (jump.name == "d") params.d = jump.value;
  else if (jump.name == "delta") params.delta = jump.value;
  else if (jump.name == "N") params.burst_n = jump.value;
  else if (jump.name == "c") params.c = jump.value;
  else if (jump.name == "omega") params.omega = jump.value;
  else if (jump.name == "k") f.k = jump.value;
  else throw DomainError(fmt::format("schedule: unknown parameter '{}'", jump.name));
  params.validate();
  f.validate();
}

InvariantBox omega_lip_box(const ModelParams& p, const IncidenceFn& f) {
  InvariantBox box;
  box.T_max = p.lambda / p.d;
  if (const auto mu = f.effective_mu()) {
    box.T_star_max = p.lambda * *mu * p.survival() / (p.d * p.delta);
    box.V_max = p.burst_n * p.lambda * *mu * p.survival() / (p.d * p.c);
  }
  return box;
}

unsigned box_violation(const FieldState& s, const InvariantBox& box, double tol) {
  const auto outside = [tol](const Field& u, std::optional<double> hi) {
    for (double v : u.values()) {
      if (v < -tol) return true;
      if (hi && v > *hi + tol) return true;
    }
    return false;
  };
  unsigned mask = 0;
  if (outside(s.T, box.T_max)) mask |= kBoxT;
  if (outside(s.T_star, box.T_star_max)) mask |= kBoxTStar;
  if (outside(s.V, box.V_max)) mask |= kBoxV;
  return mask;
}

void rhs_into(const FieldState& now, const FieldState& delayed, const ModelParams& p, const IncidenceFn& f,
              FieldState& out) {
  const double dx = now.grid().dx();
  kernels::omp::rhs(kernels::ReactionCoeffs::from(p), f, now.view(), delayed.view(), 1.0 / (dx * dx), out.view());
}

FieldState rhs(const FieldState& now, const FieldState& delayed, const ModelParams& p, const IncidenceFn& f) {
  FieldState out(now.grid());
  rhs_into(now, delayed, p, f, out);
  return out;
}

namespace {

void axpy_state(const FieldState& x, double a, const FieldState& k, FieldState& y) {
  kernels::omp::axpy(x.T.values(), a, k.T.values(), y.T.values());
  kernels::omp::axpy(x.T_star.values(), a, k.T_star.values(), y.T_star.values());
  kernels::omp::axpy(x.V.values(), a, k.V.values(), y.V.values());
}

// Delayed state for a stage at t_n + offset, with the lag frozen at the step start.
void stage_delayed(const HistorySegment& seg, double lag, double offset, FieldState& out) {
  const double t = std::min(seg.newest_time() - lag + offset, seg.newest_time());
  state_at_into(seg, t, out);
}

std::size_t clip(FieldState& s) {
  std::size_t n = 0;
  for (auto* fld : {&s.T, &s.T_star, &s.V}) {
    for (double& v : fld->values()) {
      if (v < 0.0) {
        v = 0.0;
        ++n;
      }
    }
  }
  return n;
}

}  // namespace

StepOutput step(HistorySegment& seg, const ModelParams& p, const IncidenceFn& f, const DelayFunctional& df,
                const SolverConfig& cfg, double t_next, StepWorkspace& ws, std::optional<double> lag) {
  const double t = seg.newest_time();
  const double h = t_next - t;
  if (!(h > 0.0)) throw DomainError(fmt::format("step must advance time ({} -> {})", t, t_next));
  StepOutput out;
  out.lag = lag ? *lag : evaluate_eta(df, seg);
  const FieldState& now = seg.newest();

  if (cfg.stepper == Stepper::euler) {
    delayed_state_into(seg, out.lag, ws.delayed);
    rhs_into(now, ws.delayed, p, f, ws.k1);
    axpy_state(now, h, ws.k1, ws.next);
  } else {
    delayed_state_into(seg, out.lag, ws.delayed);
    rhs_into(now, ws.delayed, p, f, ws.k1);
    stage_delayed(seg, out.lag, 0.5 * h, ws.delayed);
    axpy_state(now, 0.5 * h, ws.k1, ws.stage);
    rhs_into(ws.stage, ws.delayed, p, f, ws.k2);
    axpy_state(now, 0.5 * h, ws.k2, ws.stage);
    rhs_into(ws.stage, ws.delayed, p, f, ws.k3);
    stage_delayed(seg, out.lag, h, ws.delayed);
    axpy_state(now, h, ws.k3, ws.stage);
    rhs_into(ws.stage, ws.delayed, p, f, ws.k4);
    const auto combine = [h](std::span<const double> y, std::span<const double> a, std::span<const double> b,
                             std::span<const double> c, std::span<const double> d, std::span<double> o) {
      const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (y.size() >= kernels::kParallelThreshold)
      for (std::ptrdiff_t i = 0; i < n; ++i) o[i] = y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    };
    combine(now.T.values(), ws.k1.T.values(), ws.k2.T.values(), ws.k3.T.values(), ws.k4.T.values(),
            ws.next.T.values());
    combine(now.T_star.values(), ws.k1.T_star.values(), ws.k2.T_star.values(), ws.k3.T_star.values(),
            ws.k4.T_star.values(), ws.next.T_star.values());
    combine(now.V.values(), ws.k1.V.values(), ws.k2.V.values(), ws.k3.V.values(), ws.k4.V.values(),
            ws.next.V.values());
  }

  if (!ws.next.all_finite()) {
    throw SolverAbort(fmt::format("non-finite state while stepping {} -> {}", t, t_next), t);
  }
  if (cfg.clip_negative) out.clipped = clip(ws.next);
  seg.push(t_next, ws.next);
  return out;
}

double compatibility_residual(const HistorySegment& initial, const ModelParams& p, const IncidenceFn& f,
                              const DelayFunctional& df) {
  if (initial.size() < 2) return 0.0;
  const std::size_t last = initial.size() - 1;
  const double dt = initial.time(last) - initial.time(last - 1);
  const FieldState& now = initial.state(last);
  const FieldState& prev = initial.state(last - 1);
  const FieldState delayed = delayed_state(initial, evaluate_eta(df, initial));
  const FieldState F = rhs(now, delayed, p, f);
  double worst = 0.0;
  const auto diff = [&](const Field& a, const Field& b, const Field& g) {
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs((a[i] - b[i]) / dt - g[i]));
  };
  diff(now.T, prev.T, F.T);
  diff(now.T_star, prev.T_star, F.T_star);
  diff(now.V, prev.V, F.V);
  return worst;
}

Trajectory run(const Grid1D& grid, const InitialData& initial, ModelParams params, IncidenceFn f,
               const DelayFunctional& df, const SolverConfig& cfg, const ParamSchedule& schedule,
               const StepObserver& observer) {
  params.validate();
  f.validate();
  df.validate();
  cfg.validate();
  schedule.validate(std::max(cfg.t_end, 0.0));
  if (std::abs(df.h_max - params.h_max) > 1e-12 * params.h_max) {
    throw DomainError(fmt::format("delay window {} differs from h = {}", df.h_max, params.h_max));
  }

  Trajectory traj;
  if (cfg.t_end == 0.0) return traj;

  HistorySegment seg = initial.build_history(grid, params.h_max, cfg.dt);
  if (initial.require_omega_lip) {
    const InvariantBox box = omega_lip_box(params, f);
    for (std::size_t j = 0; j < seg.size(); ++j) {
      if (box_violation(seg.state(j), box, cfg.invariance_tol) != 0) {
        throw DomainError(fmt::format("initial segment leaves the invariant box at θ = {}", seg.time(j)));
      }
    }
  }
  traj.compatibility_residual = compatibility_residual(seg, params, f, df);

  InvariantBox box = omega_lip_box(params, f);
  StepWorkspace ws(grid);
  double eta = evaluate_eta(df, seg);
  double eta_prev_time = 0.0;

  SampleDiagnostics pending{eta, 0.0, box_violation(seg.newest(), box, cfg.invariance_tol), 0};
  const auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(seg.newest());
    traj.diagnostics.push_back(pending);
    pending.box_violation = 0;
    pending.clipped = 0;
  };
  record(0.0);
  if (observer) observer(seg, traj.diagnostics.back());

  const double tol = 1e-9 * cfg.dt;
  double t = 0.0;
  double anchor = 0.0;
  long m = 0;
  std::size_t next_jump = 0;
  try {
    while (t < cfg.t_end - tol) {
      double t_next = anchor + static_cast<double>(m + 1) * cfg.dt;
      bool lands_on_jump = false;
      if (next_jump < schedule.jumps.size() && t_next >= schedule.jumps[next_jump].t - tol) {
        t_next = schedule.jumps[next_jump].t;
        lands_on_jump = true;
      }
      if (t_next >= cfg.t_end - tol) t_next = cfg.t_end;

      const StepOutput so = step(seg, params, f, df, cfg, t_next, ws, eta);
      ++traj.steps;
      ++m;
      t = t_next;
      traj.clipped_entries += so.clipped;
      pending.clipped += so.clipped;

      const unsigned mask = box_violation(seg.newest(), box, cfg.invariance_tol);
      if (mask != 0) ++traj.violation_steps;
      pending.box_violation |= mask;

      if (lands_on_jump) {
        while (next_jump < schedule.jumps.size() && std::abs(schedule.jumps[next_jump].t - t) <= tol) {
          apply_jump(schedule.jumps[next_jump], params, f);
          spdlog::debug("t = {}: {} -> {}", t, schedule.jumps[next_jump].name, schedule.jumps[next_jump].value);
          ++next_jump;
        }
        box = omega_lip_box(params, f);
        anchor = t;
        m = 0;
      }

      const double eta_new = evaluate_eta(df, seg);
      pending.eta_rate = (eta_new - eta) / (t - eta_prev_time);
      pending.eta = eta_new;
      eta = eta_new;
      eta_prev_time = t;

      const bool last = t >= cfg.t_end - tol;
      if (traj.steps % cfg.sample_every == 0 || last) record(t);
      if (observer) observer(seg, SampleDiagnostics{eta, pending.eta_rate, mask, so.clipped});
    }
  } catch (const SolverAbort& e) {
    spdlog::error("{}", e.what());
    traj.abort = AbortInfo{e.last_good_time(), e.what()};
  }
  return traj;
}

}  // namespace sddvir
