#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sddvir/equilibria.hpp"
#include "sddvir/history.hpp"
#include "sddvir/model.hpp"

namespace sddvir {

enum class Stepper { euler, rk4_frozen_lag };
std::string_view to_string(Stepper s);
std::optional<Stepper> parse_stepper(std::string_view name);

struct SolverConfig {
  double dt = 0.01;  ///< time step, also the history snapshot spacing
  double t_end = 10.0;
  Stepper stepper = Stepper::euler;
  bool clip_negative = false;
  double invariance_tol = 1e-9;
  std::size_t sample_every = 1;  ///< keep every n-th step in the Trajectory

  void validate() const;
};

enum class InitialPreset { uniform, equilibrium_perturbation, gaussian_bump };
enum class HistoryProfile { constant_in_time, linear_ramp };
std::string_view to_string(InitialPreset p);
std::optional<InitialPreset> parse_initial_preset(std::string_view name);
std::string_view to_string(HistoryProfile p);
std::optional<HistoryProfile> parse_history_profile(std::string_view name);

/// Initial segment on [-h, 0], built from a named preset. Every preset is Lipschitz in time.
///
///   uniform                   (T, T*, V) = uniform_values everywhere
///   equilibrium_perturbation  reference + amplitude * direction, constant in space
///   gaussian_bump             base + amplitude * direction * exp(-(x - c)^2 / (2 w^2)),
///                             base = reference if given, else uniform_values
///
/// A linear_ramp profile scales the θ = 0 state by (1 + ramp_rate θ).
struct InitialData {
  InitialPreset preset = InitialPreset::uniform;
  std::array<double, 3> uniform_values{50.0, 10.0, 10.0};
  std::optional<Equilibrium> reference;
  double amplitude = 0.0;
  std::array<double, 3> direction{1.0, 1.0, 1.0};
  double bump_center = 0.5;
  double bump_width = 0.1;
  HistoryProfile profile = HistoryProfile::constant_in_time;
  double ramp_rate = 0.0;
  bool require_omega_lip = false;

  void validate(double h_max) const;
  FieldState state_at(const Grid1D& grid, double theta) const;
  /// Snapshots at θ = -K dt, ..., -dt, 0 with K = ceil(h/dt).
  HistorySegment build_history(const Grid1D& grid, double h_max, double dt) const;
};

/// One scheduled parameter change: at time t, `name` takes `value`.
/// Names: lambda, d, delta, N, c, omega, k.
struct ParamJump {
  double t = 0.0;
  std::string name;
  double value = 0.0;
};

struct ParamSchedule {
  std::vector<ParamJump> jumps;

  void validate(double t_end) const;
};

void apply_jump(const ParamJump& jump, ModelParams& params, IncidenceFn& f);

/// Upper bounds of the invariant box: T <= λ/d, T* <= λμe^{-ωh}/(dδ), V <= Nλμe^{-ωh}/(dc).
/// Without μ only T is bounded above.
struct InvariantBox {
  double T_max = 0.0;
  std::optional<double> T_star_max;
  std::optional<double> V_max;
};

InvariantBox omega_lip_box(const ModelParams& p, const IncidenceFn& f);

enum BoxFlag : unsigned { kBoxT = 1u, kBoxTStar = 2u, kBoxV = 4u };

/// Bitmask of components leaving [0, bound] by more than `tol`.
unsigned box_violation(const FieldState& s, const InvariantBox& box, double tol);

struct SampleDiagnostics {
  double eta = 0.0;
  double eta_rate = 0.0;
  unsigned box_violation = 0;  ///< OR of BoxFlag seen since the previous sample
  std::size_t clipped = 0;
};

struct AbortInfo {
  double last_good_time = 0.0;
  std::string message;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FieldState> states;
  std::vector<SampleDiagnostics> diagnostics;
  std::size_t steps = 0;
  std::size_t violation_steps = 0;  ///< steps whose state left the invariant box
  std::size_t clipped_entries = 0;
  double compatibility_residual = 0.0;
  std::optional<AbortInfo> abort;
};

/// Time derivative of the method-of-lines system.
FieldState rhs(const FieldState& now, const FieldState& delayed, const ModelParams& p, const IncidenceFn& f);
void rhs_into(const FieldState& now, const FieldState& delayed, const ModelParams& p, const IncidenceFn& f,
              FieldState& out);

/// Scratch buffers reused across steps.
struct StepWorkspace {
  explicit StepWorkspace(const Grid1D& grid)
      : k1(grid), k2(grid), k3(grid), k4(grid), stage(grid), delayed(grid), next(grid) {}
  FieldState k1, k2, k3, k4, stage, delayed, next;
};

struct StepOutput {
  double lag = 0.0;
  std::size_t clipped = 0;
};

/// Advances the newest snapshot of `seg` to `t_next` and appends the result.
///
/// The lag is evaluated once at the step start (or taken from `lag`) and frozen for the
/// whole step. Euler uses the delayed state at t - lag; rk4_frozen_lag interpolates the
/// delayed state at every stage time t + c dt - lag, clamped to the newest snapshot.
/// Throws SolverAbort on a non-finite state.
StepOutput step(HistorySegment& seg, const ModelParams& p, const IncidenceFn& f, const DelayFunctional& df,
                const SolverConfig& cfg, double t_next, StepWorkspace& ws, std::optional<double> lag = {});

/// Called after every accepted step (and once for t = 0) with the current history.
using StepObserver = std::function<void(const HistorySegment&, const SampleDiagnostics&)>;

/// max |φ'(0) - F(φ)| on the initial segment, φ'(0) by a backward difference.
double compatibility_residual(const HistorySegment& initial, const ModelParams& p, const IncidenceFn& f,
                              const DelayFunctional& df);

/// Integrates to cfg.t_end. Jumps are applied between steps; a step is shortened to land on
/// each jump time. A blow-up stops the run and is reported in Trajectory::abort.
Trajectory run(const Grid1D& grid, const InitialData& initial, ModelParams params, IncidenceFn f,
               const DelayFunctional& df, const SolverConfig& cfg, const ParamSchedule& schedule = {},
               const StepObserver& observer = {});

}  // namespace sddvir
