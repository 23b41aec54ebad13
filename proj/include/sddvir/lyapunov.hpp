#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sddvir/equilibria.hpp"
#include "sddvir/history.hpp"
#include "sddvir/model.hpp"
#include "sddvir/solver.hpp"

namespace sddvir {

/// v(s) = s - 1 - ln s, accurate near s = 1. Throws DomainError for s <= 0.
double volterra_v(double s);

/// Arguments of v at or below this make a sample invalid.
inline constexpr double kLogFloor = 1e-30;

/// U^{sdd-x}(t, x) at one node for the newest snapshot of `seg`:
///
///   e^{-ωh} ∫_{T̂}^{T} (1 - f(T̂,V̂)/f(θ,V̂)) dθ + T̂* v(T*/T̂*) + (V̂/N) v(V/V̂)
///     + δT̂* ∫_{t-η}^{t} v(f(T(θ),V(θ)) / f(T̂,V̂)) dθ
///
/// Empty when a v-argument falls to kLogFloor.
std::optional<double> u_sdd_pointwise(const HistorySegment& seg, const Equilibrium& eq, const ModelParams& p,
                                      const IncidenceFn& f, const DelayFunctional& df, std::size_t node);

/// Everything the rate decomposition needs from one instant.
struct LyapunovInstant {
  double t = 0.0;
  double eta = 0.0;
  bool valid = true;
  double U = 0.0;
  double monotone_term = 0.0;              ///< d T̂ e^{-ωh} ∫ (1 - T/T̂)(1 - f̂/f(T,V̂))
  double volterra_terms = 0.0;             ///< f̂ e^{-ωh} ∫ {-v(..) - v(..) - v(..) - [v(V/V̂) - v(..)]}
  std::array<double, 3> ddiff_direct{};    ///< ∫ p_i(u) d^i Δu, one entry per component
  std::array<double, 3> ddiff_gradient{};  ///< same terms in gradient form
  double v_delayed_int = 0.0;              ///< ∫ v(f(T_del,V_del)/f̂)
  double c1_algebraic = 0.0;               ///< ∫ C¹ = ∫ (3 + a + b - c - dd - e - g - h), before the logs are split
  double c1_seven = 0.0;                   ///< ∫ C¹, seven-v form
  double c1_scale = 0.0;                   ///< ∫ (3 + a + b + c + dd + e + g + h), rounding scale of both forms
  double distance = 0.0;                   ///< sup-norm distance to the equilibrium
};

/// Evaluates the functional and its rate ingredients for a fixed interior equilibrium.
class LyapunovFunctional {
 public:
  LyapunovFunctional(const Equilibrium& eq, const ModelParams& p, const IncidenceFn& f, const DelayFunctional& df);

  LyapunovInstant instant(const HistorySegment& seg, double eta) const;

  /// δ T̂*, the prefactor of the rate decomposition.
  double prefactor() const { return p_.delta * eq_.T_star_hat; }
  const Equilibrium& equilibrium() const { return eq_; }

  /// e^{-ωh} ∫_{T̂}^{T} (1 - f̂/f(θ,V̂)) dθ
  double monotone_integral(double T) const;

 private:
  Equilibrium eq_;
  ModelParams p_;
  IncidenceFn f_;
  DelayFunctional df_;
  double f_hat_;
  double survival_;
};

struct LyapunovSample {
  double t = 0.0;
  double U = 0.0;
  double dU_dt_fd = 0.0;
  double eta = 0.0;
  double eta_rate = 0.0;
  double S_int = 0.0;                       ///< ∫ S^sdd dx
  double D_int = 0.0;                       ///< ∫ D^sdd dx
  double Ddiff = 0.0;                       ///< D^diff-3(t), direct form
  std::array<double, 3> ddiff_terms{};      ///< direct-form terms
  std::array<double, 3> ddiff_gradient{};   ///< gradient-form terms
  double C1_int = 0.0;                      ///< seven-v form
  double C1_algebraic_int = 0.0;
  double c1_identity_error = 0.0;           ///< |algebraic - seven-v| / c1_scale
  double residual = 0.0;                    ///< |dU_dt_fd - δT̂*(-D_int + S_int)|
  double residual_rel = 0.0;
  double distance = 0.0;
  bool valid = true;
};

/// Central differences over three consecutive instants.
LyapunovSample rate_decomposition(const LyapunovInstant& prev, const LyapunovInstant& now,
                                  const LyapunovInstant& next, double prefactor);

/// Collects instants along a run (use as the solver's StepObserver) and turns them into samples.
class LyapunovMonitor {
 public:
  explicit LyapunovMonitor(LyapunovFunctional functional) : functional_(std::move(functional)) {}

  void observe(const HistorySegment& seg, const SampleDiagnostics& diag);
  StepObserver observer();

  const std::vector<LyapunovInstant>& instants() const { return instants_; }
  /// One sample per instant that has both neighbours.
  std::vector<LyapunovSample> samples() const;

 private:
  LyapunovFunctional functional_;
  std::vector<LyapunovInstant> instants_;
};

enum class StabilityLabel { stable_evidence, inconclusive, instability_evidence };
std::string_view to_string(StabilityLabel l);

/// Shape of one perturbation of the equilibrium; weights are normalised to unit length.
struct PerturbationDirection {
  InitialPreset shape = InitialPreset::equilibrium_perturbation;
  std::array<double, 3> weights{1.0, 1.0, 1.0};
  double bump_center = 0.5;
  double bump_width = 0.1;
};

/// Constant and gaussian_bump directions along one random unit vector drawn from `seed`.
std::vector<PerturbationDirection> default_directions(std::uint64_t seed, const Grid1D& grid);

struct CertifyOptions {
  std::vector<double> eps{0.05};  ///< perturbation sizes as fractions of ‖equilibrium‖
  std::vector<PerturbationDirection> directions;
  std::optional<double> monitor_start;  ///< default 2h
  double tol_decrease = 1e-8;
  double required_fraction = 0.99;
};

/// Outcome of one perturbed run.
struct StabilityRun {
  double eps = 0.0;
  PerturbationDirection direction;
  std::size_t samples = 0;
  std::size_t valid_samples = 0;
  std::size_t decreasing = 0;
  double decrease_fraction = 0.0;
  double initial_distance = 0.0;
  double terminal_distance = 0.0;
  double max_eta_rate = 0.0;
  double max_abs_S = 0.0;
  double min_D = 0.0;
  double s_over_d = 0.0;  ///< max over valid samples of |S_int| / D_int
  double max_residual_rel = 0.0;
  double max_c1_identity_error = 0.0;
  double max_ddiff_term = 0.0;  ///< largest direct-form diffusion term (should be <= 0)
  bool aborted = false;
  StabilityLabel label = StabilityLabel::inconclusive;
  std::vector<LyapunovSample> series;  ///< samples inside the monitor window
};

/// Per-ε summary: worst case over the directions.
struct StabilityVerdict {
  Equilibrium equilibrium;
  double eps = 0.0;
  double decrease_fraction = 0.0;
  double initial_distance = 0.0;
  double terminal_distance = 0.0;
  double max_eta_rate = 0.0;
  double s_over_d = 0.0;
  StabilityLabel label = StabilityLabel::inconclusive;
  std::vector<StabilityRun> runs;
};

StabilityRun certify_run(const Equilibrium& eq, double eps, const PerturbationDirection& dir, const Grid1D& grid,
                         const ModelParams& p, const IncidenceFn& f, const DelayFunctional& df,
                         const SolverConfig& cfg, const CertifyOptions& opts);

/// Runs every (ε, direction) pair; independent runs execute concurrently, results are
/// ordered as in opts.eps.
std::vector<StabilityVerdict> certify_local_stability(const Equilibrium& eq, const Grid1D& grid,
                                                      const ModelParams& p, const IncidenceFn& f,
                                                      const DelayFunctional& df, const SolverConfig& cfg,
                                                      const CertifyOptions& opts);

}  // namespace sddvir
