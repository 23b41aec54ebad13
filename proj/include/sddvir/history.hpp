#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "sddvir/grid.hpp"
#include "sddvir/kernels.hpp"

namespace sddvir {

enum class Component { T, T_star, V };
std::string_view to_string(Component c);
std::optional<Component> parse_component(std::string_view name);

/// (T, T*, V) on a shared grid at one instant.
struct FieldState {
  Field T;
  Field T_star;
  Field V;

  explicit FieldState(const Grid1D& grid) : T(grid), T_star(grid), V(grid) {}
  FieldState(Field t, Field t_star, Field v);

  static FieldState constant(const Grid1D& grid, double t, double t_star, double v);

  const Grid1D& grid() const { return T.grid(); }
  std::size_t size() const { return T.size(); }
  bool all_finite() const { return T.all_finite() && T_star.all_finite() && V.all_finite(); }

  const Field& component(Component c) const;
  Field& component(Component c);

  kernels::ConstState view() const { return {T.values(), T_star.values(), V.values()}; }
  kernels::MutState view() { return {T.values(), T_star.values(), V.values()}; }

  bool operator==(const FieldState&) const = default;
};

/// Trailing record of the solution: snapshots with strictly increasing times covering at
/// least [t - h_max, t]. Storage is a ring whose slots are reused, so pushing a snapshot
/// does not allocate once the window is full.
class HistorySegment {
 public:
  HistorySegment(const Grid1D& grid, double h_max, double dt);

  /// Appends a snapshot at `t` (> newest time), evicting the oldest ones no longer needed.
  void push(double t, const FieldState& state);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t capacity() const { return slots_.size(); }
  double h_max() const { return h_max_; }
  double dt() const { return dt_; }
  const Grid1D& grid() const { return grid_; }

  /// Logical index 0 is the oldest snapshot, size() - 1 the newest.
  double time(std::size_t j) const { return slots_[slot(j)].t; }
  const FieldState& state(std::size_t j) const { return slots_[slot(j)].state; }

  double newest_time() const { return time(count_ - 1); }
  double oldest_time() const { return time(0); }
  const FieldState& newest() const { return state(count_ - 1); }

  /// True when the oldest snapshot is at or before newest_time() - h_max.
  bool covers_window() const;

  /// Index j with time(j) <= t < time(j+1); t is assumed inside [oldest, newest].
  std::size_t bracket(double t) const;

  /// Snap tolerance for matching a requested time to a stored snapshot.
  double time_tolerance() const { return 1e-9 * dt_; }

 private:
  struct Slot {
    double t;
    FieldState state;
  };

  std::size_t slot(std::size_t j) const { return (start_ + j) % slots_.size(); }
  void grow();

  Grid1D grid_;
  double h_max_;
  double dt_;
  std::vector<Slot> slots_;
  std::size_t start_ = 0;
  std::size_t count_ = 0;
};

/// Scalar reduction ξ of a state: `scale` times the spatial mean of one component.
struct Reducer {
  Component component = Component::V;
  double scale = 1.0;

  double apply(const FieldState& s) const { return scale * s.component(component).mean(); }
};

enum class DelayKind { constant, integral, wrapped };
enum class RhoKind { smooth_clamp, rational };

std::string_view to_string(DelayKind k);
std::optional<DelayKind> parse_delay_kind(std::string_view name);
std::string_view to_string(RhoKind k);
std::optional<RhoKind> parse_rho_kind(std::string_view name);

/// State-dependent delay η(φ) = ρ(∫_{-h}^{0} ξ(φ(θ)) κ(θ) dθ).
///
/// `constant` ignores the history and returns `eta_const`. `integral` uses κ ≡ 1 and ρ the
/// identity clamped to [0, h]. `wrapped` uses κ(θ) = exp(kappa_decay θ) and the configured ρ.
struct DelayFunctional {
  DelayKind kind = DelayKind::constant;
  double h_max = 1.0;
  double eta_const = 0.5;
  Reducer xi;
  double kappa_decay = 0.0;
  RhoKind rho = RhoKind::smooth_clamp;

  static DelayFunctional constant(double h_max, double eta);
  static DelayFunctional integral(double h_max, Reducer xi);
  static DelayFunctional wrapped(double h_max, Reducer xi, double kappa_decay, RhoKind rho);

  void validate() const;

  double kappa(double theta) const;
  double apply_rho(double s) const;
};

/// ∫_{-h}^{0} ξ(φ(θ)) κ(θ) dθ by the trapezoidal rule on the snapshot times.
double inner_integral(const DelayFunctional& df, const HistorySegment& seg);

double evaluate_eta(const DelayFunctional& df, const HistorySegment& seg);

/// Linear-in-time interpolation at newest_time() - lag, nodewise in space.
FieldState delayed_state(const HistorySegment& seg, double lag);
/// Same as delayed_state, writing into `out` (no allocation).
void delayed_state_into(const HistorySegment& seg, double lag, FieldState& out);
/// Interpolated state at an absolute time inside the stored window.
void state_at_into(const HistorySegment& seg, double t, FieldState& out);

/// (η(now) - η(prev)) / dt.
double eta_rate_estimate(const DelayFunctional& df, const HistorySegment& seg_prev, const HistorySegment& seg_now,
                         double dt);

}  // namespace sddvir
