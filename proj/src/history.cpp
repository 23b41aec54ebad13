#include "sddvir/history.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sddvir/errors.hpp"

namespace sddvir {

std::string_view to_string(Component c) {
  switch (c) {
    case Component::T: return "T";
    case Component::T_star: return "T_star";
    case Component::V: return "V";
  }
  return "unknown";
}

std::optional<Component> parse_component(std::string_view name) {
  for (auto c : {Component::T, Component::T_star, Component::V}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

FieldState::FieldState(Field t, Field t_star, Field v) : T(std::move(t)), T_star(std::move(t_star)), V(std::move(v)) {
  if (!(T.grid() == T_star.grid()) || !(T.grid() == V.grid())) {
    throw DomainError("state components must share one grid");
  }
}

FieldState FieldState::constant(const Grid1D& grid, double t, double t_star, double v) {
  return FieldState(Field(grid, t), Field(grid, t_star), Field(grid, v));
}

const Field& FieldState::component(Component c) const {
  switch (c) {
    case Component::T: return T;
    case Component::T_star: return T_star;
    case Component::V: return V;
  }
  return V;
}

Field& FieldState::component(Component c) {
  return const_cast<Field&>(static_cast<const FieldState&>(*this).component(c));
}

HistorySegment::HistorySegment(const Grid1D& grid, double h_max, double dt) : grid_(grid), h_max_(h_max), dt_(dt) {
  if (!(h_max > 0.0)) throw DomainError(fmt::format("history window must be positive (got {})", h_max));
  if (!(dt > 0.0)) throw DomainError(fmt::format("snapshot spacing must be positive (got {})", dt));
  const auto cap = static_cast<std::size_t>(std::ceil(h_max / dt - 1e-9)) + 2;
  slots_.assign(cap, Slot{0.0, FieldState(grid)});
}

void HistorySegment::grow() {
  std::vector<Slot> bigger;
  bigger.reserve(slots_.size() + slots_.size() / 2 + 1);
  for (std::size_t j = 0; j < count_; ++j) bigger.push_back(std::move(slots_[slot(j)]));
  while (bigger.size() < slots_.size() + slots_.size() / 2 + 1) bigger.push_back(Slot{0.0, FieldState(grid_)});
  slots_ = std::move(bigger);
  start_ = 0;
}

void HistorySegment::push(double t, const FieldState& state) {
  if (!(state.grid() == grid_)) throw HistoryError("snapshot grid does not match the history grid");
  if (count_ > 0 && !(t > newest_time() + time_tolerance())) {
    throw HistoryError(fmt::format("snapshot time {} does not advance past {}", t, newest_time()));
  }
  // The oldest snapshot may go once the next one already reaches back to t - h.
  while (count_ >= 2 && time(1) <= t - h_max_ + time_tolerance()) {
    start_ = (start_ + 1) % slots_.size();
    --count_;
  }
  if (count_ == slots_.size()) grow();
  Slot& s = slots_[slot(count_)];
  s.t = t;
  s.state = state;
  ++count_;
}

bool HistorySegment::covers_window() const {
  return count_ > 0 && oldest_time() <= newest_time() - h_max_ + time_tolerance();
}

std::size_t HistorySegment::bracket(double t) const {
  std::size_t lo = 0;
  std::size_t hi = count_ - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (time(mid) <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::string_view to_string(DelayKind k) {
  switch (k) {
    case DelayKind::constant: return "constant";
    case DelayKind::integral: return "integral";
    case DelayKind::wrapped: return "wrapped";
  }
  return "unknown";
}

std::optional<DelayKind> parse_delay_kind(std::string_view name) {
  for (auto k : {DelayKind::constant, DelayKind::integral, DelayKind::wrapped}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(RhoKind k) {
  switch (k) {
    case RhoKind::smooth_clamp: return "smooth_clamp";
    case RhoKind::rational: return "rational";
  }
  return "unknown";
}

std::optional<RhoKind> parse_rho_kind(std::string_view name) {
  for (auto k : {RhoKind::smooth_clamp, RhoKind::rational}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

DelayFunctional DelayFunctional::constant(double h_max, double eta) {
  DelayFunctional df;
  df.kind = DelayKind::constant;
  df.h_max = h_max;
  df.eta_const = eta;
  return df;
}

DelayFunctional DelayFunctional::integral(double h_max, Reducer xi) {
  DelayFunctional df;
  df.kind = DelayKind::integral;
  df.h_max = h_max;
  df.xi = xi;
  return df;
}

DelayFunctional DelayFunctional::wrapped(double h_max, Reducer xi, double kappa_decay, RhoKind rho) {
  DelayFunctional df;
  df.kind = DelayKind::wrapped;
  df.h_max = h_max;
  df.xi = xi;
  df.kappa_decay = kappa_decay;
  df.rho = rho;
  return df;
}

void DelayFunctional::validate() const {
  if (!(h_max > 0.0)) throw DomainError(fmt::format("delay h_max must be positive (got {})", h_max));
  if (kind == DelayKind::constant && !(eta_const >= 0.0 && eta_const <= h_max)) {
    throw DomainError(fmt::format("constant delay {} outside [0, {}]", eta_const, h_max));
  }
  if (!std::isfinite(xi.scale)) throw DomainError("xi scale must be finite");
  if (!std::isfinite(kappa_decay)) throw DomainError("kappa decay must be finite");
}

double DelayFunctional::kappa(double theta) const {
  if (kind != DelayKind::wrapped || kappa_decay == 0.0) return 1.0;
  return std::exp(kappa_decay * theta);
}

double DelayFunctional::apply_rho(double s) const {
  if (kind != DelayKind::wrapped) return std::clamp(s, 0.0, h_max);
  if (rho == RhoKind::rational) {
    const double p = std::max(s, 0.0);
    return h_max * p / (1.0 + p);
  }
  // Clamp to [0, h] with C^1 corners: the Hermite blend on [-w, w] from value 0 / slope 0 to
  // value w / slope 1 is the parabola (s + w)^2 / (4w); the top corner mirrors it.
  const double w = 0.01 * h_max;
  if (s <= -w) return 0.0;
  if (s < w) return (s + w) * (s + w) / (4.0 * w);
  if (s <= h_max - w) return s;
  if (s < h_max + w) return h_max - (h_max + w - s) * (h_max + w - s) / (4.0 * w);
  return h_max;
}

double inner_integral(const DelayFunctional& df, const HistorySegment& seg) {
  if (seg.empty() || !seg.covers_window()) {
    throw HistoryError(fmt::format("history segment does not cover the delay window of length {}", df.h_max));
  }
  const double t_hi = seg.newest_time();
  const double t_lo = t_hi - df.h_max;
  const double tol = seg.time_tolerance();
  const auto g = [&](std::size_t j) { return df.xi.apply(seg.state(j)) * df.kappa(seg.time(j) - t_hi); };

  double sum = 0.0;
  double g_right = g(seg.size() - 1);
  for (std::size_t j = seg.size() - 1; j >= 1; --j) {
    const double tr = seg.time(j);
    const double tl = seg.time(j - 1);
    const double g_left = g(j - 1);
    if (tl >= t_lo - tol) {
      sum += 0.5 * (tr - tl) * (g_left + g_right);
      if (tl <= t_lo + tol) break;
    } else {
      const double g_lo = g_left + (g_right - g_left) * (t_lo - tl) / (tr - tl);
      sum += 0.5 * (tr - t_lo) * (g_lo + g_right);
      break;
    }
    g_right = g_left;
  }
  return sum;
}

double evaluate_eta(const DelayFunctional& df, const HistorySegment& seg) {
  if (df.kind == DelayKind::constant) return df.eta_const;
  return df.apply_rho(inner_integral(df, seg));
}

void state_at_into(const HistorySegment& seg, double t, FieldState& out) {
  if (seg.empty()) throw HistoryError("empty history segment");
  const double tol = seg.time_tolerance();
  if (t > seg.newest_time() + tol || t < seg.oldest_time() - tol) {
    throw HistoryError(fmt::format("time {} outside stored history [{}, {}]", t, seg.oldest_time(),
                                   seg.newest_time()));
  }
  if (std::abs(t - seg.newest_time()) <= tol || seg.size() == 1) {
    out = seg.newest();
    return;
  }
  const std::size_t j = seg.bracket(t);
  const double ta = seg.time(j);
  const double tb = seg.time(j + 1);
  if (std::abs(t - ta) <= tol) {
    out = seg.state(j);
    return;
  }
  if (std::abs(tb - t) <= tol) {
    out = seg.state(j + 1);
    return;
  }
  const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
  const FieldState& a = seg.state(j);
  const FieldState& b = seg.state(j + 1);
  const auto blend = [w](std::span<const double> x, std::span<const double> y, std::span<double> z) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - w) * x[i] + w * y[i];
  };
  blend(a.T.values(), b.T.values(), out.T.values());
  blend(a.T_star.values(), b.T_star.values(), out.T_star.values());
  blend(a.V.values(), b.V.values(), out.V.values());
}

void delayed_state_into(const HistorySegment& seg, double lag, FieldState& out) {
  const double slack = 1e-12 * seg.h_max();
  if (!(lag >= -slack && lag <= seg.h_max() + slack)) {
    throw HistoryError(fmt::format("lag {} outside [0, {}]", lag, seg.h_max()));
  }
  if (lag <= 0.0) {
    out = seg.newest();
    return;
  }
  state_at_into(seg, seg.newest_time() - lag, out);
}

FieldState delayed_state(const HistorySegment& seg, double lag) {
  FieldState out(seg.grid());
  delayed_state_into(seg, lag, out);
  return out;
}

double eta_rate_estimate(const DelayFunctional& df, const HistorySegment& seg_prev, const HistorySegment& seg_now,
                         double dt) {
  if (!(dt > 0.0)) throw DomainError("eta rate needs dt > 0");
  return (evaluate_eta(df, seg_now) - evaluate_eta(df, seg_prev)) / dt;
}

}  // namespace sddvir
