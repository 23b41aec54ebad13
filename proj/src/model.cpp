#include "sddvir/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "sddvir/errors.hpp"

namespace sddvir {

namespace {

double sample(double lo, double hi, int n, int i) {
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void require_density(int n) {
  if (n < 2) throw DomainError(fmt::format("sample density must be >= 2 (got {})", n));
}

HypothesisVerdict verdict_fails(double T, double V, std::string detail) {
  return {Verdict::fails, std::make_pair(T, V), std::move(detail)};
}

IncidenceCallable as_callable(const IncidenceFn& f) {
  return [f](double T, double V) { return f.value(T, V); };
}

}  // namespace

void ModelParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(fmt::format("{} must be positive and finite (got {})", name, v));
    }
  };
  positive(lambda, "lambda");
  positive(d, "d");
  positive(delta, "delta");
  positive(burst_n, "N");
  positive(c, "c");
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw DomainError(fmt::format("omega must be >= 0 and finite (got {})", omega));
  }
  positive(h_max, "h");
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (!(diff[i] >= 0.0) || !std::isfinite(diff[i])) {
      throw DomainError(fmt::format("diffusion coefficient d{} must be >= 0 (got {})", i + 1, diff[i]));
    }
  }
}

double ModelParams::survival() const { return std::exp(-omega * h_max); }

std::string_view to_string(IncidenceKind kind) {
  switch (kind) {
    case IncidenceKind::bilinear: return "bilinear";
    case IncidenceKind::saturated: return "saturated";
    case IncidenceKind::beddington_deangelis: return "beddington_deangelis";
    case IncidenceKind::crowley_martin: return "crowley_martin";
  }
  return "unknown";
}

std::optional<IncidenceKind> parse_incidence_kind(std::string_view name) {
  for (auto kind : {IncidenceKind::bilinear, IncidenceKind::saturated,
                    IncidenceKind::beddington_deangelis, IncidenceKind::crowley_martin}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

IncidenceFn IncidenceFn::bilinear(double k) { return {IncidenceKind::bilinear, k, 0.0, 0.0, {}}; }

IncidenceFn IncidenceFn::saturated(double k, double k2) {
  return {IncidenceKind::saturated, k, 0.0, k2, {}};
}

IncidenceFn IncidenceFn::beddington_deangelis(double k, double k1, double k2) {
  return {IncidenceKind::beddington_deangelis, k, k1, k2, {}};
}

IncidenceFn IncidenceFn::crowley_martin(double k, double k1, double k2) {
  return {IncidenceKind::crowley_martin, k, k1, k2, {}};
}

void IncidenceFn::validate() const {
  if (!(k >= 0.0) || !(k1 >= 0.0) || !(k2 >= 0.0)) {
    throw DomainError(fmt::format("incidence constants must be nonnegative (k={}, k1={}, k2={})", k, k1, k2));
  }
  if ((kind == IncidenceKind::saturated || kind == IncidenceKind::beddington_deangelis) && !(k2 > 0.0)) {
    throw DomainError(fmt::format("{} incidence requires k2 > 0", to_string(kind)));
  }
  if (kind == IncidenceKind::crowley_martin && !(k1 > 0.0 && k2 > 0.0)) {
    throw DomainError("crowley_martin incidence requires k1 > 0 and k2 > 0");
  }
  if (mu && !(*mu > 0.0)) throw DomainError(fmt::format("mu must be positive (got {})", *mu));
}

double IncidenceFn::d_dT(double T, double V) const noexcept {
  switch (kind) {
    case IncidenceKind::bilinear:
      return k * V;
    case IncidenceKind::saturated:
      return k * V / (1.0 + k2 * V);
    case IncidenceKind::beddington_deangelis: {
      const double den = 1.0 + k1 * T + k2 * V;
      return k * V * (1.0 + k2 * V) / (den * den);
    }
    case IncidenceKind::crowley_martin: {
      const double a = 1.0 + k1 * T;
      return k * V / (a * a * (1.0 + k2 * V));
    }
  }
  return 0.0;
}

std::optional<double> IncidenceFn::analytic_mu() const {
  // k T V / (1 + k2 V) <= (k / k2) T, and the extra denominators only shrink f.
  if (kind == IncidenceKind::bilinear || !(k2 > 0.0)) return std::nullopt;
  if (k == 0.0) return std::nullopt;
  return k / k2;
}

std::optional<double> IncidenceFn::effective_mu() const { return mu ? mu : analytic_mu(); }

double eval_incidence(const IncidenceFn& f, double T, double V) {
  if (!(T >= 0.0) || !(V >= 0.0)) {
    throw DomainError(fmt::format("incidence evaluated outside T, V >= 0 (T={}, V={})", T, V));
  }
  return f.value(T, V);
}

void SampleBox::validate() const {
  const bool finite = std::isfinite(t_min) && std::isfinite(t_max) && std::isfinite(v_min) && std::isfinite(v_max);
  if (!finite || !(t_max > t_min) || !(v_max > v_min)) {
    throw DomainError(fmt::format("sample box must have positive area ([{}, {}] x [{}, {}])", t_min, t_max,
                                  v_min, v_max));
  }
  if (t_min < 0.0 || v_min < 0.0) throw DomainError("sample box must lie in T, V >= 0");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "unknown";
}

Hf1Result check_hf1(const IncidenceCallable& f, std::optional<double> mu, const SampleBox& box, int n) {
  box.validate();
  require_density(n);
  if (!mu) {
    return {{Verdict::not_applicable, std::nullopt, "no candidate mu supplied and no closed-form bound"}, {}};
  }
  for (int i = 0; i < n; ++i) {
    const double T = sample(box.t_min, box.t_max, n, i);
    for (int j = 0; j < n; ++j) {
      const double V = sample(box.v_min, box.v_max, n, j);
      const double fv = f(T, V);
      if (std::abs(fv) > *mu * std::abs(T) * (1.0 + 1e-12)) {
        return {verdict_fails(T, V, fmt::format("|f| = {} exceeds mu|T| = {}", std::abs(fv), *mu * T)), mu};
      }
    }
  }
  return {{Verdict::holds, std::nullopt, fmt::format("|f| <= {} |T| on all samples", *mu)}, mu};
}

Hf1Result check_hf1(const IncidenceFn& f, const SampleBox& box, int n) {
  return check_hf1(as_callable(f), f.effective_mu(), box, n);
}

HypothesisVerdict check_hf1_plus(const IncidenceCallable& f, const SampleBox& box, int n) {
  box.validate();
  require_density(n);
  std::vector<double> ts(n), vs(n);
  for (int i = 0; i < n; ++i) {
    ts[i] = sample(box.t_min, box.t_max, n, i);
    vs[i] = sample(box.v_min, box.v_max, n, i);
  }
  for (double T : ts) {
    if (f(T, 0.0) != 0.0) return verdict_fails(T, 0.0, "f(T, 0) != 0");
  }
  for (double V : vs) {
    if (f(0.0, V) != 0.0) return verdict_fails(0.0, V, "f(0, V) != 0");
  }
  for (double T : ts) {
    for (double V : vs) {
      if (T > 0.0 && V > 0.0 && !(f(T, V) > 0.0)) return verdict_fails(T, V, "f not strictly positive");
    }
  }
  for (double V : vs) {
    if (!(V > 0.0)) continue;
    double prev_t = -1.0;
    double prev_f = 0.0;
    for (double T : ts) {
      if (!(T > 0.0)) continue;
      const double fv = f(T, V);
      if (prev_t > 0.0 && !(fv > prev_f)) return verdict_fails(T, V, "f not strictly increasing in T");
      prev_t = T;
      prev_f = fv;
    }
  }
  for (double T : ts) {
    if (!(T > 0.0)) continue;
    double prev_v = -1.0;
    double prev_f = 0.0;
    for (double V : vs) {
      if (!(V > 0.0)) continue;
      const double fv = f(T, V);
      if (prev_v > 0.0 && !(fv > prev_f)) return verdict_fails(T, V, "f not strictly increasing in V");
      prev_v = V;
      prev_f = fv;
    }
  }
  return {Verdict::holds, std::nullopt, "vanishes on the axes, positive and strictly increasing inside"};
}

HypothesisVerdict check_hf1_plus(const IncidenceFn& f, const SampleBox& box, int n) {
  return check_hf1_plus(as_callable(f), box, n);
}

HypothesisVerdict check_hf3(const IncidenceCallable& f, double v_hat, const SampleBox& box, int n) {
  if (!(v_hat > 0.0)) throw DomainError(fmt::format("v_hat must be positive (got {})", v_hat));
  box.validate();
  require_density(n);
  std::size_t checked = 0;
  for (int i = 0; i < n; ++i) {
    const double T = sample(box.t_min, box.t_max, n, i);
    if (!(T > 0.0)) continue;
    const double base = f(T, v_hat);
    if (!(base > 0.0)) continue;
    for (int j = 0; j < n; ++j) {
      const double V = sample(box.v_min, box.v_max, n, j);
      if (!(V > 0.0) || V == v_hat) continue;
      const double ratio = f(T, V) / base;
      const double product = (V / v_hat - ratio) * (ratio - 1.0);
      ++checked;
      if (!(product > kHf3Strict)) {
        return verdict_fails(T, V, fmt::format("ratio {} not strictly between 1 and {} (product {})", ratio,
                                               V / v_hat, product));
      }
    }
  }
  if (checked == 0) return {Verdict::not_applicable, std::nullopt, "no admissible sample points"};
  return {Verdict::holds, std::nullopt, fmt::format("strict on {} samples", checked)};
}

HypothesisVerdict check_hf3(const IncidenceFn& f, double v_hat, const SampleBox& box, int n) {
  return check_hf3(as_callable(f), v_hat, box, n);
}

namespace {

struct SmoothnessProbe {
  bool smooth = true;
  double t_at = 0.0;
};

// Max jump between consecutive forward-difference slopes. For a C^1 function it halves with
// the spacing; across a kink it stays near half the slope jump.
double max_slope_jump(const IncidenceCallable& f, double V, double lo, double hi, std::size_t cells,
                      double* where, double* slope_scale) {
  const double s = (hi - lo) / static_cast<double>(cells);
  double prev_f = f(lo, V);
  double prev_slope = 0.0;
  double worst = 0.0;
  for (std::size_t j = 1; j <= cells; ++j) {
    const double T = (j == cells) ? hi : lo + s * static_cast<double>(j);
    const double fv = f(T, V);
    const double slope = (fv - prev_f) / s;
    *slope_scale = std::max(*slope_scale, std::abs(slope));
    if (j > 1) {
      const double jump = std::abs(slope - prev_slope);
      if (jump > worst) {
        worst = jump;
        *where = lo + s * static_cast<double>(j - 1);
      }
    }
    prev_slope = slope;
    prev_f = fv;
  }
  return worst;
}

SmoothnessProbe probe_row(const IncidenceCallable& f, double V, const SampleBox& box, int n) {
  constexpr int kLevels = 4;
  const std::size_t base_cells = 8 * static_cast<std::size_t>(n - 1);
  double where = box.t_min;
  double scale = 0.0;
  const double coarse = max_slope_jump(f, V, box.t_min, box.t_max, base_cells, &where, &scale);
  const double fine = max_slope_jump(f, V, box.t_min, box.t_max, base_cells << kLevels, &where, &scale);
  const double floor = 1e-7 * (1.0 + scale);
  return {fine <= coarse / 8.0 + floor, where};
}

}  // namespace

Hf4Result check_hf4(const IncidenceCallable& f, double v_hat, const SampleBox& box, int n) {
  if (!(v_hat > 0.0)) throw DomainError(fmt::format("v_hat must be positive (got {})", v_hat));
  box.validate();
  require_density(n);

  Hf4Result out;
  // Branch A: slopes in T must converge on every sampled row and at v_hat.
  std::vector<double> rows{v_hat};
  for (int j = 0; j < n; ++j) rows.push_back(sample(box.v_min, box.v_max, n, j));
  std::optional<std::pair<double, double>> kink;
  for (double V : rows) {
    const auto probe = probe_row(f, V, box, n);
    if (!probe.smooth) {
      kink = std::make_pair(probe.t_at, V);
      break;
    }
  }
  out.differentiable = !kink;
  const auto a_holds = [&] {
    out.verdict = {Verdict::holds, std::nullopt, "differentiable in T (finite-difference slopes converge)"};
    return out;
  };

  // Branch B: 1/f(T, v_hat) >= C1 + C2 / T with C1, C2 >= 0 from a nonnegative least-squares
  // fit. Always fitted so the constants are reported; it decides the verdict only after a kink.
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    const double T = sample(box.t_min, box.t_max, n, i);
    if (!(T > 0.0)) continue;
    const double fv = f(T, v_hat);
    if (!(fv > 0.0)) {
      if (!kink) return a_holds();
      out.verdict = verdict_fails(T, v_hat, "f(T, v_hat) <= 0, reciprocal bound undefined");
      return out;
    }
    xs.push_back(1.0 / T);
    ys.push_back(1.0 / fv);
  }
  if (xs.size() < 2) {
    if (!kink) return a_holds();
    out.verdict = verdict_fails(kink->first, kink->second, "kink in T and too few samples for the reciprocal bound");
    return out;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = m * sxx - sx * sx;
  double c1 = det != 0.0 ? (sxx * sy - sx * sxy) / det : sy / m;
  double c2 = det != 0.0 ? (m * sxy - sx * sy) / det : 0.0;
  if (c2 < 0.0) {
    c2 = 0.0;
    c1 = sy / m;
  }
  if (c1 < 0.0) {
    c1 = 0.0;
    c2 = sxy / sxx;
  }
  double ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double bound = c1 + c2 * xs[i];
    if (bound > 0.0) ratio = std::min(ratio, ys[i] / bound);
  }
  std::string note = "fitted";
  if (ratio < 1.0 - 1e-9) {
    c1 *= ratio;
    c2 *= ratio;
    note = fmt::format("fit tightened by {}", ratio);
  }
  out.c1 = c1;
  out.c2 = c2;
  if (!kink) return a_holds();
  if (!(c1 > 0.0 || c2 > 0.0)) {
    out.verdict = verdict_fails(kink->first, kink->second, "kink in T and only the trivial reciprocal bound");
    return out;
  }
  out.verdict = {Verdict::holds, std::nullopt,
                 fmt::format("not differentiable near T={}; 1/f(T,v_hat) >= {} + {}/T ({})", kink->first, c1, c2,
                             note)};
  return out;
}

Hf4Result check_hf4(const IncidenceFn& f, double v_hat, const SampleBox& box, int n) {
  return check_hf4(as_callable(f), v_hat, box, n);
}

HypothesisReport check_hypotheses(const IncidenceFn& f, std::optional<double> v_hat, const SampleBox& box, int n) {
  HypothesisReport r;
  r.sample_box = box;
  r.sample_density = n;
  r.v_hat = v_hat;
  r.hf1 = check_hf1(f, box, n);
  r.hf1_plus = check_hf1_plus(f, box, n);
  if (v_hat) {
    r.hf3 = check_hf3(f, *v_hat, box, n);
    r.hf4 = check_hf4(f, *v_hat, box, n);
  } else {
    r.hf3 = {Verdict::not_applicable, std::nullopt, "no interior equilibrium"};
    r.hf4.verdict = {Verdict::not_applicable, std::nullopt, "no interior equilibrium"};
  }
  return r;
}

SampleBox default_sample_box(const ModelParams& p, const IncidenceFn& f) {
  const double mu = f.effective_mu().value_or(1.0);
  const double v_bound = p.burst_n * p.lambda * mu * p.survival() / (p.d * p.c);
  return {0.0, 2.0 * p.lambda / p.d, 0.0, 2.0 * v_bound};
}

}  // namespace sddvir
