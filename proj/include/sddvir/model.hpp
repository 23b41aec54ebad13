#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace sddvir {

/// Scalar constants of the reaction-diffusion system.
struct ModelParams {
  double lambda = 10.0;   ///< production rate of susceptible cells
  double d = 0.1;         ///< susceptible death rate
  double delta = 0.5;     ///< infected death rate
  double burst_n = 10.0;  ///< virions released per infected cell
  double c = 5.0;         ///< virion clearance rate
  double omega = 0.0;     ///< intracellular death exponent
  double h_max = 1.0;     ///< maximal delay
  std::array<double, 3> diff{0.0, 0.0, 0.0};  ///< diffusion of T, T*, V

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  /// e^{-omega h}
  double survival() const;
};

enum class IncidenceKind { bilinear, saturated, beddington_deangelis, crowley_martin };

std::string_view to_string(IncidenceKind kind);
std::optional<IncidenceKind> parse_incidence_kind(std::string_view name);

/// Infection rate f(T, V). The four closed forms cover the usual functional responses:
///
///   bilinear              k T V
///   saturated             k T V / (1 + k2 V)
///   beddington_deangelis  k T V / (1 + k1 T + k2 V)
///   crowley_martin        k T V / ((1 + k1 T)(1 + k2 V))
///
/// `mu` is an optional user-supplied bound |f| <= mu |T|.
struct IncidenceFn {
  IncidenceKind kind = IncidenceKind::saturated;
  double k = 0.1;
  double k1 = 0.0;
  double k2 = 0.01;
  std::optional<double> mu;

  static IncidenceFn bilinear(double k);
  static IncidenceFn saturated(double k, double k2);
  static IncidenceFn beddington_deangelis(double k, double k1, double k2);
  static IncidenceFn crowley_martin(double k, double k1, double k2);

  void validate() const;

  /// Unchecked evaluation, used inside kernels.
  double value(double T, double V) const noexcept {
    const double num = k * T * V;
    switch (kind) {
      case IncidenceKind::bilinear:
        return num;
      case IncidenceKind::saturated:
        return num / (1.0 + k2 * V);
      case IncidenceKind::beddington_deangelis:
        return num / (1.0 + k1 * T + k2 * V);
      case IncidenceKind::crowley_martin:
        return num / ((1.0 + k1 * T) * (1.0 + k2 * V));
    }
    return 0.0;
  }

  /// Partial derivative in the first coordinate.
  double d_dT(double T, double V) const noexcept;

  /// Closed-form mu where one exists (all kinds except bilinear have mu = k/k2).
  std::optional<double> analytic_mu() const;

  /// User-supplied mu if present, otherwise the closed-form one.
  std::optional<double> effective_mu() const;
};

/// f(T, V) with domain checks; throws DomainError on negative input.
double eval_incidence(const IncidenceFn& f, double T, double V);

/// Generic two-argument function, so checkers also run on hand-built test functions.
using IncidenceCallable = std::function<double(double, double)>;

/// Sampled (T, V) rectangle.
struct SampleBox {
  double t_min = 0.0;
  double t_max = 1.0;
  double v_min = 0.0;
  double v_max = 1.0;

  void validate() const;
};

enum class Verdict { holds, fails, not_applicable };
std::string_view to_string(Verdict v);

struct HypothesisVerdict {
  Verdict verdict = Verdict::not_applicable;
  std::optional<std::pair<double, double>> witness;  ///< (T, V) where sampling found a violation
  std::string detail;

  bool holds() const { return verdict == Verdict::holds; }
};

struct Hf1Result {
  HypothesisVerdict verdict;
  std::optional<double> mu;
};

struct Hf4Result {
  HypothesisVerdict verdict;
  bool differentiable = false;       // branch A passed
  std::optional<double> c1, c2;      // reciprocal-bound constants when the fit was possible
};

struct HypothesisReport {
  Hf1Result hf1;
  HypothesisVerdict hf1_plus;
  HypothesisVerdict hf3;
  Hf4Result hf4;
  std::optional<double> v_hat;
  SampleBox sample_box;
  int sample_density = 0;

  bool theorem_hypotheses_hold() const {
    return hf1.verdict.holds() && hf1_plus.holds() && hf3.holds() && hf4.verdict.holds();
  }
};

/// Strictness threshold for the Hf3 product.
inline constexpr double kHf3Strict = 1e-12;

Hf1Result check_hf1(const IncidenceFn& f, const SampleBox& box, int n);
Hf1Result check_hf1(const IncidenceCallable& f, std::optional<double> mu, const SampleBox& box, int n);

HypothesisVerdict check_hf1_plus(const IncidenceFn& f, const SampleBox& box, int n);
HypothesisVerdict check_hf1_plus(const IncidenceCallable& f, const SampleBox& box, int n);

HypothesisVerdict check_hf3(const IncidenceFn& f, double v_hat, const SampleBox& box, int n);
HypothesisVerdict check_hf3(const IncidenceCallable& f, double v_hat, const SampleBox& box, int n);

Hf4Result check_hf4(const IncidenceFn& f, double v_hat, const SampleBox& box, int n);
Hf4Result check_hf4(const IncidenceCallable& f, double v_hat, const SampleBox& box, int n);

/// All four checks; Hf3/Hf4 are not_applicable when `v_hat` is empty.
HypothesisReport check_hypotheses(const IncidenceFn& f, std::optional<double> v_hat,
                                  const SampleBox& box, int n);

/// Default sampling box [0, 2 lambda/d] x [0, 2 V_bound], V_bound from the invariant box
/// (falls back to mu = 1 when f has no bound).
SampleBox default_sample_box(const ModelParams& p, const IncidenceFn& f);

}  // namespace sddvir
