#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sddvir/history.hpp"
#include "sddvir/lyapunov.hpp"
#include "sddvir/model.hpp"
#include "sddvir/solver.hpp"

namespace sddvir {

struct GridConfig {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t nx = 101;

  Grid1D build() const { return Grid1D(x_min, x_max, nx); }
};

/// Which equilibrium the perturbation presets start from.
enum class ReferenceChoice { none, trivial, interior };

struct OutputConfig {
  std::filesystem::path dir = "out";
  std::size_t probes = 5;
};

/// Knobs of the analysis commands (equilibria, check-hypotheses, certify).
struct AnalysisConfig {
  int subdivisions = 1000;
  double root_tol = 1e-10;
  int sample_density = 101;
  std::optional<SampleBox> sample_box;
  std::vector<double> eps{0.05};
  std::optional<double> monitor_start;
  double tol_decrease = 1e-8;
  double required_fraction = 0.99;
};

struct RunConfig {
  ModelParams params;
  IncidenceFn incidence;
  DelayFunctional delay;
  GridConfig grid;
  SolverConfig solver;
  InitialData initial;
  ReferenceChoice reference = ReferenceChoice::interior;
  ParamSchedule schedule;
  OutputConfig output;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
};

/// Every problem found while loading, one message per entry ("file:line: ...").
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses INI-style text. `origin` prefixes error messages. Throws ConfigError listing
/// all errors, not only the first.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Closest candidate by edit distance, if it is close enough to be a plausible typo.
std::optional<std::string> nearest_name(std::string_view word, const std::vector<std::string_view>& candidates);

}  // namespace sddvir
