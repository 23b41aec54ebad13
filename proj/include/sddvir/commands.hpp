#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sddvir/config.hpp"

namespace sddvir {

/// Output directory or file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `content` to dir/name through a temporary file and a rename, so readers never
/// see a half-written file.
void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Node indices of `count` equispaced probes.
std::vector<std::size_t> probe_nodes(std::size_t nx, std::size_t count);

/// The perturbation reference resolved from cfg.reference; empty for reference = none.
std::optional<Equilibrium> resolve_reference(const RunConfig& cfg);

/// Each command returns the process exit code (0 ok, 2 runtime failure) and writes a short
/// human summary to `log`.
int cmd_equilibria(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_check_hypotheses(const RunConfig& cfg, std::ostream& log);
int cmd_certify(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace sddvir
