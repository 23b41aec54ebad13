#include "sddvir/commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <system_error>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sddvir/equilibria.hpp"
#include "sddvir/errors.hpp"
#include "sddvir/lyapunov.hpp"

namespace sddvir {

namespace fs = std::filesystem;

void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(),
                              ec ? ec.message() : "not a directory"));
  }
  const fs::path target = dir / name;
  const fs::path tmp = dir / ("." + name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into '{}'", target.string()));
  }
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::size_t> probe_nodes(std::size_t nx, std::size_t count) {
  if (count == 0 || nx == 0) return {};
  if (count == 1) return {(nx - 1) / 2};
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back((j * (nx - 1) + (count - 1) / 2) / (count - 1));
  }
  return out;
}

namespace {

std::vector<Equilibrium> equilibria_of(const RunConfig& cfg) {
  return find_equilibria(cfg.params, cfg.incidence, cfg.analysis.subdivisions, cfg.analysis.root_tol);
}

SampleBox sample_box_of(const RunConfig& cfg) {
  return cfg.analysis.sample_box.value_or(default_sample_box(cfg.params, cfg.incidence));
}

std::string describe(const HypothesisVerdict& v) {
  std::string s(to_string(v.verdict));
  if (v.witness) s += fmt::format(" at (T, V) = ({}, {})", v.witness->first, v.witness->second);
  if (!v.detail.empty()) s += fmt::format(" ({})", v.detail);
  return s;
}

void print_report(const HypothesisReport& r, std::ostream& log) {
  log << fmt::format("  sample box T in [{}, {}], V in [{}, {}], {} points per axis\n", r.sample_box.t_min,
                     r.sample_box.t_max, r.sample_box.v_min, r.sample_box.v_max, r.sample_density);
  log << fmt::format("  Hf1   {}{}\n", describe(r.hf1.verdict), r.hf1.mu ? fmt::format(", mu = {}", *r.hf1.mu) : "");
  log << fmt::format("  Hf1+  {}\n", describe(r.hf1_plus));
  log << fmt::format("  Hf3   {}\n", describe(r.hf3));
  std::string hf4_extra;
  if (r.hf4.c1 && r.hf4.c2) hf4_extra = fmt::format(", 1/f(T, v_hat) >= {:.6g} + {:.6g}/T", *r.hf4.c1, *r.hf4.c2);
  log << fmt::format("  Hf4   {}{}\n", describe(r.hf4.verdict), hf4_extra);
}

}  // namespace

std::optional<Equilibrium> resolve_reference(const RunConfig& cfg) {
  switch (cfg.reference) {
    case ReferenceChoice::none: return std::nullopt;
    case ReferenceChoice::trivial: return trivial_equilibrium(cfg.params);
    case ReferenceChoice::interior: {
      for (const auto& e : equilibria_of(cfg)) {
        if (e.kind == EquilibriumKind::interior) return e;
      }
      if (cfg.initial.preset == InitialPreset::uniform) return std::nullopt;
      throw DomainError("reference = interior, but the model has no interior equilibrium");
    }
  }
  return std::nullopt;
}

int cmd_equilibria(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto eqs = equilibria_of(cfg);
  std::string csv = "kind,T_hat,T_star_hat,V_hat,residual\n";
  for (const auto& e : eqs) {
    csv += fmt::format("{},{},{},{},{}\n", to_string(e.kind), format_double(e.T_hat), format_double(e.T_star_hat),
                       format_double(e.V_hat), format_double(e.residual));
    log << fmt::format("{:<9} T = {:.10g}, T* = {:.10g}, V = {:.10g} (residual {:.2e}){}\n", to_string(e.kind), e.T_hat,
                       e.T_star_hat, e.V_hat, e.residual, e.degenerate ? " [degenerate]" : "");
  }
  if (eqs.size() == 1) log << "only the infection-free equilibrium exists\n";
  write_atomic(out_dir, "equilibria.csv", csv);
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const Grid1D grid = cfg.grid.build();
  InitialData init = cfg.initial;
  if (init.preset != InitialPreset::uniform) init.reference = resolve_reference(cfg);

  const auto start = std::chrono::steady_clock::now();
  const Trajectory traj = run(grid, init, cfg.params, cfg.incidence, cfg.delay, cfg.solver, cfg.schedule);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto probes = probe_nodes(grid.nx(), cfg.output.probes);
  std::string csv = "t";
  for (auto i : probes) csv += fmt::format(",T_{0},T_star_{0},V_{0}", i);
  csv += ",eta,eta_rate,box_violation\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const FieldState& s = traj.states[r];
    const SampleDiagnostics& d = traj.diagnostics[r];
    csv += format_double(traj.times[r]);
    for (auto i : probes) {
      csv += fmt::format(",{},{},{}", format_double(s.T[i]), format_double(s.T_star[i]), format_double(s.V[i]));
    }
    csv += fmt::format(",{},{},{}\n", format_double(d.eta), format_double(d.eta_rate), d.box_violation);
  }

  nlohmann::json summary = {
      {"record", "summary"},
      {"t_final", traj.times.empty() ? 0.0 : traj.times.back()},
      {"steps", traj.steps},
      {"samples", traj.times.size()},
      {"violation_steps", traj.violation_steps},
      {"clipped_entries", traj.clipped_entries},
      {"compatibility_residual", traj.compatibility_residual},
      {"wall_time_s", wall},
  };
  if (!traj.states.empty()) {
    const FieldState& last = traj.states.back();
    summary["final_max"] = {{"T", last.T.max_abs()}, {"T_star", last.T_star.max_abs()}, {"V", last.V.max_abs()}};
    summary["final_mean"] = {{"T", last.T.mean()}, {"T_star", last.T_star.mean()}, {"V", last.V.mean()}};
  }
  std::string jsonl = summary.dump() + "\n";
  if (traj.abort) {
    jsonl += nlohmann::json{{"record", "abort"},
                            {"last_good_time", traj.abort->last_good_time},
                            {"message", traj.abort->message}}
                 .dump() +
             "\n";
  }

  write_atomic(out_dir, "trajectory.csv", csv);
  write_atomic(out_dir, "summary.jsonl", jsonl);
  log << fmt::format("{} steps, {} samples, {} box violations, wall {:.3f} s\n", traj.steps, traj.times.size(),
                     traj.violation_steps, wall);
  if (traj.abort) {
    log << fmt::format("aborted after t = {}: {}\n", traj.abort->last_good_time, traj.abort->message);
    return 2;
  }
  return 0;
}

int cmd_check_hypotheses(const RunConfig& cfg, std::ostream& log) {
  const SampleBox box = sample_box_of(cfg);
  const auto eqs = equilibria_of(cfg);
  bool any_interior = false;
  for (std::size_t id = 0; id < eqs.size(); ++id) {
    if (eqs[id].kind != EquilibriumKind::interior) continue;
    any_interior = true;
    log << fmt::format("equilibrium {} (T = {:.10g}, T* = {:.10g}, V = {:.10g})\n", id, eqs[id].T_hat,
                       eqs[id].T_star_hat, eqs[id].V_hat);
    const auto report = check_hypotheses(cfg.incidence, eqs[id].V_hat, box, cfg.analysis.sample_density);
    print_report(report, log);
    log << (report.theorem_hypotheses_hold() ? "  all stability hypotheses hold\n"
                                             : "  outside theorem hypotheses\n");
  }
  if (!any_interior) {
    log << "no interior equilibrium; checking the V-independent hypotheses only\n";
    print_report(check_hypotheses(cfg.incidence, std::nullopt, box, cfg.analysis.sample_density), log);
  }
  return 0;
}

int cmd_certify(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const Grid1D grid = cfg.grid.build();
  const SampleBox box = sample_box_of(cfg);
  const auto eqs = equilibria_of(cfg);

  CertifyOptions opts;
  opts.eps = cfg.analysis.eps;
  opts.directions = default_directions(cfg.seed, grid);
  opts.monitor_start = cfg.analysis.monitor_start;
  opts.tol_decrease = cfg.analysis.tol_decrease;
  opts.required_fraction = cfg.analysis.required_fraction;

  std::string csv = "equilibrium_id,eps,decrease_fraction,max_eta_rate,S_over_D_ratio,verdict,hypotheses\n";
  bool any_interior = false;
  for (std::size_t id = 0; id < eqs.size(); ++id) {
    const Equilibrium& eq = eqs[id];
    if (eq.kind != EquilibriumKind::interior) continue;
    any_interior = true;
    const auto report = check_hypotheses(cfg.incidence, eq.V_hat, box, cfg.analysis.sample_density);
    const bool inside = report.theorem_hypotheses_hold();
    log << fmt::format("equilibrium {} (T = {:.10g}, T* = {:.10g}, V = {:.10g})\n", id, eq.T_hat, eq.T_star_hat,
                       eq.V_hat);
    if (!inside) {
      spdlog::warn("equilibrium {}: outside theorem hypotheses", id);
      log << "  warning: outside theorem hypotheses\n";
      print_report(report, log);
    }
    const auto verdicts = certify_local_stability(eq, grid, cfg.params, cfg.incidence, cfg.delay, cfg.solver, opts);
    for (const auto& v : verdicts) {
      csv += fmt::format("{},{},{},{},{},{},{}\n", id, format_double(v.eps), format_double(v.decrease_fraction),
                         format_double(v.max_eta_rate), format_double(v.s_over_d), to_string(v.label),
                         inside ? "hold" : "outside theorem hypotheses");
      log << fmt::format("  eps = {:<8g} {:<22} decrease fraction {:.4f}, distance {:.3e} -> {:.3e}, "
                         "max|eta'| {:.3e}, max|S|/D {:.3e}\n",
                         v.eps, to_string(v.label), v.decrease_fraction, v.initial_distance, v.terminal_distance,
                         v.max_eta_rate, v.s_over_d);
    }
  }
  if (!any_interior) log << "no interior equilibrium: nothing to certify\n";
  write_atomic(out_dir, "certify.csv", csv);
  return 0;
}

}  // namespace sddvir
