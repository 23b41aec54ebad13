#include "sddvir/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "sddvir/errors.hpp"

namespace sddvir {

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(errors.empty() ? "invalid configuration" : errors.front()), errors_(std::move(errors)) {}

std::optional<std::string> nearest_name(std::string_view word, const std::vector<std::string_view>& candidates) {
  const auto distance = [](std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        diag = up;
      }
    }
    return row[b.size()];
  };
  std::optional<std::string> best;
  std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
  for (auto c : candidates) {
    const std::size_t d = distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = std::string(c);
    }
  }
  return best;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

// Value errors thrown by the setters; the loader adds file and line.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw BadValue(fmt::format("'{}' is not a finite number", s));
  }
  return v;
}

long long to_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw BadValue(fmt::format("'{}' is not an integer", s));
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw BadValue(fmt::format("'{}' is not a boolean (true/false)", s));
}

std::vector<double> to_doubles(std::string_view s, std::size_t expected = 0) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(to_double(item));
  if (expected != 0 && out.size() != expected) {
    throw BadValue(fmt::format("expected {} comma-separated numbers, got {}", expected, out.size()));
  }
  return out;
}

double positive(std::string_view key, std::string_view s) {
  const double v = to_double(s);
  if (!(v > 0.0)) throw BadValue(fmt::format("{} must be positive (got {})", key, v));
  return v;
}

double nonnegative(std::string_view key, std::string_view s) {
  const double v = to_double(s);
  if (!(v >= 0.0)) throw BadValue(fmt::format("{} must be >= 0 (got {})", key, v));
  return v;
}

template <class E, class Parse>
E enum_value(std::string_view key, std::string_view s, Parse parse, std::string_view choices) {
  const auto v = parse(s);
  if (!v) throw BadValue(fmt::format("{} must be one of {} (got '{}')", key, choices, s));
  return *v;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

struct KeySpec {
  std::string_view name;
  Setter set;
  bool repeatable = false;
};

using Registry = std::map<std::string_view, std::vector<KeySpec>, std::less<>>;

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    r["params"] = {
        {"lambda", [](RunConfig& c, std::string_view v) { c.params.lambda = positive("lambda", v); }},
        {"d", [](RunConfig& c, std::string_view v) { c.params.d = positive("d", v); }},
        {"delta", [](RunConfig& c, std::string_view v) { c.params.delta = positive("delta", v); }},
        {"N", [](RunConfig& c, std::string_view v) { c.params.burst_n = positive("N", v); }},
        {"c", [](RunConfig& c, std::string_view v) { c.params.c = positive("c", v); }},
        {"omega", [](RunConfig& c, std::string_view v) { c.params.omega = nonnegative("omega", v); }},
        {"h", [](RunConfig& c, std::string_view v) { c.params.h_max = positive("h", v); }},
        {"d1", [](RunConfig& c, std::string_view v) { c.params.diff[0] = nonnegative("d1", v); }},
        {"d2", [](RunConfig& c, std::string_view v) { c.params.diff[1] = nonnegative("d2", v); }},
        {"d3", [](RunConfig& c, std::string_view v) { c.params.diff[2] = nonnegative("d3", v); }},
    };
    r["incidence"] = {
        {"kind",
         [](RunConfig& c, std::string_view v) {
           c.incidence.kind = enum_value<IncidenceKind>("kind", v, parse_incidence_kind,
                                                        "bilinear, saturated, beddington_deangelis, crowley_martin");
         }},
        {"k", [](RunConfig& c, std::string_view v) { c.incidence.k = nonnegative("k", v); }},
        {"k1", [](RunConfig& c, std::string_view v) { c.incidence.k1 = nonnegative("k1", v); }},
        {"k2", [](RunConfig& c, std::string_view v) { c.incidence.k2 = nonnegative("k2", v); }},
        {"mu", [](RunConfig& c, std::string_view v) { c.incidence.mu = positive("mu", v); }},
    };
    r["delay"] = {
        {"kind",
         [](RunConfig& c, std::string_view v) {
           c.delay.kind = enum_value<DelayKind>("kind", v, parse_delay_kind, "constant, integral, wrapped");
         }},
        {"eta", [](RunConfig& c, std::string_view v) { c.delay.eta_const = nonnegative("eta", v); }},
        {"xi_component",
         [](RunConfig& c, std::string_view v) {
           c.delay.xi.component = enum_value<Component>("xi_component", v, parse_component, "T, T_star, V");
         }},
        {"xi_scale", [](RunConfig& c, std::string_view v) { c.delay.xi.scale = to_double(v); }},
        {"kappa_decay", [](RunConfig& c, std::string_view v) { c.delay.kappa_decay = nonnegative("kappa_decay", v); }},
        {"rho",
         [](RunConfig& c, std::string_view v) {
           c.delay.rho = enum_value<RhoKind>("rho", v, parse_rho_kind, "smooth_clamp, rational");
         }},
    };
    r["grid"] = {
        {"x_min", [](RunConfig& c, std::string_view v) { c.grid.x_min = to_double(v); }},
        {"x_max", [](RunConfig& c, std::string_view v) { c.grid.x_max = to_double(v); }},
        {"nx",
         [](RunConfig& c, std::string_view v) {
           const long long n = to_integer(v);
           if (n < 3) throw BadValue(fmt::format("nx must be >= 3 (got {})", n));
           c.grid.nx = static_cast<std::size_t>(n);
         }},
    };
    r["time"] = {
        {"dt", [](RunConfig& c, std::string_view v) { c.solver.dt = positive("dt", v); }},
        {"t_end", [](RunConfig& c, std::string_view v) { c.solver.t_end = nonnegative("t_end", v); }},
        {"stepper",
         [](RunConfig& c, std::string_view v) {
           c.solver.stepper = enum_value<Stepper>("stepper", v, parse_stepper, "euler, rk4_frozen_lag");
         }},
        {"clip_negative", [](RunConfig& c, std::string_view v) { c.solver.clip_negative = to_bool(v); }},
        {"invariance_tol",
         [](RunConfig& c, std::string_view v) { c.solver.invariance_tol = nonnegative("invariance_tol", v); }},
        {"sample_every",
         [](RunConfig& c, std::string_view v) {
           const long long n = to_integer(v);
           if (n < 1) throw BadValue(fmt::format("sample_every must be >= 1 (got {})", n));
           c.solver.sample_every = static_cast<std::size_t>(n);
         }},
    };
    r["initial"] = {
        {"preset",
         [](RunConfig& c, std::string_view v) {
           c.initial.preset = enum_value<InitialPreset>("preset", v, parse_initial_preset,
                                                        "uniform, equilibrium_perturbation, gaussian_bump");
         }},
        {"T", [](RunConfig& c, std::string_view v) { c.initial.uniform_values[0] = nonnegative("T", v); }},
        {"T_star", [](RunConfig& c, std::string_view v) { c.initial.uniform_values[1] = nonnegative("T_star", v); }},
        {"V", [](RunConfig& c, std::string_view v) { c.initial.uniform_values[2] = nonnegative("V", v); }},
        {"amplitude", [](RunConfig& c, std::string_view v) { c.initial.amplitude = to_double(v); }},
        {"direction",
         [](RunConfig& c, std::string_view v) {
           const auto d = to_doubles(v, 3);
           c.initial.direction = {d[0], d[1], d[2]};
         }},
        {"bump_center", [](RunConfig& c, std::string_view v) { c.initial.bump_center = to_double(v); }},
        {"bump_width", [](RunConfig& c, std::string_view v) { c.initial.bump_width = positive("bump_width", v); }},
        {"profile",
         [](RunConfig& c, std::string_view v) {
           c.initial.profile = enum_value<HistoryProfile>("profile", v, parse_history_profile,
                                                          "constant_in_time, linear_ramp");
         }},
        {"ramp_rate", [](RunConfig& c, std::string_view v) { c.initial.ramp_rate = nonnegative("ramp_rate", v); }},
        {"require_omega_lip", [](RunConfig& c, std::string_view v) { c.initial.require_omega_lip = to_bool(v); }},
        {"reference",
         [](RunConfig& c, std::string_view v) {
           if (v == "none") c.reference = ReferenceChoice::none;
           else if (v == "trivial") c.reference = ReferenceChoice::trivial;
           else if (v == "interior") c.reference = ReferenceChoice::interior;
           else throw BadValue(fmt::format("reference must be one of none, trivial, interior (got '{}')", v));
         }},
    };
    r["schedule"] = {
        {"jump",
         [](RunConfig& c, std::string_view v) {
           const auto items = split_list(v);
           if (items.size() != 3) throw BadValue("jump needs 't, name, value'");
           c.schedule.jumps.push_back({to_double(items[0]), std::string(items[1]), to_double(items[2])});
         },
         true},
    };
    r["output"] = {
        {"dir", [](RunConfig& c, std::string_view v) { c.output.dir = std::filesystem::path(std::string(v)); }},
        {"probes",
         [](RunConfig& c, std::string_view v) {
           const long long n = to_integer(v);
           if (n < 1) throw BadValue(fmt::format("probes must be >= 1 (got {})", n));
           c.output.probes = static_cast<std::size_t>(n);
         }},
    };
    r["analysis"] = {
        {"subdivisions",
         [](RunConfig& c, std::string_view v) {
           const long long n = to_integer(v);
           if (n < 10) throw BadValue(fmt::format("subdivisions must be >= 10 (got {})", n));
           c.analysis.subdivisions = static_cast<int>(n);
         }},
        {"root_tol", [](RunConfig& c, std::string_view v) { c.analysis.root_tol = positive("root_tol", v); }},
        {"sample_density",
         [](RunConfig& c, std::string_view v) {
           const long long n = to_integer(v);
           if (n < 2) throw BadValue(fmt::format("sample_density must be >= 2 (got {})", n));
           c.analysis.sample_density = static_cast<int>(n);
         }},
        {"sample_box",
         [](RunConfig& c, std::string_view v) {
           const auto b = to_doubles(v, 4);
           SampleBox box{b[0], b[1], b[2], b[3]};
           try {
             box.validate();
           } catch (const DomainError& e) {
             throw BadValue(e.what());
           }
           c.analysis.sample_box = box;
         }},
        {"eps",
         [](RunConfig& c, std::string_view v) {
           auto e = to_doubles(v);
           for (double x : e) {
             if (!(x > 0.0)) throw BadValue(fmt::format("eps values must be positive (got {})", x));
           }
           c.analysis.eps = std::move(e);
         }},
        {"monitor_start",
         [](RunConfig& c, std::string_view v) { c.analysis.monitor_start = nonnegative("monitor_start", v); }},
        {"tol_decrease", [](RunConfig& c, std::string_view v) { c.analysis.tol_decrease = to_double(v); }},
        {"required_fraction",
         [](RunConfig& c, std::string_view v) {
           const double x = to_double(v);
           if (!(x > 0.0 && x <= 1.0)) throw BadValue(fmt::format("required_fraction must lie in (0, 1] (got {})", x));
           c.analysis.required_fraction = x;
         }},
        {"seed",
         [](RunConfig& c, std::string_view v) {
           std::uint64_t s = 0;
           const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
           if (ec != std::errc() || ptr != v.data() + v.size()) throw BadValue(fmt::format("'{}' is not a u64", v));
           c.seed = s;
         }},
    };
    return r;
  }();
  return reg;
}

constexpr std::array<std::string_view, 2> kRequiredSections{"params", "incidence"};

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::vector<std::string> errors;
  const Registry& reg = registry();
  std::vector<std::string_view> section_names;
  for (const auto& [name, _] : reg) section_names.push_back(name);

  std::map<std::string, std::size_t, std::less<>> section_line;
  std::set<std::pair<std::string, std::string>> seen;
  const std::vector<KeySpec>* current = nullptr;
  std::string current_name;

  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto where = [&] { return fmt::format("{}:{}", origin, line_no); };
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(fmt::format("{}: malformed section header '{}'", where(), line));
        current = nullptr;
        continue;
      }
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      current_name = std::string(name);
      if (section_line.count(name) != 0) {
        errors.push_back(fmt::format("{}: section [{}] appears twice", where(), name));
      }
      section_line.emplace(current_name, line_no);
      const auto it = reg.find(name);
      if (it == reg.end()) {
        const auto hint = nearest_name(name, section_names);
        errors.push_back(fmt::format("{}: unknown section [{}]{}", where(), name,
                                     hint ? fmt::format(" (did you mean [{}]?)", *hint) : ""));
        current = nullptr;
      } else {
        current = &it->second;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(fmt::format("{}: expected 'key = value', got '{}'", where(), line));
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (current_name.empty()) {
      errors.push_back(fmt::format("{}: key '{}' appears before any section", where(), key));
      continue;
    }
    if (current == nullptr) continue;  // unknown section, already reported

    const auto spec = std::find_if(current->begin(), current->end(), [&](const KeySpec& k) { return k.name == key; });
    if (spec == current->end()) {
      std::vector<std::string_view> names;
      for (const auto& k : *current) names.push_back(k.name);
      const auto hint = nearest_name(key, names);
      errors.push_back(fmt::format("{}: unknown key '{}' in [{}]{}", where(), key, current_name,
                                   hint ? fmt::format(" (did you mean '{}'?)", *hint) : ""));
      continue;
    }
    if (!spec->repeatable && !seen.emplace(current_name, std::string(key)).second) {
      errors.push_back(fmt::format("{}: key '{}' set twice in [{}]", where(), key, current_name));
      continue;
    }
    if (value.empty()) {
      errors.push_back(fmt::format("{}: key '{}' has no value", where(), key));
      continue;
    }
    try {
      spec->set(cfg, value);
    } catch (const std::exception& e) {
      errors.push_back(fmt::format("{}: [{}] {}: {}", where(), current_name, key, e.what()));
    }
  }

  for (auto name : kRequiredSections) {
    if (section_line.count(name) == 0) errors.push_back(fmt::format("{}: missing section [{}]", origin, name));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));

  // Cross-field checks, attributed to the section that owns them.
  const auto check = [&](std::string_view section, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      const auto it = section_line.find(section);
      const std::string at =
          it != section_line.end() ? fmt::format("{}:{}", origin, it->second) : std::string(origin);
      errors.push_back(fmt::format("{}: [{}] {}", at, section, e.what()));
    }
  };
  cfg.delay.h_max = cfg.params.h_max;
  check("params", [&] { cfg.params.validate(); });
  check("incidence", [&] { cfg.incidence.validate(); });
  check("delay", [&] {
    if (cfg.delay.kind == DelayKind::constant && cfg.delay.eta_const > cfg.params.h_max) {
      throw DomainError(fmt::format("eta = {} exceeds h = {}", cfg.delay.eta_const, cfg.params.h_max));
    }
    cfg.delay.validate();
  });
  check("grid", [&] { (void)cfg.grid.build(); });
  check("time", [&] { cfg.solver.validate(); });
  check("initial", [&] {
    InitialData probe = cfg.initial;
    if (probe.preset == InitialPreset::equilibrium_perturbation) {
      if (cfg.reference == ReferenceChoice::none) {
        throw DomainError("equilibrium_perturbation needs reference = trivial or interior");
      }
      probe.reference = Equilibrium{};
    }
    probe.validate(cfg.params.h_max);
  });
  check("schedule", [&] { cfg.schedule.validate(cfg.solver.t_end); });
  check("output", [&] {
    if (cfg.output.probes > cfg.grid.nx) {
      throw DomainError(fmt::format("probes = {} exceeds nx = {}", cfg.output.probes, cfg.grid.nx));
    }
  });
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({fmt::format("{}: cannot open config file", path.string())});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace sddvir
