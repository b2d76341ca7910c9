/**
 * @file config.hpp
 * @brief Run configuration: flat `key = value` text, validation, defaults.
 */
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "json.hpp"
#include "qfl/errors.hpp"

namespace qfl {

inline constexpr const char* kArtifactName = "qfl";
inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class Command { ODE, VERIFY, METRIC, INTEGRAL, FLOW, REPORT };
enum class OutputFormat { CSV, JSON };
/// Which system(s) `flow` integrates.
enum class FlowSystem { ALL, FAM1, S1, S2 };

inline constexpr std::array<std::pair<Command, const char*>, 6> kCommandNames{{
    {Command::ODE, "ode"},
    {Command::VERIFY, "verify"},
    {Command::METRIC, "metric"},
    {Command::INTEGRAL, "integral"},
    {Command::FLOW, "flow"},
    {Command::REPORT, "report"},
}};

inline constexpr std::array<std::pair<FlowSystem, const char*>, 4> kFlowSystemNames{{
    {FlowSystem::ALL, "all"},
    {FlowSystem::FAM1, "fam1"},
    {FlowSystem::S1, "s1"},
    {FlowSystem::S2, "s2"},
}};

[[nodiscard]] inline const char* to_string(Command c) {
  for (const auto& [k, n] : kCommandNames)
    if (k == c) return n;
  return "?";
}
[[nodiscard]] inline const char* to_string(OutputFormat f) { return f == OutputFormat::CSV ? "csv" : "json"; }
[[nodiscard]] inline const char* to_string(FlowSystem s) {
  for (const auto& [k, n] : kFlowSystemNames)
    if (k == s) return n;
  return "?";
}

/**
 * @brief Validated run configuration.
 *
 * `p` is the S2 / fam2 parameter; its default 1 equals p0 + 1 because the
 * computed p0 vanishes (see compute_p0). An empty output_dir means
 * "use $QFL_OUT_DIR, else ./qfl_out".
 */
struct RunConfig {
  Command command = Command::REPORT;
  double y_max = 8.0;
  double tol = 1e-10;
  double c = 1.0;
  double d1 = 0.0;
  double p = 1.0;
  double E = 1.0;
  double T = 100.0;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  std::string output_dir;
  OutputFormat format = OutputFormat::JSON;
  FlowSystem system = FlowSystem::ALL;

  /// Echo of every key, for provenance headers.
  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = to_string(command);
    j["y_max"] = y_max;
    j["tol"] = tol;
    j["c"] = c;
    j["d1"] = d1;
    j["p"] = p;
    j["E"] = E;
    j["T"] = T;
    j["dt"] = dt;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["format"] = to_string(format);
    j["system"] = to_string(system);
    return j;
  }
};

inline constexpr std::array<const char*, 13> kConfigKeys{
    "command", "y_max", "tol", "c", "d1", "p", "E", "T", "dt", "seed", "output_dir", "format", "system"};

namespace detail {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[nodiscard]] inline double parse_real(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "malformed real value '" + std::string(v) + "'");
  return out;
}

[[nodiscard]] inline std::uint64_t parse_uint(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key, "malformed unsigned integer '" + std::string(v) + "'");
  return out;
}

template <class E, std::size_t N>
[[nodiscard]] E parse_enum(const std::string& key, std::string_view v,
                           const std::array<std::pair<E, const char*>, N>& names) {
  for (const auto& [k, n] : names)
    if (v == n) return k;
  std::string allowed;
  for (const auto& [k, n] : names) allowed += std::string(allowed.empty() ? "" : "|") + n;
  throw ConfigError(key, "unknown value '" + std::string(v) + "' (expected " + allowed + ")");
}

}  // namespace detail

/// Sets one key from its textual value; unknown keys and malformed values throw.
inline void apply_setting(RunConfig& cfg, const std::string& key, std::string_view value) {
  value = detail::trim(value);
  if (key == "command") {
    cfg.command = detail::parse_enum(key, value, kCommandNames);
  } else if (key == "y_max") {
    cfg.y_max = detail::parse_real(key, value);
  } else if (key == "tol") {
    cfg.tol = detail::parse_real(key, value);
  } else if (key == "c") {
    cfg.c = detail::parse_real(key, value);
  } else if (key == "d1") {
    cfg.d1 = detail::parse_real(key, value);
  } else if (key == "p") {
    cfg.p = detail::parse_real(key, value);
  } else if (key == "E") {
    cfg.E = detail::parse_real(key, value);
  } else if (key == "T") {
    cfg.T = detail::parse_real(key, value);
  } else if (key == "dt") {
    cfg.dt = detail::parse_real(key, value);
  } else if (key == "seed") {
    cfg.seed = detail::parse_uint(key, value);
  } else if (key == "output_dir") {
    if (value.empty()) throw ConfigError(key, "empty path");
    cfg.output_dir = std::string(value);
  } else if (key == "format") {
    static constexpr std::array<std::pair<OutputFormat, const char*>, 2> names{
        {{OutputFormat::CSV, "csv"}, {OutputFormat::JSON, "json"}}};
    cfg.format = detail::parse_enum(key, value, names);
  } else if (key == "system") {
    cfg.system = detail::parse_enum(key, value, kFlowSystemNames);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

/**
 * Checks every numeric field against the preconditions of the operation it
 * feeds (solve_psi, the family builders, build_natural, integrate_flow).
 */
inline void validate(const RunConfig& cfg) {
  if (!(cfg.y_max >= 6.0 && cfg.y_max <= 12.0))
    throw ConfigError("y_max", "must lie in [6, 12] (p0 needs the tail beyond y = 6)");
  if (!(cfg.tol > 1e-14 && cfg.tol < 1e-4)) throw ConfigError("tol", "must lie in (1e-14, 1e-4)");
  if (!(cfg.c > 0.0)) throw ConfigError("c", "must be positive");
  if (!(std::abs(cfg.d1) <= 1e3)) throw ConfigError("d1", "must satisfy |d1| <= 1e3");
  if (!(cfg.p > 0.0)) throw ConfigError("p", "must exceed p0 = 0");
  if (!(cfg.E > 0.0)) throw ConfigError("E", "must be positive");
  if (!(cfg.T > 0.0 && cfg.T <= 1e4)) throw ConfigError("T", "must lie in (0, 1e4]");
  if (!(cfg.dt > 0.0 && cfg.dt <= 1e-2)) throw ConfigError("dt", "must lie in (0, 1e-2]");
  if (cfg.T / cfg.dt > 1e8) throw ConfigError("T", "T/dt exceeds 1e8 steps");
}

/**
 * Parses flat `key = value` text (one pair per line, `#` starts a comment)
 * over the defaults and validates the result. Repeated keys are rejected.
 */
[[nodiscard]] inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string seen = "|";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto h = l.find('#'); h != std::string_view::npos) l = l.substr(0, h);
    l = detail::trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key(detail::trim(l.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "missing key");
    if (seen.find("|" + key + "|") != std::string::npos) throw ConfigError(key, "repeated key");
    seen += key + "|";
    apply_setting(base, key, l.substr(eq + 1));
  }
  validate(base);
  return base;
}

/// output_dir, else $QFL_OUT_DIR, else ./qfl_out.
[[nodiscard]] inline std::string resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("QFL_OUT_DIR"); env && *env) return env;
  return "qfl_out";
}

}  // namespace qfl
