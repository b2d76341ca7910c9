/**
 * @file io.hpp
 * @brief Deterministic JSON/CSV writers with provenance headers.
 */
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "qfl/config.hpp"
#include "qfl/errors.hpp"
#include "qfl/flow_sim.hpp"

namespace qfl {

using Json = nlohmann::ordered_json;

/// Real number with exactly 17 significant digits ("%.16e"); non-finite -> null.
[[nodiscard]] inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace detail {

inline void write_json(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_real(j.get<double>());
      return;
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(k).dump() + ": ";
        write_json(out, v, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        write_json(out, v, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Pretty JSON text in which every floating-point value has 17 significant digits.
[[nodiscard]] inline std::string format_json(const Json& j) {
  std::string out;
  detail::write_json(out, j, 0);
  out += "\n";
  return out;
}

/// {artifact, version, schema_version, config}.
[[nodiscard]] inline Json provenance(const RunConfig& cfg) {
  Json j;
  j["artifact"] = kArtifactName;
  j["version"] = kArtifactVersion;
  j["schema_version"] = kSchemaVersion;
  j["config"] = cfg.to_json();
  return j;
}

/// Wraps a payload with the provenance header: {schema_version, provenance, ...payload}.
[[nodiscard]] inline Json document(const RunConfig& cfg, const std::string& kind, const Json& payload) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["provenance"] = provenance(cfg);
  for (const auto& [k, v] : payload.items()) j[k] = v;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io_error", "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("io_error", "write failed for " + path.string());
}

/// CSV provenance header: comment lines echoing artifact, version and config.
[[nodiscard]] inline std::string csv_provenance(const RunConfig& cfg) {
  std::string out = std::string("# ") + kArtifactName + " " + kArtifactVersion +
                    " schema_version=" + std::to_string(kSchemaVersion) + "\n# config:";
  const Json echo = cfg.to_json();
  for (const auto& [k, v] : echo.items())
    out += " " + k + "=" + (v.is_number_float() ? format_real(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump());
  return out + "\n";
}

/// Trajectory rows: time,chart,x,y,px,py,H,F (F empty when not tracked).
[[nodiscard]] inline std::string trajectory_csv(const RunConfig& cfg, const Trajectory& tr) {
  std::string out = csv_provenance(cfg);
  out += "time,chart,x,y,px,py,H,F\n";
  for (const auto& s : tr.samples) {
    out += format_real(s.t) + "," + to_string(s.state.chart) + "," + format_real(s.state.x) + "," +
           format_real(s.state.y) + "," + format_real(s.state.px) + "," + format_real(s.state.py) + "," +
           format_real(s.H) + "," + (std::isfinite(s.F) ? format_real(s.F) : std::string()) + "\n";
  }
  return out;
}

[[nodiscard]] inline Json drift_json(const DriftStats& d, const Trajectory& tr) {
  Json j;
  j["quantity"] = d.quantity;
  j["initial"] = d.initial;
  j["max_abs_drift"] = d.max_abs_drift;
  j["relative_drift"] = d.relative();
  j["steps"] = tr.steps;
  j["switches"] = tr.switches;
  return j;
}

/// Drift summary of a trajectory: method, dt and one record per tracked quantity.
[[nodiscard]] inline Json drift_summary(const Trajectory& tr) {
  Json j;
  j["method"] = tr.method;
  j["dt"] = tr.dt;
  j["steps"] = tr.steps;
  j["switches"] = tr.switches;
  Json q = Json::array();
  q.push_back(drift_json(tr.H, tr));
  if (tr.F) q.push_back(drift_json(*tr.F, tr));
  q.push_back(drift_json(tr.px, tr));
  j["drift"] = q;
  return j;
}

}  // namespace qfl
