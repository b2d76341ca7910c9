/**
 * @file pipeline.hpp
 * @brief The `qfl` subcommands: each writes its artifacts into the output directory.
 */
#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "qfl/acceptance.hpp"
#include "qfl/io.hpp"
#include "qfl/lab.hpp"

namespace qfl {

namespace fs = std::filesystem;

/// Files written by one subcommand.
struct RunOutput {
  std::vector<fs::path> files;
  bool all_pass = true;  // only `report` can fail a run without throwing
};

namespace detail {

inline fs::path write_document(const RunConfig& cfg, RunOutput& out, const std::string& name,
                               const std::string& kind, const Json& payload) {
  const fs::path p = fs::path(resolve_output_dir(cfg)) / name;
  write_text(p, format_json(document(cfg, kind, payload)));
  out.files.push_back(p);
  return p;
}

/// Rows of named columns as CSV (with provenance) or as a JSON document.
inline void write_table(const RunConfig& cfg, RunOutput& out, const std::string& stem, const std::string& kind,
                        const std::vector<std::string>& columns, const std::vector<std::vector<Json>>& rows) {
  if (cfg.format == OutputFormat::CSV) {
    std::string text = csv_provenance(cfg);
    for (std::size_t i = 0; i < columns.size(); ++i) text += (i ? "," : "") + columns[i];
    text += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) text += ",";
        if (r[i].is_number_float()) text += format_real(r[i].get<double>());
        else if (r[i].is_string()) text += r[i].get<std::string>();
        else if (!r[i].is_null()) text += r[i].dump();
      }
      text += "\n";
    }
    const fs::path p = fs::path(resolve_output_dir(cfg)) / (stem + ".csv");
    write_text(p, text);
    out.files.push_back(p);
  } else {
    Json j;
    j["columns"] = columns;
    Json data = Json::array();
    for (const auto& r : rows) data.push_back(Json(r));
    j["rows"] = data;
    write_document(cfg, out, stem + ".json", kind, j);
  }
}

}  // namespace detail

/// psi table on y = k/100 (|y| <= y_max) and the comparison with the derived oracles.
inline RunOutput run_ode(Lab& lab) {
  const RunConfig& cfg = lab.config();
  const PsiSolution& s = lab.psi();
  RunOutput out;
  std::vector<std::vector<Json>> rows;
  const int n = static_cast<int>(std::floor(cfg.y_max * 100.0 + 1e-9));
  double res = 0.0;
  for (int i = -n; i <= n; ++i) {
    const double y = i / 100.0;
    const double r = s.first_integral_residual(y);
    res = std::max(res, std::abs(r));
    rows.push_back({y, s.psi(y), s.dpsi(y), s.ddpsi(y), r});
  }
  detail::write_table(cfg, out, "psi_table", "psi_table", {"y", "psi", "dpsi", "ddpsi", "first_integral_residual"},
                      rows);

  Json rep;
  rep["nodes"] = s.nodes().size();
  rep["interpolant_order"] = s.interpolant_order();
  rep["first_integral_max_residual"] = res;
  double inv = 0.0;
  for (int i = 1; i <= static_cast<int>(cfg.y_max * 10.0); ++i)
    inv = std::max(inv, std::abs(closed_form_y(s.psi(i * 0.1)) - i * 0.1));
  rep["inverse_quadrature_max_error"] = inv;
  rep["y_at_psi_1"] = closed_form_y(1.0);
  const AsymptoticData& a = lab.asymptotics();
  rep["nu0"] = a.nu0;
  rep["log_nu0"] = std::log(a.nu0);
  rep["log_nu0_from_inverse"] = log_nu0_from_inverse();
  rep["mu0"] = a.mu0;
  rep["mu0_expected"] = -1.0 / (2.0 * a.nu0);
  rep["M1"] = a.M1;
  rep["M2"] = a.M2;
  rep["p0"] = a.p0;
  detail::write_document(cfg, out, "ode_report.json", "ode_report", rep);
  return out;
}

/// Phase-plane analysis, root scan of psi'' - psi and the closed-form inverse check.
inline RunOutput run_verify(Lab& lab) {
  RunOutput out;
  const PhaseAnalysisReport ph = verify_phase_analysis(lab.psi());
  Json rep;
  Json p;
  p["eigenvalues"] = {ph.eigenvalues[0], ph.eigenvalues[1]};
  p["linearization"] = ph.linearization;
  p["g_residual_max"] = ph.g_residual_max;
  p["orbit_residual_max"] = ph.orbit_residual_max;
  p["ode_residual_max"] = ph.ode_residual_max;
  p["ode_at_zero"] = ph.ode_at_zero;
  rep["phase_analysis"] = p;
  rep["curvature_gap_roots"] = potential_root_scan(lab.psi());
  const InverseFormulaReport inv = hadeler_inverse_check(lab.psi(), acceptance::inverse_grid(lab.psi()));
  Json h;
  h["max_derivative_deviation"] = inv.max_derivative_deviation;
  h["offset"] = inv.offset;
  h["offset_spread"] = inv.offset_spread;
  h["strictly_increasing"] = inv.strictly_increasing;
  h["samples"] = inv.samples;
  rep["closed_form_inverse"] = h;
  detail::write_document(lab.config(), out, "verify_report.json", "verify_report", rep);
  return out;
}

/// Lambda grids of fam1/fam2, curvature samples and natural-system data.
inline RunOutput run_metric(Lab& lab) {
  const RunConfig& cfg = lab.config();
  RunOutput out;
  std::vector<std::vector<Json>> grid, curv;
  for (const ConformalMetric* m : {&lab.fam1(), &lab.fam2()})
    for (int j = 0; j <= 60; ++j)
      for (int i = 0; i < 64; ++i) {
        const double x = 2.0 * std::numbers::pi * i / 64.0, y = -3.0 + 0.1 * j;
        grid.push_back({m->name(), x, y, m->lambda(x, y)});
        if (i % 8 == 0 && j % 5 == 0) curv.push_back({m->name(), x, y, gauss_curvature(*m, x, y)});
      }
  detail::write_table(cfg, out, "metric_lambda", "metric_lambda", {"family", "x", "y", "Lambda"}, grid);
  detail::write_table(cfg, out, "metric_curvature", "metric_curvature", {"family", "x", "y", "K"}, curv);

  Json rep;
  rep["fam1"] = lab.fam1().descriptor();
  rep["fam2"] = lab.fam2().descriptor();
  rep["fam1_probe_min"] = lab.fam1().probe_min();
  rep["fam2_probe_min"] = lab.fam2().probe_min();
  const auto w = nontriviality_witness(lab.fam1());
  rep["fam1_nontrivial"] = w.has_value();
  rep["fam2_nontrivial"] = nontriviality_witness(lab.fam2()).has_value();
  const PotentialMax v = max_potential(lab.s1());
  rep["s1_max_V"] = v.value;
  rep["s1_max_V_at"] = {v.x, v.y};
  rep["p0"] = lab.p0();
  rep["s2"] = lab.s2().descriptor();
  Json probes;
  for (const NaturalSystem* sys : {&lab.s1(), &lab.s2()})
    for (Chart ch : {Chart::NORTH, Chart::SOUTH}) {
      const StencilProbe pr = plane_c2_probe(*sys, ch);
      Json j;
      j["kinetic"] = pr.kinetic;
      j["potential"] = pr.potential;
      probes[std::string(sys->variant == Variant::S1 ? "s1_" : "s2_") + to_string(ch)] = j;
    }
  rep["plane_c2_probe"] = probes;
  detail::write_document(cfg, out, "metric_report.json", "metric_report", rep);
  return out;
}

/// Criterion residual grids, loop residuals and the bracket scans of both families.
inline RunOutput run_integral(Lab& lab) {
  const RunConfig& cfg = lab.config();
  RunOutput out;
  std::vector<std::vector<Json>> rows;
  for (const ConformalMetric* m : {&lab.fam1(), &lab.fam2()})
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        const double x = 2.0 * std::numbers::pi * i / 16.0, y = -3.0 + 6.0 * j / 15.0;
        rows.push_back({m->name(), x, y, pde_residual(*m->ansatz(), x, y)});
      }
  detail::write_table(cfg, out, "pde_residual_grid", "pde_residual_grid", {"family", "x", "y", "residual"}, rows);

  Json rep;
  for (const QuarticIntegral* F : {&lab.quartic1(), &lab.quartic2()}) {
    Json j;
    j["metric"] = F->metric().descriptor();
    j["criterion_max"] = F->criterion_max();
    j["loop_residual"] = F->loop_residual();
    const auto scan = bracket_scan(*F, 100, cfg.seed);
    j["bracket_max"] = acceptance::max_abs_bracket(scan);
    j["killing_max"] = acceptance::max_killing(*F);
    Json samples = Json::array();
    for (const auto& b : scan) samples.push_back({b.state.x, b.state.y, b.state.px, b.state.py, b.bracket});
    j["bracket_samples"] = samples;
    rep[F->metric().name()] = j;
  }
  detail::write_document(cfg, out, "integral_report.json", "integral_report", rep);
  return out;
}

/**
 * Trajectories and drift summaries. fam1 is the geodesic flow (F tracked);
 * S1/S2 are natural flows at energy E with F_E from the Jacobi metric. When
 * E <= max V the Jacobi metric degenerates on the Hill boundary: the run is
 * flagged and F_E is not tracked.
 */
inline RunOutput run_flow(Lab& lab) {
  const RunConfig& cfg = lab.config();
  RunOutput out;
  Json rep;
  const auto emit = [&](const std::string& name, const Trajectory& tr, Json info) {
    if (cfg.format == OutputFormat::CSV) {
      const fs::path p = fs::path(resolve_output_dir(cfg)) / ("trajectory_" + name + ".csv");
      write_text(p, trajectory_csv(cfg, tr));
      out.files.push_back(p);
    } else {
      Json rows = Json::array();
      for (const auto& s : tr.samples)
        rows.push_back({s.t, to_string(s.state.chart), s.state.x, s.state.y, s.state.px, s.state.py, s.H,
                        std::isfinite(s.F) ? Json(s.F) : Json()});
      Json j;
      j["columns"] = {"time", "chart", "x", "y", "px", "py", "H", "F"};
      j["rows"] = rows;
      detail::write_document(cfg, out, "trajectory_" + name + ".json", "trajectory", j);
    }
    const Json summary = drift_summary(tr);
    for (const auto& [k, v] : summary.items()) info[k] = v;
    rep[name] = info;
  };

  if (cfg.system == FlowSystem::ALL || cfg.system == FlowSystem::FAM1) {
    const PhaseState s0 = acceptance::geodesic_seed_state(lab.fam1(), cfg.seed);
    Json info;
    info["system"] = lab.fam1().descriptor();
    emit("fam1", integrate_geodesic(lab.fam1(), s0, cfg.T, cfg.dt, &lab.quartic1()), info);
  }
  for (Variant v : {Variant::S1, Variant::S2}) {
    const FlowSystem want = v == Variant::S1 ? FlowSystem::S1 : FlowSystem::S2;
    if (cfg.system != FlowSystem::ALL && cfg.system != want) continue;
    const NaturalSystem& sys = v == Variant::S1 ? lab.s1() : lab.s2();
    const PotentialMax vmax = max_potential(sys);
    const bool degenerate = !(cfg.E > vmax.value);
    Json info;
    info["system"] = sys.descriptor();
    info["E"] = cfg.E;
    info["max_V"] = vmax.value;
    info["degenerate"] = degenerate;
    if (degenerate)
      info["warning"] = "E <= max V: the Jacobi metric vanishes on the Hill boundary; F_E not tracked";
    const PhaseState s0 = sample_energy_surface(sys, cfg.E, cfg.seed);
    std::optional<QuarticIntegral> FE;
    if (!degenerate) FE = build_quartic(jacobi_metric(sys, cfg.E));
    emit(v == Variant::S1 ? "s1" : "s2", integrate_natural(sys, s0, cfg.T, cfg.dt, FE ? &*FE : nullptr), info);
  }
  detail::write_document(cfg, out, "flow_summary.json", "flow_summary", rep);
  return out;
}

/// Acceptance report with pass/fail per criterion; lists prior artifacts found in the output directory.
inline RunOutput run_report(const RunConfig& cfg,
                            const std::function<void(const CriterionResult&)>& on_result = {}) {
  RunOutput out;
  Json inputs = Json::array();
  const fs::path dir = resolve_output_dir(cfg);
  for (const char* name : {"ode_report.json", "verify_report.json", "metric_report.json", "integral_report.json",
                           "flow_summary.json"})
    if (fs::exists(dir / name)) inputs.push_back(name);
  const auto results = run_acceptance(cfg, on_result);
  Json crit = Json::array();
  int passed = 0;
  for (const auto& r : results) {
    crit.push_back(to_json(r));
    passed += r.pass ? 1 : 0;
  }
  Json rep;
  rep["prior_outputs"] = inputs;
  rep["criteria"] = crit;
  rep["passed"] = passed;
  rep["total"] = results.size();
  rep["all_pass"] = passed == static_cast<int>(results.size());
  out.all_pass = passed == static_cast<int>(results.size());
  detail::write_document(cfg, out, "acceptance_report.json", "acceptance_report", rep);
  return out;
}

/// Dispatches on cfg.command.
inline RunOutput run(const RunConfig& cfg, const std::function<void(const CriterionResult&)>& on_result = {}) {
  validate(cfg);
  if (cfg.command == Command::REPORT) return run_report(cfg, on_result);
  Lab lab(cfg);
  switch (cfg.command) {
    case Command::ODE: return run_ode(lab);
    case Command::VERIFY: return run_verify(lab);
    case Command::METRIC: return run_metric(lab);
    case Command::INTEGRAL: return run_integral(lab);
    case Command::FLOW: return run_flow(lab);
    default: return {};
  }
}

/// Machine-readable error record {schema_version, error: {kind, message[, key]}}.
[[nodiscard]] inline Json error_record(const std::string& kind, const std::string& message,
                                       const std::string& key = {}) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json e;
  e["kind"] = kind;
  e["message"] = message;
  if (!key.empty()) e["key"] = key;
  j["error"] = e;
  return j;
}

}  // namespace qfl
