/**
 * @file qfl.cpp
 * @brief Command-line front end: `qfl <ode|verify|metric|integral|flow|report> [options]`.
 *
 * Configuration is read from an optional key = value file (--config) and
 * overridden by flags. Errors are written as a JSON record to stderr (and to
 * error.json in the output directory when possible) with a nonzero exit.
 */
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qfl/pipeline.hpp"

namespace {

int fail(const qfl::RunConfig* cfg, const std::string& kind, const std::string& message,
         const std::string& key = {}) {
  const qfl::Json rec = qfl::error_record(kind, message, key);
  std::cerr << rec.dump() << "\n";
  if (cfg) {
    try {
      qfl::write_text(std::filesystem::path(qfl::resolve_output_dir(*cfg)) / "error.json", qfl::format_json(rec));
    } catch (const std::exception&) {
      // the stderr record is authoritative
    }
  }
  return kind == "config_error" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrable geodesic and natural flows on S^2 with quartic first integrals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qfl::kArtifactVersion));

  std::string config_path;
  std::map<std::string, std::string> flags;
  // flag name -> config key
  const std::vector<std::pair<std::string, std::string>> flag_keys{
      {"--y_max", "y_max"}, {"--tol", "tol"}, {"--c", "c"},         {"--d1", "d1"},
      {"--p", "p"},         {"--E", "E"},     {"--T", "T"},         {"--dt", "dt"},
      {"--seed", "seed"},   {"--out", "output_dir"}, {"--format", "format"}, {"--system", "system"}};
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  for (const auto& [flag, key] : flag_keys) {
    app.add_option_function<std::string>(
        flag, [&flags, key = key](const std::string& v) { flags[key] = v; }, "override '" + key + "'");
  }

  std::string chosen;
  for (const auto& [cmd, name] : qfl::kCommandNames) {
    const char* help = "";
    switch (cmd) {
      case qfl::Command::ODE: help = "solve for psi; write the psi table and the oracle comparison"; break;
      case qfl::Command::VERIFY: help = "phase-plane analysis, root scan and closed-form inverse check"; break;
      case qfl::Command::METRIC: help = "Lambda grids, curvature samples and natural-system data"; break;
      case qfl::Command::INTEGRAL: help = "criterion residuals, loop residuals and bracket scans"; break;
      case qfl::Command::FLOW: help = "trajectories and drift summaries"; break;
      case qfl::Command::REPORT: help = "acceptance report with pass/fail per criterion"; break;
    }
    app.add_subcommand(name, help)->fallthrough()->callback([&chosen, name = name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  qfl::RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      std::ostringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    cfg = qfl::parse_config(text);
    qfl::apply_setting(cfg, "command", chosen);
    for (const auto& [key, value] : flags) qfl::apply_setting(cfg, key, value);
    qfl::validate(cfg);
  } catch (const qfl::ConfigError& e) {
    return fail(nullptr, e.kind(), e.what(), e.key());
  }

  try {
    const auto on_result = [](const qfl::CriterionResult& r) {
      std::printf("[%s] criterion %2d: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str());
      std::fflush(stdout);
    };
    const qfl::RunOutput out = qfl::run(cfg, on_result);
    for (const auto& p : out.files) std::printf("wrote %s\n", p.string().c_str());
    return out.all_pass ? 0 : 3;
  } catch (const qfl::Error& e) {
    return fail(&cfg, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(&cfg, "internal_error", e.what());
  }
}
