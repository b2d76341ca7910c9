/**
 * @file test_cli.cpp
 * @brief Configuration parsing, deterministic output and the qfl binary.
 */
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qfl/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qfl_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string(QFL_CLI_PATH) + " " + args + " > /dev/null";
  cmd += err.empty() ? " 2>/dev/null" : " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Config, EmptyInputGivesDefaults) {
  const qfl::RunConfig c = qfl::parse_config("");
  EXPECT_EQ(c.y_max, 8.0);
  EXPECT_EQ(c.tol, 1e-10);
  EXPECT_EQ(c.c, 1.0);
  EXPECT_EQ(c.d1, 0.0);
  EXPECT_EQ(c.p, 1.0);
  EXPECT_EQ(c.E, 1.0);
  EXPECT_EQ(c.T, 100.0);
  EXPECT_EQ(c.dt, 1e-3);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.format, qfl::OutputFormat::JSON);
}

TEST(Config, SingleOverrideKeepsOtherDefaults) {
  const qfl::RunConfig c = qfl::parse_config("# comment\n  c = 2.5   # trailing\n\n");
  EXPECT_EQ(c.c, 2.5);
  EXPECT_EQ(c.E, 1.0);
  EXPECT_EQ(c.tol, 1e-10);
}

TEST(Config, ErrorsNameTheKey) {
  const auto key_of = [](const std::string& text) {
    try {
      (void)qfl::parse_config(text);
    } catch (const qfl::ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("tol = 1"), "tol");
  EXPECT_EQ(key_of("dt = 0.5"), "dt");
  EXPECT_EQ(key_of("p = 0"), "p");
  EXPECT_EQ(key_of("bogus = 3"), "bogus");
  EXPECT_EQ(key_of("c = two"), "c");
  EXPECT_EQ(key_of("seed = -1"), "seed");
  EXPECT_EQ(key_of("format = xml"), "format");
  EXPECT_EQ(key_of("c = 1\nc = 2"), "c");
  EXPECT_EQ(key_of("just words"), "line 1");
  EXPECT_EQ(key_of("y_max = 5"), "y_max");
}

TEST(Config, SettingsOverrideFileValues) {
  qfl::RunConfig c = qfl::parse_config("E = 2\nT = 10");
  qfl::apply_setting(c, "E", "0.5");
  qfl::validate(c);
  EXPECT_EQ(c.E, 0.5);
  EXPECT_EQ(c.T, 10.0);
}

TEST(Config, OutputDirFallsBackToEnvironment) {
  qfl::RunConfig c;
  ::setenv("QFL_OUT_DIR", "/tmp/qfl_env_dir", 1);
  EXPECT_EQ(qfl::resolve_output_dir(c), "/tmp/qfl_env_dir");
  c.output_dir = "explicit";
  EXPECT_EQ(qfl::resolve_output_dir(c), "explicit");
  ::unsetenv("QFL_OUT_DIR");
  c.output_dir.clear();
  EXPECT_EQ(qfl::resolve_output_dir(c), "qfl_out");
}

TEST(Io, SeventeenSignificantDigits) {
  EXPECT_EQ(qfl::format_real(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(qfl::format_real(-2.0), "-2.0000000000000000e+00");
  EXPECT_EQ(qfl::format_real(std::nan("")), "null");
  qfl::Json j;
  j["a"] = 1.0 / 3.0;
  j["b"] = {1, 2};
  const qfl::Json back = qfl::Json::parse(qfl::format_json(j));
  EXPECT_EQ(back["a"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(back["b"][1], 2);
}

TEST(Pipeline, ReportsAreByteIdenticalAndCarryProvenance) {
  for (auto cmd : {qfl::Command::ODE, qfl::Command::VERIFY}) {
    std::string texts[2];
    for (int k = 0; k < 2; ++k) {
      qfl::RunConfig c;
      c.command = cmd;
      c.output_dir = scratch("det" + std::to_string(k)).string();
      const auto out = qfl::run(c);
      ASSERT_FALSE(out.files.empty());
      texts[k] = slurp(out.files.back());
    }
    // the output_dir differs between the runs; compare everything after it
    const auto strip = [](const std::string& s) {
      std::string out;
      std::istringstream in(s);
      std::string line;
      while (std::getline(in, line))
        if (line.find("output_dir") == std::string::npos) out += line + "\n";
      return out;
    };
    EXPECT_EQ(strip(texts[0]), strip(texts[1]));
    const qfl::Json j = qfl::Json::parse(texts[0]);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["provenance"]["artifact"], "qfl");
    EXPECT_EQ(j["provenance"]["config"]["seed"], 42);
  }
}

TEST(Binary, OdeTableRowAtEquator) {
  const fs::path dir = scratch("ode");
  ASSERT_EQ(run_cli("ode --format csv --out " + dir.string()), 0);
  std::ifstream f(dir / "psi_table.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line.rfind("# qfl", 0), 0u);
  std::getline(f, line);
  EXPECT_EQ(line.rfind("# config:", 0), 0u);
  std::getline(f, line);
  EXPECT_EQ(line, "y,psi,dpsi,ddpsi,first_integral_residual");
  bool found = false;
  while (std::getline(f, line)) {
    const auto cells = split(line);
    ASSERT_EQ(cells.size(), 5u);
    if (std::strtod(cells[0].c_str(), nullptr) == 0.0) {
      found = true;
      EXPECT_EQ(std::strtod(cells[1].c_str(), nullptr), 0.0);
      EXPECT_EQ(std::strtod(cells[2].c_str(), nullptr), 1.0);
      EXPECT_EQ(std::strtod(cells[3].c_str(), nullptr), 0.0);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_TRUE(fs::exists(dir / "ode_report.json"));
}

TEST(Binary, FlowBelowMaxPotentialIsFlagged) {
  const fs::path dir = scratch("flow");
  ASSERT_EQ(run_cli("flow --system s1 --E 0.3 --T 1 --format csv --out " + dir.string()), 0);
  const qfl::Json j = qfl::Json::parse(slurp(dir / "flow_summary.json"));
  EXPECT_EQ(j["s1"]["degenerate"], true);
  EXPECT_NEAR(j["s1"]["max_V"].get<double>(), 0.4386913376508308, 1e-9);
  std::ifstream f(dir / "trajectory_s1.csv");
  std::string line;
  for (int i = 0; i < 3; ++i) std::getline(f, line);
  EXPECT_EQ(line, "time,chart,x,y,px,py,H,F");
}

TEST(Binary, FlowSummaryHasDriftRecords) {
  const fs::path dir = scratch("flow2");
  ASSERT_EQ(run_cli("flow --system s2 --T 2 --out " + dir.string()), 0);
  const qfl::Json j = qfl::Json::parse(slurp(dir / "flow_summary.json"));
  EXPECT_EQ(j["s2"]["degenerate"], false);
  const auto& d = j["s2"]["drift"];
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0]["quantity"], "H");
  EXPECT_EQ(d[1]["quantity"], "F");
  EXPECT_LE(d[0]["relative_drift"].get<double>(), 1e-8);
  EXPECT_LE(d[1]["relative_drift"].get<double>(), 1e-6);
  EXPECT_EQ(d[0]["steps"], 2000);
  EXPECT_TRUE(fs::exists(dir / "trajectory_s2.json"));
}

TEST(Binary, InvalidConfigFailsWithErrorRecord) {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  const fs::path err = dir / "stderr.txt";
  EXPECT_NE(run_cli("ode --tol 1 --out " + dir.string(), err), 0);
  const qfl::Json j = qfl::Json::parse(slurp(err));
  EXPECT_EQ(j["error"]["kind"], "config_error");
  EXPECT_EQ(j["error"]["key"], "tol");

  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "mystery = 1\n";
  EXPECT_NE(run_cli("verify --config " + cfg.string(), err), 0);
  EXPECT_EQ(qfl::Json::parse(slurp(err))["error"]["key"], "mystery");
}

TEST(Binary, ConfigFileAndFlagsCombine) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "c = 2.5\nseed = 7\noutput_dir = " << (dir / "ignored").string() << "\n";
  ASSERT_EQ(run_cli("verify --config " + cfg.string() + " --seed 9 --out " + dir.string()), 0);
  const qfl::Json j = qfl::Json::parse(slurp(dir / "verify_report.json"));
  EXPECT_EQ(j["provenance"]["config"]["c"], 2.5);
  EXPECT_EQ(j["provenance"]["config"]["seed"], 9);
  EXPECT_EQ(j["provenance"]["config"]["command"], "verify");
}
