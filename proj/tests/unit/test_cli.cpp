#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "jtpol/app.hpp"

using namespace jtpol;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("jtpol_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto path = dir / "run.ini";
  std::ofstream(path) << body << "\n[output]\ndirectory = " << (dir / "out").string() << "\n";
  return path;
}

Run cli(const std::string& args) {
  Run r;
  const std::string cmd = std::string(JTPOL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

const char* kSmall = "[model]\nn_max = 6\n";

}  // namespace

TEST(Config, RoundTripsThroughSerialization) {
  RunConfig c;
  c.model.n_max = 7;
  c.model.kappa = 0.123456789012345;
  c.cavity.N = 2;
  c.cavity.omega_c = 7.01;
  c.coupling_ratio = 0.07;
  c.sector = {1, 1};
  c.spectrum.method = SpectrumMethod::Lanczos;
  c.spectrum.window_auto = false;
  c.spectrum.window = std::pair{6.1, 7.7};
  c.dynamics.polarizations = {CircularPolarization::LCP};
  c.dynamics.molecules = {1, 2};
  c.dynamics.pulse.tau = 15.0;
  c.dynamics.propagation.dt = 0.005;
  c.retention.max_levels_per_sector = 9;
  c.output_dir = "elsewhere";
  const auto back = parse_config_text(serialize_config(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
  EXPECT_TRUE(parse_config_text(serialize_config(RunConfig{})) == RunConfig{});
}

TEST(Config, UnknownKeyIsRejectedByName) {
  try {
    parse_config_text("[model]\nn_maxx = 4\n");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "model.n_maxx");
  }
  EXPECT_THROW(parse_config_text("[model]\nomega_eV = fast\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[sector]\nj = 2\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_text("[sector]\nn_ex = 0\nj = 2\n"));
  EXPECT_THROW(parse_config_text("[bogus]\nx = 1\n"), ConfigError);
}

TEST(Config, SampleConfigsLoad) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(JTPOL_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++seen;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
  EXPECT_GE(seen, 1);
  const auto d = load_config(std::string(JTPOL_CONFIG_DIR) + "/default.ini");
  RunConfig expected;
  expected.output_dir = d.output_dir;
  EXPECT_TRUE(d == expected);
}

TEST(Cli, UnknownKeyExitsWithConfigCode) {
  const auto dir = scratch("unknown");
  const auto r = cli("vibronic --config " + write_config(dir, "[cavity]\nN = 1\nbanana = 3\n").string());
  EXPECT_EQ(r.code, app::kConfigError);
  EXPECT_NE(r.output.find("cavity.banana"), std::string::npos) << r.output;
  EXPECT_EQ(cli("frobnicate").code, app::kConfigError);
  EXPECT_EQ(cli("vibronic --config /nonexistent/file.ini").code, app::kConfigError);
}

TEST(Cli, VibronicOutputsAreByteIdenticalOnRerun) {
  const auto dir = scratch("determinism");
  const auto config = write_config(dir, kSmall);
  ASSERT_EQ(cli("vibronic --config " + config.string()).code, 0);
  const auto levels = slurp(dir / "out" / "levels.csv");
  const auto sticks = slurp(dir / "out" / "bare_sticks.csv");
  ASSERT_EQ(cli("vibronic --config " + config.string()).code, 0);
  EXPECT_EQ(levels, slurp(dir / "out" / "levels.csv"));
  EXPECT_EQ(sticks, slurp(dir / "out" / "bare_sticks.csv"));
  EXPECT_EQ(read_csv(dir / "out" / "levels.csv").size(), 3u * 36u + 1u);

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "vibronic");
  EXPECT_EQ(manifest["files"].size(), 2u);
}

TEST(Cli, KappaZeroGivesSingleBareStick) {
  const auto dir = scratch("kappa0");
  ASSERT_EQ(cli("vibronic --config " + write_config(dir, "[model]\nkappa_eV = 0\nn_max = 4\n").string()).code, 0);
  int bright = 0;
  const auto rows = read_csv(dir / "out" / "bare_sticks.csv");
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"energy_eV", "intensity"}));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (std::stod(rows[k][1]) > 1e-12) {
      ++bright;
      EXPECT_NEAR(std::stod(rows[k][0]), 7.0, 1e-12);
    }
  }
  EXPECT_EQ(bright, 1);
}

TEST(Cli, SingleMoleculeSpectrumHasSeventyRecords) {
  const auto dir = scratch("spectrum");
  ASSERT_EQ(cli("spectrum --config " + write_config(dir, "").string()).code, 0);
  const auto records = read_csv(dir / "out" / "records.csv");
  ASSERT_EQ(records.size(), 71u);
  EXPECT_EQ(records.front(), (std::vector<std::string>{"energy_eV", "intensity", "pr", "polarization"}));
  double total = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    total += std::stod(records[k][1]);
    EXPECT_LE(std::stod(records[k][2]), 3.0 + 1e-9);
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
  for (const char* f : {"sticks.csv", "broadened.csv", "heatmap.csv", "basis.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  EXPECT_EQ(read_csv(dir / "out" / "basis.csv").size(), 71u);
}

TEST(Cli, DenseLimitExit) {
  const auto dir = scratch("dense_limit");
  const auto r = cli("spectrum --config " + write_config(dir, "[cavity]\nN = 2\n[spectrum]\ndense_limit = 100\n").string());
  EXPECT_EQ(r.code, app::kDenseLimit) << r.output;
}

TEST(Cli, ZeroAmplitudeDynamicsIsFlat) {
  const auto dir = scratch("flat");
  const auto config = write_config(dir, std::string(kSmall) +
                                            "[dynamics]\npolarizations = RCP\ne0_mu_eV = 0\nt_end_fs = 30\n");
  const auto r = cli("dynamics --config " + config.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = read_csv(dir / "out" / "trajectory_N1_RCP.csv");
  ASSERT_EQ(rows.size(), 302u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(std::stod(rows[k][1]), 0.0);
    EXPECT_EQ(std::stod(rows[k][3]), 0.0);
    const double t = std::stod(rows[k][0]);
    if (t < 20.0 - 1e-9)
      EXPECT_TRUE(rows[k][2].empty());
    else
      EXPECT_EQ(std::stod(rows[k][2]), 0.0);
  }
  EXPECT_NE(r.output.find("no excitation"), std::string::npos);
}

TEST(Cli, DynamicsWritesBothPolarizations) {
  const auto dir = scratch("dynamics");
  const auto r = cli("dynamics --config " + write_config(dir, std::string(kSmall) + "[dynamics]\nt_end_fs = 40\n").string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rcp = read_csv(dir / "out" / "trajectory_N1_RCP.csv");
  const auto lcp = read_csv(dir / "out" / "trajectory_N1_LCP.csv");
  ASSERT_EQ(rcp.size(), lcp.size());
  for (std::size_t k = 1; k < rcp.size(); ++k) EXPECT_NEAR(std::stod(rcp[k][1]), -std::stod(lcp[k][1]), 1e-12);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["trajectories"].size(), 2u);
}

TEST(Cli, ValidateQuickRun) {
  const auto dir = scratch("validate");
  const auto start = std::chrono::steady_clock::now();
  const auto r = cli("validate --config " + write_config(dir, "[model]\nn_max = 4\n").string());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("[FAIL]"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("[PASS]"), std::string::npos);
  EXPECT_LT(seconds, 10.0);
}

TEST(Cli, VersionFlag) {
  const auto r = cli("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find(JTPOL_VERSION), std::string::npos);
}
