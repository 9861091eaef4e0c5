#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msplit/cli.hpp"
#include "oracles.hpp"

using namespace msplit;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("msplit_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& p) {
  std::map<std::string, std::string> kv;
  for (const std::string& line : read_lines(p)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return kv;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::ostringstream out, err;
  std::vector<const char*> argv;
  argv.push_back("msplit");
  for (const auto& a : args) argv.push_back(a.c_str());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("parse: run with defaults resolves the paper scenario") {
  const Command cmd = parse_args({"run", "--scenario", "semi-degenerate"});
  const auto* rc = std::get_if<RunCommand>(&cmd);
  REQUIRE(rc != nullptr);
  CHECK(rc->cfg.diff.d12 == 0.833);
  CHECK(rc->cfg.diff.d23 == 0.168);
  CHECK(rc->cfg.velocity == 0.01);
  CHECK(rc->cfg.t_end == 1.0);
  CHECK(rc->cfg.grid.num_cells == 140);
  CHECK(rc->cfg.splitting == SplittingMethod::lie);
  CHECK(rc->cfg.dt_policy.kind == DtPolicy::Kind::auto_stable);
}

TEST_CASE("parse: converge ladder") {
  const Command cmd = parse_args(
      {"converge", "--scenario", "semi-degenerate", "--dt-ladder", "1e-3,5e-4,2.5e-4"});
  const auto* cc = std::get_if<ConvergeCommand>(&cmd);
  REQUIRE(cc != nullptr);
  REQUIRE(cc->dt_ladder.size() == 3);
  CHECK(cc->dt_ladder[0] == 1e-3);
  CHECK(cc->dt_ladder[1] == 5e-4);
  CHECK(cc->dt_ladder[2] == 2.5e-4);
}

TEST_CASE("parse: bad inputs raise usage errors / exit code 2") {
  CHECK_THROWS_AS(parse_args({"run", "--dt", "-1"}), usage_error);
  CHECK_THROWS_AS(parse_args({"run", "--dt", "abc"}), usage_error);
  CHECK_THROWS_AS(parse_args({"run", "--scenario", "bogus"}), usage_error);
  CHECK_THROWS_AS(parse_args({"run", "--no-such-flag", "1"}), usage_error);
  CHECK_THROWS_AS(parse_args({"converge", "--scenario", "semi-degenerate", "--dt-ladder",
                              "1e-3,2e-3"}),
                  usage_error);
  CHECK(run_cli({"run", "--dt", "-1"}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("snapshots CSV: row counts and lossless round trip") {
  const auto dir = temp_dir("csv");
  ScenarioConfig cfg = make_scenario(Scenario::semi_degenerate_uphill).cfg;
  cfg.t_end = 2e-4;
  cfg.output.snapshot_count = 2;
  const RunResult result = run(cfg);
  const auto csv = write_snapshots_csv(result, cfg.grid, dir);
  const auto lines = read_lines(csv);
  REQUIRE(lines.size() == 1 + 2 * 140);
  CHECK(lines[0] == "t,x,xi1,xi2,xi3");

  // parse every row back and compare against the in-memory states
  size_t row = 1;
  for (const SpeciesState& snap : result.snapshots) {
    for (int j = 0; j < cfg.grid.num_cells; ++j, ++row) {
      std::stringstream ss(lines[row]);
      std::string field;
      std::vector<double> vals;
      while (std::getline(ss, field, ',')) vals.push_back(std::strtod(field.c_str(), nullptr));
      REQUIRE(vals.size() == 5);
      CHECK(vals[0] == snap.time);
      CHECK(vals[1] == cfg.grid.cell_center(j));
      for (int i = 0; i < kNumSpecies; ++i) CHECK(std::abs(vals[2 + i] - snap.xi[i][j]) < 1e-15);
    }
  }
}

TEST_CASE("snapshots CSV: t_end = 0 writes the initial condition") {
  const auto dir = temp_dir("csv0");
  ScenarioConfig cfg = make_scenario(Scenario::semi_degenerate_uphill).cfg;
  cfg.t_end = 0.0;
  const RunResult result = run(cfg);
  const auto csv = write_snapshots_csv(result, cfg.grid, dir);
  const auto lines = read_lines(csv);
  REQUIRE(lines.size() == 1 + 140);
  const SpeciesState ic = make_initial_state(cfg.grid, cfg.initial);
  std::stringstream ss(lines[1]);
  std::string field;
  std::vector<double> vals;
  while (std::getline(ss, field, ',')) vals.push_back(std::strtod(field.c_str(), nullptr));
  CHECK(vals[0] == 0.0);
  CHECK(vals[2] == ic.xi[0][0]);
}

TEST_CASE("manifest: audit echo matches values recomputed from snapshots") {
  const auto dir = temp_dir("manifest");
  ScenarioConfig cfg = make_scenario(Scenario::semi_degenerate_uphill).cfg;
  cfg.velocity = 0.0;  // diffusion only, conservative
  cfg.t_end = 0.01;
  cfg.output.snapshot_count = 6;
  const RunResult result = run(cfg);
  const AuditVerdict verdict = evaluate_audit(cfg, result.audit);
  const auto csv = write_snapshots_csv(result, cfg.grid, dir);
  const auto manifest = write_run_manifest(cfg, "semi-degenerate", result, verdict, csv, dir);
  const auto kv = read_manifest(manifest);

  CHECK(kv.at("diffusivities.d12") == "0.833");
  CHECK(kv.at("diffusivities.d23") == "0.168");
  CHECK(kv.at("grid.num_cells") == "140");
  CHECK(kv.at("audit.passed") == "true");
  CHECK(kv.at("scenario") == "semi-degenerate");

  // independently recompute drift maxima over the stored snapshots; the
  // manifest (maxima over all steps) must dominate and stay in tolerance
  const Vec3 initial = total_moles(result.snapshots.front());
  double sigma_drift = 0.0, moles_drift = 0.0;
  for (const SpeciesState& s : result.snapshots) {
    sigma_drift = std::max(sigma_drift, max_sigma_deviation(s));
    const Vec3 m = total_moles(s);
    for (int i = 0; i < kNumSpecies; ++i)
      moles_drift = std::max(moles_drift, std::abs(m[i] - initial[i]));
  }
  const double manifest_sigma = std::strtod(kv.at("audit.max_sigma_drift").c_str(), nullptr);
  const double manifest_moles = std::strtod(kv.at("audit.max_moles_drift").c_str(), nullptr);
  CHECK(manifest_sigma >= sigma_drift - 1e-15);
  CHECK(manifest_moles >= moles_drift - 1e-15);
  CHECK(manifest_sigma < 1e-10);
  CHECK(manifest_moles < 1e-10);
}

TEST_CASE("manifest: asymptotic scenario echoes its parameter set losslessly") {
  const auto dir = temp_dir("manifest_asym");
  ScenarioConfig cfg = make_scenario(Scenario::asymptotic_duncan_toor).cfg;
  cfg.t_end = 0.0;
  const RunResult result = run(cfg);
  const AuditVerdict verdict = evaluate_audit(cfg, result.audit);
  const auto csv = write_snapshots_csv(result, cfg.grid, dir);
  const auto manifest = write_run_manifest(cfg, "asymptotic", result, verdict, csv, dir);
  const auto kv = read_manifest(manifest);
  CHECK(kv.at("diffusivities.d12") == "0.0833");
  CHECK(kv.at("diffusivities.d23") == "0.168");
  CHECK(kv.at("velocity") == "0.01");
  CHECK(std::strtod(kv.at("diffusivities.d13").c_str(), nullptr) == 0.680);
}

TEST_CASE("cli run: writes outputs and exits zero on a healthy run") {
  const auto dir = temp_dir("cli_run");
  std::string out;
  const int code = run_cli({"run", "--scenario", "semi-degenerate", "--t-end", "0.005", "--out",
                            dir.string(), "--snapshots", "3"},
                           &out);
  CHECK(code == 0);
  CHECK(std::filesystem::exists(dir / "snapshots.csv"));
  CHECK(std::filesystem::exists(dir / "manifest.txt"));
  CHECK(out.find("snapshots.csv") != std::string::npos);
}

TEST_CASE("cli run: byte-identical snapshots across reruns") {
  const auto dir_a = temp_dir("det_a");
  const auto dir_b = temp_dir("det_b");
  const std::vector<std::string> base{"run", "--scenario", "semi-degenerate", "--t-end", "0.002",
                                      "--snapshots", "4"};
  auto with_out = [&base](const std::filesystem::path& d) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(d.string());
    return args;
  };
  REQUIRE(run_cli(with_out(dir_a)) == 0);
  REQUIRE(run_cli(with_out(dir_b)) == 0);
  std::ifstream fa(dir_a / "snapshots.csv", std::ios::binary);
  std::ifstream fb(dir_b / "snapshots.csv", std::ios::binary);
  const std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("cli flux-check: passes and prints maxima") {
  std::string out;
  const int code = run_cli({"flux-check", "--samples", "100"}, &out);
  CHECK(code == 0);
  CHECK(out.find("closure residual") != std::string::npos);
  CHECK(out.find("flux-check passed") != std::string::npos);
}

TEST_CASE("cli converge: writes convergence.csv") {
  const auto dir = temp_dir("cli_conv");
  std::string out;
  // small horizon keeps this quick; ladder divides t_end
  const int code = run_cli({"converge", "--scenario", "semi-degenerate", "--t-end", "0.04",
                            "--dt-ladder", "0.02,0.01,0.005", "--out", dir.string()},
                           &out);
  CHECK(code == 0);
  REQUIRE(std::filesystem::exists(dir / "convergence.csv"));
  const auto lines = read_lines(dir / "convergence.csv");
  CHECK(lines[0] == "dt,species,norm,error,observed_order");
  CHECK(lines.size() == 1 + 3 * 3 * 3);  // ladder x norms x species
}
