#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/scenario.hpp"

using namespace volterra;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("volterra_unit_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSmallEnsemble =
    "run.name = small\n"
    "nonlinearity.family = power\n"
    "noise.kind = brownian\n"
    "noise.sigma = 1\n"
    "noise.seed = 99\n"
    "noise.paths = 12\n"
    "initial.psi = 0\n"
    "grid.T = 200\n"
    "grid.dt = 0.05\n"
    "analysis.L_horizon = 1e8\n"
    "analysis.tolerance = 0.1\n";
}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("invalid parameters fail before any output") {
  RunConfig c;
  c.beta = 1.5;
  CHECK_THROWS_AS(build_scenario(c), ValidationError);
  const auto dir = scratch("invalid");
  CommandOptions opt;
  opt.out_dir = dir.string();
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_solve(c, opt, log), ValidationError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("ensembles need at least two paths") {
  RunConfig c = parse_config(kSmallEnsemble);
  c.paths = 1;
  CHECK_THROWS_AS(run_ensemble(build_scenario(c), 1), ValidationError);
  RunConfig d;
  d.paths = 10;
  CHECK_THROWS_AS(run_ensemble(build_scenario(d), 1), ValidationError);
}

TEST_CASE("ensemble output is byte-identical across reruns and worker counts") {
  const RunConfig c = parse_config(kSmallEnsemble);
  std::ostringstream log;
  std::vector<std::string> reports, tables;
  for (unsigned w : {1u, 3u, 3u}) {
    const auto dir = scratch("ens" + std::to_string(reports.size()));
    CommandOptions opt;
    opt.out_dir = dir.string();
    opt.workers = w;
    cmd_ensemble(c, opt, log);
    reports.push_back(slurp(dir / "report.txt"));
    tables.push_back(slurp(dir / "ensemble.csv"));
    fs::remove_all(dir);
  }
  CHECK(!reports[0].empty());
  CHECK(reports[0] == reports[1]);
  CHECK(reports[1] == reports[2]);
  CHECK(tables[0] == tables[1]);
  CHECK(tables[1] == tables[2]);

  RunConfig other = c;
  other.seed = 100;
  const auto a = run_ensemble(build_scenario(c), 2);
  const auto b = run_ensemble(build_scenario(other), 2);
  CHECK(a.metrics.at("median.x_final") != b.metrics.at("median.x_final"));
}

TEST_CASE("intermediate-high example reports its bounds") {
  const Scenario s = build_scenario(parse_config(canned_config("Lgt1")));
  const auto r = run_path(s);
  CHECK(r.path.report.regime == Regime::intermediate_high);
  CHECK(r.path.report.G_L == doctest::Approx(1.5).epsilon(0.02));
  CHECK(r.path.report.G_U == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("unperturbed logtype run is ode dominated and passes") {
  const Scenario s = build_scenario(parse_config(canned_config("logtype_unperturbed")));
  const auto r = run_path(s);
  CHECK(r.path.report.regime == Regime::ode_dominated);
  CHECK(r.path.report.all_passed());
  CHECK(r.path.metrics.at("clock") == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("trajectory csv") {
  RunConfig c;
  c.T = 10;
  c.dt = 0.01;
  c.snapshots = 16;
  const Scenario s = build_scenario(c);
  const auto r = run_path(s);
  const auto csv = trajectory_csv(s, r.trajectory, false);
  CHECK(csv.rfind("t,x,H,Z,M_t,clock_ratio,xh_ratio,xsigma_ratio\n", 0) == 0);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines >= 2);
  CHECK(lines <= 18);
  const auto full = trajectory_csv(s, r.trajectory, true);
  CHECK(std::count(full.begin(), full.end(), '\n') == 1002);
}

TEST_CASE("assertions") {
  RunConfig c;
  c.assertions["a"] = {0.0, 1.0};
  c.assertions["b"] = {0.0, 1.0};
  c.assertions["missing"] = {0.0, 1.0};
  const auto checks = evaluate_assertions(c, {{"a", 0.5}, {"b", 2.0}});
  REQUIRE(checks.size() == 3);
  int pass = 0, fail = 0;
  for (const auto& k : checks) (k.status == CheckStatus::pass ? pass : fail)++;
  CHECK(pass == 1);
  CHECK(fail == 2);
}

TEST_CASE("unknown example id") {
  CHECK_THROWS_AS(canned_config("nope"), ValidationError);
  CHECK(canned_ids().size() >= 10);
}

}
