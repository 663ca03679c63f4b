#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/scenario.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("VOLTERRA_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (v[used] != '\0') throw std::invalid_argument("trailing");
    return s;
  } catch (const std::exception&) {
    throw volterra::ValidationError(std::string("VOLTERRA_SEED is not an unsigned integer: '") + v + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbed nonlinear Volterra equations: solver, regime classifier and example runner"};
  app.require_subcommand(1);

  volterra::CommandOptions opt;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--out", out_dir, "output directory (default: out, or out/<id> for reproduce)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed; overrides VOLTERRA_SEED and noise.seed");
  app.add_flag("--full-dump", opt.full_dump, "write every grid point instead of geometric snapshots");
  app.add_option("--workers", opt.workers, "ensemble worker threads (0: hardware concurrency)");

  std::string path, id;
  auto* solve = app.add_subcommand("solve", "run one trajectory and classify it");
  solve->add_option("config", path, "run configuration file")->required();
  auto* ensemble = app.add_subcommand("ensemble", "run noise.paths trajectories and aggregate the checks");
  ensemble->add_option("config", path, "run configuration file")->required();
  auto* convergence = app.add_subcommand("convergence", "refine the grid and report the observed order");
  convergence->add_option("config", path, "run configuration file")->required();
  auto* reproduce = app.add_subcommand("reproduce", "run a built-in example and its assertions");
  reproduce->add_option("example_id", id, "example id")->required()->check(CLI::IsMember(volterra::canned_ids()));
  auto* list = app.add_subcommand("list", "print the built-in example ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors share the validation exit code
  }

  try {
    opt.seed = *seed_opt ? std::optional<std::uint64_t>(seed) : env_seed();
    if (*list) {
      for (const auto& k : volterra::canned_ids()) std::cout << k << "\n";
      return 0;
    }
    if (*reproduce) {
      opt.out_dir = out_dir.empty() ? "out/" + id : out_dir;
      return volterra::cmd_reproduce(id, opt, std::cout);
    }
    opt.out_dir = out_dir.empty() ? "out" : out_dir;
    const volterra::RunConfig cfg = volterra::load_config(path);
    if (*solve) return volterra::cmd_solve(cfg, opt, std::cout);
    if (*ensemble) return volterra::cmd_ensemble(cfg, opt, std::cout);
    return volterra::cmd_convergence(cfg, opt, std::cout);
  } catch (const volterra::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
  } catch (const volterra::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
