#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "volterra/asymptotics.hpp"
#include "volterra/config.hpp"
#include "volterra/forcing.hpp"
#include "volterra/noise.hpp"
#include "volterra/solver.hpp"

namespace volterra {

/// A validated configuration turned into solver inputs. Immutable once built;
/// ensemble workers share one instance.
struct Scenario {
  Scenario(RunConfig cfg, UniformGrid g, Problem p)
      : config(std::move(cfg)), grid(g), problem(std::move(p)) {}

  RunConfig config;
  UniformGrid grid;
  Problem problem;
  Mode mode = Mode::deterministic_positive;
  NoiseKind noise = NoiseKind::none;
  std::optional<SigmaEnvelope> sigma;
  bool sigma_constant = false;
  std::optional<Envelope> envelope;
  EnvelopeRole role = EnvelopeRole::gamma;
  LimitEstimate L;
  std::string L_source;
  std::vector<std::string> notes;
};

/// Validates every part of the configuration before any solving starts.
Scenario build_scenario(const RunConfig& cfg);

using Metrics = std::map<std::string, double>;

/// Outcome of one trajectory: the classifier report plus named scalar metrics.
struct PathResult {
  std::uint64_t stream = 0;
  RegimeReport report;
  Metrics metrics;
  bool truncated = false;
  double reached = 0.0;
};

struct RunResult {
  Trajectory trajectory;
  PathResult path;
};

RunResult run_path(const Scenario& s, std::uint64_t stream = 0);

/// Runs streams 0..paths-1 on `workers` threads (0: hardware concurrency).
/// Aggregates are independent of the worker count.
struct EnsembleResult {
  std::vector<PathResult> paths;
  std::vector<Check> checks;  // aggregate checks
  Metrics metrics;
  std::vector<std::string> notes;

  bool all_passed() const;
};

EnsembleResult run_ensemble(const Scenario& s, unsigned workers = 0);

struct ConvergenceResult {
  ConvergenceReport report;
  bool exact = false;  // all level differences at rounding level
  Check check;
  Metrics metrics;
};

ConvergenceResult run_convergence(const Scenario& s);

/// `assert.<metric> = [lo, hi]` entries evaluated against measured metrics.
/// A missing metric fails.
std::vector<Check> evaluate_assertions(const RunConfig& cfg, const Metrics& metrics);

/// Snapshot indices: t = 0 plus `count` geometric times up to the reached horizon.
std::vector<std::size_t> snapshot_indices(const Trajectory& tr, std::size_t count);

/// `t,x,H,Z,M_t,clock_ratio,xh_ratio,xsigma_ratio`; empty fields where a column does not apply.
std::string trajectory_csv(const Scenario& s, const Trajectory& tr, bool full_dump);

std::string run_report_text(const Scenario& s, const RunResult& r, const std::vector<Check>& asserts);
std::string ensemble_report_text(const Scenario& s, const EnsembleResult& e, const std::vector<Check>& asserts);
std::string ensemble_csv(const EnsembleResult& e);
std::string convergence_report_text(const Scenario& s, const ConvergenceResult& c,
                                    const std::vector<Check>& asserts);

/// Built-in example configurations.
std::vector<std::string> canned_ids();
/// Throws ValidationError for an unknown id.
std::string canned_config(const std::string& id);

struct CommandOptions {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool full_dump = false;
  unsigned workers = 0;
};

/// Exit codes: 0 all checks passed, 2 a check or assertion failed.
/// Errors propagate as exceptions; no files are written before validation succeeds.
int cmd_solve(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_ensemble(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_convergence(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
/// Runs the canned config: an ensemble when it declares paths >= 2, else a single solve.
int cmd_reproduce(const std::string& id, const CommandOptions& opt, std::ostream& log);

}  // namespace volterra
