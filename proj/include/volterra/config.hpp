#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace volterra {

/// Run configuration. Text form is one `section.key = value` per line with
/// `#` comments; strings may be double-quoted, lists use `[a, b, ...]`.
struct RunConfig {
  std::string name = "run";

  std::vector<std::pair<double, double>> atoms;  // (location, mass)
  std::string density = "exp(-s)";              // none | inverse_square | expression in s
  double cutoff = 1.0 / 0.0;

  std::string family = "power";  // power | logtype | custom
  double beta = 0.5;
  std::string f_expr;
  std::string phi_expr;

  std::string forcing_kind = "zero";  // zero | builtin | example | custom-expr
  std::string forcing_name;
  std::vector<double> forcing_params;
  std::string forcing_target;  // expression in t
  std::string forcing_expr;    // expression in t

  std::string noise_kind = "none";  // none | brownian | stable
  std::string sigma = "1";
  double alpha = 1.5;
  double scale = 1.0;
  double skew = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t paths = 1;

  double T = 100.0;
  double dt = 0.01;
  std::optional<double> psi;  // example forcing defaults to target(0), otherwise 1

  std::uint64_t snapshots = 512;

  std::string mode = "auto";
  std::string L = "auto";  // auto | inf | number
  double L_horizon = 0.0;  // 0: the run horizon
  std::string envelope;    // power(eps) | clock(alpha) | expression in t
  std::string envelope_role = "gamma";
  double tolerance = 0.05;
  double lil_tolerance = 0.4;
  double required_fraction = 0.9;

  std::uint64_t levels = 4;

  std::map<std::string, std::pair<double, double>> assertions;  // metric -> [lo, hi]

  bool operator==(const RunConfig&) const = default;
};

/// Throws ValidationError naming the line on malformed input or unknown keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace volterra
