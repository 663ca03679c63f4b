#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volterra/forcing.hpp"
#include "volterra/nonlinear.hpp"
#include "volterra/solver.hpp"

namespace volterra {

enum class LimitFlag { finite, zero, infinite };

const char* to_string(LimitFlag flag);

/// Extrapolated limit of a ratio sampled at geometric times.
struct LimitEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  LimitFlag flag = LimitFlag::finite;
  double sqrt_model = 0.0;  // intercept of the a + b / sqrt(t) fit
  double log_model = 0.0;   // intercept of the a + b / log(t) fit
  double inverse_model = 0.0;  // intercept of the a + b / t fit
  std::vector<double> times;   // ascending
  std::vector<double> values;

  bool contains(double v) const { return lo <= v && v <= hi; }
  /// Last sampled value and whether the last `count` samples strictly increase.
  double last() const { return values.empty() ? 0.0 : values.back(); }
  bool rising(std::size_t count) const;
};

struct ExtrapolationPolicy {
  double infinite_above = 1e3;  // flag infinity when the last 3 samples exceed this and rise
  double zero_below = 1e-3;     // flag zero when the last 3 samples are below this and fall
  std::size_t fit_points = 8;
  std::size_t spread_points = 4;
};

/// Fits the samples against 1/sqrt(t) (primary), 1/log(t) and 1/t (cross-checks)
/// on the last `fit_points` samples. The interval is the hull of all fits,
/// each widened by its maximal deviation over the last `spread_points`.
LimitEstimate extrapolate_limit(const std::vector<double>& times, const std::vector<double>& values,
                                const ExtrapolationPolicy& policy = {});

/// horizon / 2^j for j = samples-1 .. 0, ascending.
std::vector<double> geometric_times(double horizon, int samples);

/// L_f(gamma) from r(t) = gamma(t) / (M int_0^t f(gamma(s)) ds).
/// Throws InsufficientHorizon with fewer than 6 usable samples.
LimitEstimate estimate_L(const std::function<double(double)>& gamma, const Nonlinearity& n,
                         double mass, double horizon, int samples = 12);

/// F(x(t)) / (M t) at geometric times up to the reached horizon. The
/// infinity flag is raised when the trace exceeds 10 and rises.
LimitEstimate clock_ratio(const Trajectory& tr, const Nonlinearity& n, int samples = 12,
                          bool absolute = false);

/// Any per-step ratio (indexed by grid step) sampled at geometric times.
LimitEstimate ratio_limit(const Trajectory& tr, const std::function<double(std::size_t)>& ratio,
                          int samples = 12, const ExtrapolationPolicy& policy = {});

/// Finite-horizon limsup / liminf: [T/2, T] split into `windows` geometric
/// windows; limsup is the max of window maxima, liminf the min of window minima.
struct TailStats {
  double limsup = 0.0;
  double liminf = 0.0;
  std::vector<double> window_max;
  std::vector<double> window_min;
};

/// Non-finite samples are ignored. Throws InsufficientHorizon when fewer
/// than `windows` windows contain samples.
TailStats tail_limsup(const std::vector<double>& times, const std::vector<double>& values,
                      int windows = 8);

// ---------------------------------------------------------------- classification

enum class Regime { ode_dominated, intermediate_low, indeterminate, intermediate_high, forcing_dominated };
enum class Mode { deterministic_positive, deterministic_envelope, brownian, stable };
enum class CheckStatus { pass, fail, na };

const char* to_string(Regime r);
const char* to_string(Mode m);
const char* to_string(CheckStatus s);
Mode parse_mode(const std::string& text);

/// Order ode_dominated < intermediate_low < indeterminate < intermediate_high < forcing_dominated.
Regime regime_of(const LimitEstimate& L);

double bound_GL(double L);  // 1 + 1/L
double bound_GU(double L);  // L / (L - 1)

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::na;
  double measured = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string theorem;
};

struct RegimeReport {
  Mode mode = Mode::deterministic_positive;
  LimitEstimate L;
  std::string L_source = "estimated";
  Regime regime = Regime::indeterminate;
  double G_L = 0.0;  // NaN outside (1, inf)
  double G_U = 0.0;
  std::vector<std::string> theorems;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool all_passed() const;
  const Check* find(const std::string& name) const;
  /// Flat `key = value` text.
  std::string serialize() const;
};

/// Measured tail statistics handed to the classifier. Absent entries turn
/// the corresponding checks into n/a.
struct ClassifyInputs {
  Mode mode = Mode::deterministic_positive;
  LimitEstimate L;
  std::string L_source = "estimated";
  double tolerance = 0.05;
  double lil_tolerance = 0.4;  // band for iterated-logarithm limsup/liminf at finite horizon

  std::optional<LimitEstimate> clock;     // F(x)/Mt
  std::optional<LimitEstimate> x_over_H;
  std::optional<TailStats> clock_tail;    // stochastic F(|X|)/Mt
  EnvelopeRole envelope_role = EnvelopeRole::gamma;
  std::optional<TailStats> x_over_gamma;  // |x| / gamma
  std::optional<bool> gamma_ratio_rising;
  std::optional<TailStats> x_over_sigma;
  std::optional<double> residual_over_sigma;  // |X - Z| / Sigma at the horizon
  std::optional<bool> integrable;             // int gamma^{-alpha} < inf (stable mode)
};

RegimeReport classify(const ClassifyInputs& in);

}  // namespace volterra
