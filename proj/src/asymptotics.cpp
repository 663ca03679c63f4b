#include "volterra/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "volterra/errors.hpp"
#include "volterra/numerics.hpp"

namespace volterra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Fit {
  double intercept = kNaN;
  double spread = kNaN;
};

// Least squares v = a + b s over all points; spread = max |residual| over the last `tail` points.
Fit linear_fit(const std::vector<double>& s, const std::vector<double>& v, std::size_t tail) {
  const std::size_t n = s.size();
  Fit out;
  if (n < 2) return out;
  double ms = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ms += s[i];
    mv += v[i];
  }
  ms /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (s[i] - ms) * (s[i] - ms);
    sxy += (s[i] - ms) * (v[i] - mv);
  }
  const double b = sxx > 0.0 ? sxy / sxx : 0.0;
  out.intercept = mv - b * ms;
  out.spread = 0.0;
  for (std::size_t i = n - std::min(tail, n); i < n; ++i)
    out.spread = std::max(out.spread, std::fabs(v[i] - (out.intercept + b * s[i])));
  return out;
}

bool strictly_increasing_tail(const std::vector<double>& v, std::size_t count) {
  if (v.size() < count || count < 2) return false;
  for (std::size_t i = v.size() - count + 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

bool strictly_decreasing_tail(const std::vector<double>& v, std::size_t count) {
  if (v.size() < count || count < 2) return false;
  for (std::size_t i = v.size() - count + 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::size_t index_at(const Trajectory& tr, double t) {
  const auto k = static_cast<std::size_t>(std::llround(t / tr.grid.step));
  return std::min(k, tr.size() - 1);
}

}  // namespace

const char* to_string(LimitFlag flag) {
  switch (flag) {
    case LimitFlag::finite:
      return "finite";
    case LimitFlag::zero:
      return "zero";
    case LimitFlag::infinite:
      return "infinite";
  }
  return "finite";
}

bool LimitEstimate::rising(std::size_t count) const { return strictly_increasing_tail(values, count); }

std::vector<double> geometric_times(double horizon, int samples) {
  if (!(horizon > 0.0) || samples < 1) throw ValidationError("geometric_times: bad horizon or count");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int j = 0; j < samples; ++j)
    t[static_cast<std::size_t>(samples - 1 - j)] = horizon / std::ldexp(1.0, j);
  return t;
}

LimitEstimate extrapolate_limit(const std::vector<double>& times, const std::vector<double>& values,
                                const ExtrapolationPolicy& policy) {
  if (times.size() != values.size()) throw ValidationError("extrapolate_limit: size mismatch");
  LimitEstimate est;
  est.times = times;
  est.values = values;
  const auto& v = values;
  if (v.size() < 3) throw InsufficientHorizon("extrapolate_limit needs at least 3 samples");

  const std::size_t n = v.size();
  if (v[n - 1] > policy.infinite_above && v[n - 2] > policy.infinite_above &&
      v[n - 3] > policy.infinite_above && strictly_increasing_tail(v, 3)) {
    est.flag = LimitFlag::infinite;
    est.value = est.lo = est.hi = est.sqrt_model = est.log_model = est.inverse_model = kInf;
    return est;
  }
  if (v[n - 1] < policy.zero_below && v[n - 2] < policy.zero_below && v[n - 3] < policy.zero_below &&
      strictly_decreasing_tail(v, 3)) {
    est.flag = LimitFlag::zero;
    est.value = est.lo = est.hi = est.sqrt_model = est.log_model = est.inverse_model = 0.0;
    return est;
  }

  const std::size_t first = n - std::min(policy.fit_points, n);
  std::vector<double> sa, va, sb, vb, sc;
  for (std::size_t i = first; i < n; ++i) {
    sa.push_back(1.0 / std::sqrt(times[i]));
    sc.push_back(1.0 / times[i]);
    va.push_back(v[i]);
    if (times[i] > 1.0) {
      sb.push_back(1.0 / std::log(times[i]));
      vb.push_back(v[i]);
    }
  }
  const Fit a = linear_fit(sa, va, policy.spread_points);
  est.sqrt_model = a.intercept;
  est.value = a.intercept;
  est.lo = a.intercept - a.spread;
  est.hi = a.intercept + a.spread;
  if (sb.size() >= 3) {
    const Fit b = linear_fit(sb, vb, policy.spread_points);
    est.log_model = b.intercept;
    est.lo = std::min(est.lo, b.intercept - b.spread);
    est.hi = std::max(est.hi, b.intercept + b.spread);
  } else {
    est.log_model = kNaN;
  }
  const Fit c = linear_fit(sc, va, policy.spread_points);
  est.inverse_model = c.intercept;
  est.lo = std::min(est.lo, c.intercept - c.spread);
  est.hi = std::max(est.hi, c.intercept + c.spread);
  return est;
}

LimitEstimate estimate_L(const std::function<double(double)>& gamma, const Nonlinearity& n,
                         double mass, double horizon, int samples) {
  if (!(mass > 0.0)) throw ValidationError("estimate_L: mass must be positive");
  if (samples < 6) throw InsufficientHorizon("estimate_L needs at least 6 geometric samples");
  const std::vector<double> ts = geometric_times(horizon, samples);
  auto integrand = [&](double s) { return n.f(gamma(s)); };
  std::vector<double> times, ratios;
  double acc = 0.0;
  double prev = 0.0;
  for (double t : ts) {
    const double piece = numerics::integrate(integrand, prev, t, 1e-10);
    prev = t;
    acc += piece;
    const double g = gamma(t);
    const double r = g / (mass * acc);
    if (!std::isfinite(piece) || !std::isfinite(r) || !(acc > 0.0) || !(r > 0.0)) {
      if (times.empty()) continue;  // nothing usable yet
      break;                        // overflow: keep what came before
    }
    times.push_back(t);
    ratios.push_back(r);
  }
  if (times.size() < 6)
    throw InsufficientHorizon("estimate_L: only " + std::to_string(times.size()) +
                              " usable geometric samples (need 6)");
  LimitEstimate est = extrapolate_limit(times, ratios);
  // L is nonnegative by construction; fits may undershoot slightly.
  est.value = std::max(est.value, 0.0);
  est.lo = std::max(est.lo, 0.0);
  est.hi = std::max(est.hi, 0.0);
  return est;
}

LimitEstimate ratio_limit(const Trajectory& tr, const std::function<double(std::size_t)>& ratio,
                          int samples, const ExtrapolationPolicy& policy) {
  if (tr.size() < 2) throw InsufficientHorizon("trajectory too short for a tail estimate");
  std::vector<double> times, values;
  for (double t : geometric_times(tr.horizon(), samples)) {
    const std::size_t k = index_at(tr, t);
    if (k == 0) continue;
    const double v = ratio(k);
    if (!std::isfinite(v)) continue;
    times.push_back(tr.time(k));
    values.push_back(v);
  }
  if (times.size() < 3) throw InsufficientHorizon("too few finite ratio samples");
  return extrapolate_limit(times, values, policy);
}

LimitEstimate clock_ratio(const Trajectory& tr, const Nonlinearity& n, int samples, bool absolute) {
  ExtrapolationPolicy policy;
  policy.infinite_above = 10.0;
  policy.zero_below = -kInf;
  return ratio_limit(
      tr,
      [&](std::size_t k) {
        const double x = absolute ? std::fabs(tr.x[k]) : tr.x[k];
        if (!(x > 0.0)) return kNaN;
        return eval_F(n, x) / (tr.mass * tr.time(k));
      },
      samples, policy);
}

TailStats tail_limsup(const std::vector<double>& times, const std::vector<double>& values, int windows) {
  if (times.size() != values.size() || times.empty())
    throw ValidationError("tail_limsup: times and values must be non-empty and equal length");
  if (windows < 1) throw ValidationError("tail_limsup: need at least one window");
  const double T = times.back();
  const double start = 0.5 * T;
  TailStats out;
  out.window_max.assign(static_cast<std::size_t>(windows), -kInf);
  out.window_min.assign(static_cast<std::size_t>(windows), kInf);
  std::vector<bool> seen(static_cast<std::size_t>(windows), false);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < start || !std::isfinite(values[i])) continue;
    // Window w covers [start 2^{w/W}, start 2^{(w+1)/W}).
    auto w = static_cast<int>(std::floor(windows * std::log2(t / start)));
    w = std::clamp(w, 0, windows - 1);
    const auto u = static_cast<std::size_t>(w);
    out.window_max[u] = std::max(out.window_max[u], values[i]);
    out.window_min[u] = std::min(out.window_min[u], values[i]);
    seen[u] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < windows)
    throw InsufficientHorizon("tail_limsup: some tail windows hold no samples");
  out.limsup = *std::max_element(out.window_max.begin(), out.window_max.end());
  out.liminf = *std::min_element(out.window_min.begin(), out.window_min.end());
  return out;
}

// ---------------------------------------------------------------- classification

const char* to_string(Regime r) {
  switch (r) {
    case Regime::ode_dominated:
      return "ode_dominated";
    case Regime::intermediate_low:
      return "intermediate_low";
    case Regime::indeterminate:
      return "indeterminate";
    case Regime::intermediate_high:
      return "intermediate_high";
    case Regime::forcing_dominated:
      return "forcing_dominated";
  }
  return "indeterminate";
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::deterministic_positive:
      return "deterministic_positive";
    case Mode::deterministic_envelope:
      return "deterministic_envelope";
    case Mode::brownian:
      return "brownian";
    case Mode::stable:
      return "stable";
  }
  return "deterministic_positive";
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::na:
      return "n/a";
  }
  return "n/a";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::deterministic_positive, Mode::deterministic_envelope, Mode::brownian, Mode::stable})
    if (text == to_string(m)) return m;
  throw ValidationError("unknown analysis mode '" + text + "'");
}

Regime regime_of(const LimitEstimate& L) {
  if (L.flag == LimitFlag::zero) return Regime::ode_dominated;
  if (L.flag == LimitFlag::infinite) return Regime::forcing_dominated;
  if (L.lo <= 1.0 && 1.0 <= L.hi) return Regime::indeterminate;
  if (L.hi < 1.0) return Regime::intermediate_low;
  return Regime::intermediate_high;
}

double bound_GL(double L) { return 1.0 + 1.0 / L; }
double bound_GU(double L) { return L / (L - 1.0); }

bool RegimeReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::fail; });
}

const Check* RegimeReport::find(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string RegimeReport::serialize() const {
  std::ostringstream os;
  os << "mode = " << to_string(mode) << "\n";
  os << "L = " << num(L.value) << "\n";
  os << "L_lo = " << num(L.lo) << "\n";
  os << "L_hi = " << num(L.hi) << "\n";
  os << "L_flag = " << to_string(L.flag) << "\n";
  os << "L_source = " << L_source << "\n";
  os << "regime = " << to_string(regime) << "\n";
  os << "G_L = " << num(G_L) << "\n";
  os << "G_U = " << num(G_U) << "\n";
  os << "theorems = ";
  for (std::size_t i = 0; i < theorems.size(); ++i) os << (i ? "," : "") << theorems[i];
  os << "\n";
  for (const Check& c : checks) {
    os << "checks." << c.name << " = " << to_string(c.status) << "\n";
    os << "checks." << c.name << ".measured = " << num(c.measured) << "\n";
    os << "checks." << c.name << ".bounds = [" << num(c.lo) << ", " << num(c.hi) << "]\n";
    os << "checks." << c.name << ".theorem = " << c.theorem << "\n";
  }
  for (std::size_t i = 0; i < notes.size(); ++i) os << "note." << i << " = " << notes[i] << "\n";
  return os.str();
}

namespace {

Check in_range(const std::string& name, const std::string& theorem, std::optional<double> measured,
               double lo, double hi) {
  Check c{name, CheckStatus::na, kNaN, lo, hi, theorem};
  if (!measured) return c;
  c.measured = *measured;
  c.status = (c.measured >= lo && c.measured <= hi) ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

// Value at least `floor` and still increasing.
Check diverging(const std::string& name, const std::string& theorem, std::optional<double> measured,
                std::optional<bool> rising, double floor) {
  Check c{name, CheckStatus::na, kNaN, floor, kInf, theorem};
  if (!measured) return c;
  c.measured = *measured;
  const bool up = rising.value_or(false);
  c.status = (c.measured >= floor && up) ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

std::optional<double> value_of(const std::optional<LimitEstimate>& e) {
  if (!e) return std::nullopt;
  return e->value;
}

}  // namespace

RegimeReport classify(const ClassifyInputs& in) {
  RegimeReport r;
  r.mode = in.mode;
  r.L = in.L;
  r.L_source = in.L_source;
  r.regime = regime_of(in.L);
  const double tol = in.tolerance;
  const LimitEstimate& L = in.L;
  const bool finite_high = L.flag == LimitFlag::finite && L.value > 1.0;
  r.G_L = finite_high ? bound_GL(L.value) : kNaN;
  r.G_U = finite_high ? bound_GU(L.value) : kNaN;
  // Bounds widened over the L interval.
  const double gl_lo = (L.hi > 1.0 && std::isfinite(L.hi)) ? bound_GL(L.hi) : 1.0;
  const double gu_hi = L.lo > 1.0 ? bound_GU(L.lo) : kInf;
  const bool L_above_one = r.regime == Regime::intermediate_high || r.regime == Regime::forcing_dominated;
  const double inv_L = L.flag == LimitFlag::infinite ? 0.0 : (L.lo > 0.0 ? 1.0 / L.lo : kInf);

  auto clock_tail = [&]() -> std::optional<double> {
    if (!in.clock_tail) return std::nullopt;
    return in.clock_tail->limsup;
  };
  auto sigma_up = [&]() -> std::optional<double> {
    if (!in.x_over_sigma) return std::nullopt;
    return in.x_over_sigma->limsup;
  };
  auto sigma_down = [&]() -> std::optional<double> {
    if (!in.x_over_sigma) return std::nullopt;
    return in.x_over_sigma->liminf;
  };
  auto gamma_tail = [&]() -> std::optional<double> {
    if (!in.x_over_gamma) return std::nullopt;
    return in.x_over_gamma->limsup;
  };
  const char* sharpness_note =
      "L in (0,1]: x/H may stay bounded or diverge; no sharp x/H prediction is made";

  switch (in.mode) {
    case Mode::deterministic_positive: {
      const std::optional<double> xh = value_of(in.x_over_H);
      switch (r.regime) {
        case Regime::ode_dominated:
          r.theorems = {"det.zero"};
          r.checks.push_back(in_range("clock_limit", "det.zero", value_of(in.clock), 1.0 - tol, 1.0 + tol));
          r.checks.push_back(diverging("xh_divergence", "det.zero",
                                       in.x_over_H ? std::optional<double>(in.x_over_H->last()) : std::nullopt,
                                       in.x_over_H ? std::optional<bool>(in.x_over_H->rising(4)) : std::nullopt,
                                       10.0));
          break;
        case Regime::intermediate_low:
        case Regime::indeterminate:
          r.theorems = {"det.L.F"};
          r.checks.push_back(in_range("clock_bounds", "det.L.F", value_of(in.clock), 1.0 - tol,
                                      (1.0 + L.hi) * (1.0 + tol)));
          if (L.hi > 0.0)
            r.checks.push_back(in_range("xh_lower", "det.L.F", xh, (1.0 + 1.0 / L.hi) * (1.0 - tol), kInf));
          r.notes.push_back(sharpness_note);
          break;
        case Regime::intermediate_high:
          r.theorems = {"det.L.F", "det.L.H(a)"};
          r.checks.push_back(in_range("clock_bounds", "det.L.F", value_of(in.clock), 1.0 - tol,
                                      (1.0 + L.hi) * (1.0 + tol)));
          r.checks.push_back(in_range("xh_bounds", "det.L.H(a)", xh, gl_lo * (1.0 - tol), gu_hi * (1.0 + tol)));
          break;
        case Regime::forcing_dominated: {
          r.theorems = {"det.L.H(b)"};
          r.checks.push_back(in_range("xh_limit", "det.L.H(b)", xh, 1.0 - tol, 1.0 + tol));
          Check c = diverging("clock_divergence", "det.L.H(b)",
                              in.clock ? std::optional<double>(in.clock->last()) : std::nullopt,
                              in.clock ? std::optional<bool>(in.clock->rising(3)) : std::nullopt, 10.0);
          r.checks.push_back(c);
          break;
        }
      }
      break;
    }
    case Mode::deterministic_envelope: {
      const EnvelopeRole role = in.envelope_role;
      if (!L_above_one) {
        r.notes.push_back("no envelope theorem applies unless L_f(gamma) > 1");
        break;
      }
      if (role == EnvelopeRole::gamma) {
        if (r.regime == Regime::forcing_dominated) {
          r.theorems = {"det.gamma(b)"};
          r.checks.push_back(in_range("gamma_limsup", "det.gamma(b)", gamma_tail(), 1.0 - tol, 1.0 + tol));
        } else {
          r.theorems = {"det.gamma(a)"};
          r.checks.push_back(in_range("gamma_limsup", "det.gamma(a)", gamma_tail(), 0.0, gu_hi * (1.0 + tol)));
        }
      } else if (role == EnvelopeRole::gamma_plus) {
        r.theorems = {"det.gamma.pm"};
        const double hi = inv_L == 0.0 ? tol : inv_L * (1.0 + tol);
        r.checks.push_back(in_range("gamma_plus_limsup", "det.gamma.pm", gamma_tail(), 0.0, hi));
      } else {
        r.theorems = {"det.gamma.pm"};
        r.checks.push_back(diverging("gamma_minus_divergence", "det.gamma.pm", gamma_tail(),
                                     in.gamma_ratio_rising, 10.0));
      }
      break;
    }
    case Mode::brownian: {
      switch (r.regime) {
        case Regime::ode_dominated:
          r.theorems = {"stoch.zero"};
          r.checks.push_back(in_range("clock_limsup", "stoch.zero", clock_tail(), -kInf, 1.0 + tol));
          break;
        case Regime::intermediate_low:
        case Regime::indeterminate:
          r.theorems = {"stoch.L.F"};
          r.checks.push_back(in_range("clock_limsup", "stoch.L.F", clock_tail(), -kInf, (1.0 + L.hi) * (1.0 + tol)));
          break;
        case Regime::intermediate_high: {
          r.theorems = {"stoch.L.F", "stoch.L.H"};
          r.checks.push_back(in_range("clock_limsup", "stoch.L.F", clock_tail(), -kInf, (1.0 + L.hi) * (1.0 + tol)));
          r.checks.push_back(in_range("sigma_limsup", "stoch.L.H", sigma_up(), -kInf, gu_hi * (1.0 + tol)));
          r.checks.push_back(in_range("sigma_liminf", "stoch.L.H", sigma_down(), -gu_hi * (1.0 + tol), kInf));
          if (L.hi < 2.0) r.notes.push_back("L in (1,2): recurrence is not asserted");
          break;
        }
        case Regime::forcing_dominated: {
          r.theorems = {"stoch.infty"};
          const double b = in.lil_tolerance;
          r.checks.push_back(in_range("sigma_limsup", "stoch.infty", sigma_up(), 1.0 - b, 1.0 + b));
          r.checks.push_back(in_range("sigma_liminf", "stoch.infty", sigma_down(), -1.0 - b, -1.0 + b));
          r.checks.push_back(in_range("residual_over_sigma", "stoch.infty", in.residual_over_sigma, 0.0, tol));
          break;
        }
      }
      break;
    }
    case Mode::stable: {
      if (!in.integrable) {
        r.notes.push_back("integrability of gamma^{-alpha} unknown; no stable-noise theorem applied");
        break;
      }
      if (*in.integrable) {
        if (r.regime == Regime::ode_dominated) {
          r.theorems = {"Levy0"};
          r.checks.push_back(in_range("clock_limsup", "Levy0", clock_tail(), -kInf, 1.0 + tol));
        } else if (L_above_one) {
          r.theorems = {"Levy1"};
          const double hi = inv_L == 0.0 ? tol : inv_L * (1.0 + tol);
          r.checks.push_back(in_range("gamma_limsup", "Levy1", gamma_tail(), 0.0, hi));
        } else {
          r.notes.push_back("L_f(gamma) in (0,1]: no stable-noise theorem applies");
        }
      } else if (L_above_one) {
        r.theorems = {"Levy1"};
        r.checks.push_back(diverging("gamma_divergence", "Levy1", gamma_tail(), in.gamma_ratio_rising, 10.0));
      } else {
        r.notes.push_back("divergent envelope with L_f(gamma) <= 1: no stable-noise theorem applies");
      }
      break;
    }
  }
  return r;
}

}  // namespace volterra
