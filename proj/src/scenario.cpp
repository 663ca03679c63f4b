#include "volterra/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <thread>

#include "volterra/detail/canned.hpp"
#include "volterra/errors.hpp"

namespace volterra {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTailBudget = 16384;

std::optional<double> as_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (s.find_first_not_of(" \t", used) != std::string::npos) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<double> call_arg(const std::string& text, const std::string& fn) {
  const std::regex re("^\\s*" + fn + "\\s*\\(\\s*([^)]+)\\)\\s*$");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  const auto v = as_number(m[1].str());
  if (!v) throw ValidationError(fn + "(...) needs a numeric argument, got '" + text + "'");
  return v;
}

EnvelopeRole parse_role(const std::string& s) {
  if (s == "gamma") return EnvelopeRole::gamma;
  if (s == "gamma_plus") return EnvelopeRole::gamma_plus;
  if (s == "gamma_minus") return EnvelopeRole::gamma_minus;
  throw ValidationError("unknown envelope role '" + s + "'");
}

NoiseKind parse_noise(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "brownian") return NoiseKind::brownian;
  if (s == "stable") return NoiseKind::stable;
  throw ValidationError("unknown noise.kind '" + s + "'");
}

LimitEstimate fixed_L(double v) {
  LimitEstimate e;
  e.value = e.lo = e.hi = v;
  e.flag = std::isinf(v) ? LimitFlag::infinite : (v == 0.0 ? LimitFlag::zero : LimitFlag::finite);
  return e;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// L_f of a tabulated forcing from the grid values: trapezoid cumulative of f(H).
LimitEstimate grid_L(const Scenario& s) {
  const auto H = s.problem.forcing.on_grid(s.grid);
  const Nonlinearity& n = s.problem.nonlinearity;
  const double M = s.problem.kernel.total_mass();
  std::vector<double> cum(H.size(), 0.0);
  std::size_t last = 0;
  for (std::size_t k = 1; k < H.size(); ++k) {
    if (!std::isfinite(H[k])) break;
    cum[k] = cum[k - 1] + 0.5 * s.grid.step * (n.f(H[k - 1]) + n.f(H[k]));
    last = k;
  }
  std::vector<double> times, ratios;
  for (double t : geometric_times(s.grid.time(last), 12)) {
    const auto k = static_cast<std::size_t>(std::llround(t / s.grid.step));
    if (k == 0 || k > last || !(cum[k] > 0.0)) continue;
    const double r = H[k] / (M * cum[k]);
    if (!(r > 0.0) || !std::isfinite(r)) continue;
    times.push_back(s.grid.time(k));
    ratios.push_back(r);
  }
  if (times.size() < 6) throw InsufficientHorizon("tabulated forcing too short to estimate L");
  LimitEstimate e = extrapolate_limit(times, ratios);
  e.value = std::max(e.value, 0.0);
  e.lo = std::max(e.lo, 0.0);
  e.hi = std::max(e.hi, 0.0);
  return e;
}

LimitEstimate auto_L(const Scenario& s, std::string& source) {
  const RunConfig& c = s.config;
  const Nonlinearity& n = s.problem.nonlinearity;
  const double M = s.problem.kernel.total_mass();
  const double horizon = c.L_horizon > 0.0 ? c.L_horizon : c.T;
  switch (s.mode) {
    case Mode::deterministic_positive:
      if (s.problem.forcing.is_zero()) {
        source = "zero forcing";
        return fixed_L(0.0);
      }
      if (c.forcing_kind == "example") {
        source = "estimated from tabulated H";
        return grid_L(s);
      }
      source = "estimated from H";
      return estimate_L([&](double t) { return s.problem.forcing.H(t); }, n, M, horizon);
    case Mode::deterministic_envelope:
    case Mode::stable:
      source = "estimated from envelope";
      return estimate_L(*s.envelope, n, M, horizon);
    case Mode::brownian: {
      source = "estimated from Sigma";
      const SigmaEnvelope& sg = *s.sigma;
      return estimate_L([&](double t) { return sg.defined_at(t) ? sg(t) : 0.0; }, n, M, horizon);
    }
  }
  return fixed_L(kNaN);
}

// Indices in the tail half [K/2, K], thinned to at most kTailBudget points.
std::vector<std::size_t> tail_indices(std::size_t size) {
  std::vector<std::size_t> out;
  if (size < 2) return out;
  const std::size_t K = size - 1;
  const std::size_t first = K / 2;
  const std::size_t stride = std::max<std::size_t>(1, (K - first + 1) / kTailBudget);
  for (std::size_t k = first; k <= K; k += stride) out.push_back(k);
  if (out.back() != K) out.push_back(K);
  return out;
}

template <class Fn>
std::optional<TailStats> tail_of(const Trajectory& tr, Fn value) {
  std::vector<double> times, values;
  for (std::size_t k : tail_indices(tr.size())) {
    if (k == 0) continue;
    times.push_back(tr.time(k));
    values.push_back(value(k));
  }
  if (times.empty()) return std::nullopt;
  try {
    return tail_limsup(times, values);
  } catch (const InsufficientHorizon&) {
    return std::nullopt;
  }
}

bool windows_rising(const TailStats& t, std::size_t count) {
  const auto& w = t.window_max;
  if (w.size() < count) return false;
  for (std::size_t i = w.size() - count + 1; i < w.size(); ++i)
    if (!(w[i] > w[i - 1])) return false;
  return true;
}

double clock_value(const Nonlinearity& n, double x, double mass, double t) {
  if (!(x > 0.0) || !(t > 0.0)) return kNaN;
  try {
    return eval_F(n, x) / (mass * t);
  } catch (const Error&) {
    return kNaN;
  }
}

void put_estimate(Metrics& m, const std::string& key, const LimitEstimate& e, std::size_t rising) {
  m[key] = e.value;
  m[key + "_lo"] = e.lo;
  m[key + "_hi"] = e.hi;
  m[key + "_last"] = e.last();
  m[key + "_rising"] = e.rising(rising) ? 1.0 : 0.0;
  m[key + "_infinite"] = e.flag == LimitFlag::infinite ? 1.0 : 0.0;
}

void put_tail(Metrics& m, const std::string& key, const std::optional<TailStats>& t) {
  if (!t) return;
  m[key + "_limsup"] = t->limsup;
  m[key + "_liminf"] = t->liminf;
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  f << text;
}

std::string checks_text(const std::string& prefix, const std::vector<Check>& checks) {
  std::ostringstream o;
  for (const Check& c : checks) {
    o << prefix << c.name << " = " << to_string(c.status) << "\n";
    o << prefix << c.name << ".measured = " << fmt(c.measured) << "\n";
    o << prefix << c.name << ".bounds = [" << fmt(c.lo) << ", " << fmt(c.hi) << "]\n";
    if (!c.theorem.empty()) o << prefix << c.name << ".theorem = " << c.theorem << "\n";
  }
  return o.str();
}

bool none_failed(const std::vector<Check>& checks) {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == CheckStatus::fail; });
}

std::string metrics_text(const Metrics& m) {
  std::ostringstream o;
  for (const auto& [k, v] : m) o << "metric." << k << " = " << fmt(v) << "\n";
  return o.str();
}

std::string header_text(const Scenario& s, const char* command) {
  const RunConfig& c = s.config;
  std::ostringstream o;
  o << "run = " << c.name << "\n";
  o << "command = " << command << "\n";
  o << "kernel.mass = " << fmt(s.problem.kernel.total_mass()) << "\n";
  o << "nonlinearity = " << s.problem.nonlinearity.describe() << "\n";
  o << "forcing = " << s.problem.forcing.description() << "\n";
  o << "noise = " << to_string(s.noise) << "\n";
  if (s.noise != NoiseKind::none) o << "seed = " << c.seed << "\n";
  if (s.envelope) o << "envelope = " << s.envelope->description() << " (" << to_string(s.role) << ")\n";
  o << "psi = " << fmt(s.problem.psi) << "\n";
  o << "grid.dt = " << fmt(s.grid.step) << "\n";
  o << "grid.steps = " << s.grid.steps << "\n";
  o << "grid.T = " << fmt(s.grid.horizon()) << "\n";
  return o.str();
}

Check fraction_check(const std::string& name, const std::string& theorem, double fraction, double required) {
  Check c{name, fraction >= required ? CheckStatus::pass : CheckStatus::fail, fraction, required, 1.0, theorem};
  return c;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

Scenario build_scenario(const RunConfig& cfg) {
  const RunConfig& c = cfg;
  const UniformGrid grid = UniformGrid::covering(c.T, c.dt);
  Mode mode = Mode::deterministic_positive;

  std::vector<Atom> atoms;
  for (const auto& [loc, mass] : c.atoms) atoms.push_back(Atom{loc, mass});
  Density density = c.density == "none"             ? Density::none()
                    : c.density == "inverse_square" ? Density::inverse_square()
                                                    : Density::expression(c.density, c.cutoff);
  MeasureKernel kernel(std::move(atoms), std::move(density));

  Nonlinearity n = c.family == "power"     ? Nonlinearity::power(c.beta)
                   : c.family == "logtype" ? Nonlinearity::logtype()
                   : c.family == "custom"  ? Nonlinearity::custom(c.f_expr, c.phi_expr)
                                           : throw ValidationError("unknown nonlinearity.family '" + c.family + "'");

  const NoiseKind noise = parse_noise(c.noise_kind);
  if (c.mode == "auto") {
    mode = noise == NoiseKind::brownian ? Mode::brownian
             : noise == NoiseKind::stable ? Mode::stable
             : !c.envelope.empty()          ? Mode::deterministic_envelope
                                            : Mode::deterministic_positive;
  } else {
    mode = parse_mode(c.mode);
  }
  const bool stochastic_mode = mode == Mode::brownian || mode == Mode::stable;
  if ((mode == Mode::brownian) != (noise == NoiseKind::brownian) ||
      (mode == Mode::stable) != (noise == NoiseKind::stable))
    throw ValidationError(std::string("analysimode '") + to_string(mode) + "' does not match noise.kind '" +
                          c.noise_kind + "'");
  if (mode == Mode::deterministic_positive && !n.flags().positivity)
    throw ValidationError("deterministic_positive mode needs f > 0 on (0, inf)");

  std::optional<double> psi = c.psi;
  ForcingTerm forcing;
  if (c.forcing_kind == "zero") {
    forcing = ForcingTerm::zero();
  } else if (c.forcing_kind == "builtin") {
    forcing = ForcingTerm::builtin(c.forcing_name, c.forcing_params);
  } else if (c.forcing_kind == "custom-expr") {
    forcing = ForcingTerm::expression(c.forcing_expr);
  } else if (c.forcing_kind == "example") {
    if (stochastic_mode) throw ValidationError("example forcing is deterministic only");
    const Expr target = Expr::parse(c.forcing_target, "t");
    const double x0 = target(0.0);
    if (psi && std::fabs(*psi - x0) > 1e-12 * std::max(1.0, std::fabs(x0)))
      throw ValidationError("initial.psi must equal target(0) for example forcing");
    psi = x0;
    forcing = example_forcing(n, target, kernel, grid, "example(" + c.forcing_target + ")");
  } else {
    throw ValidationError("unknown forcing.kind '" + c.forcing_kind + "'");
  }
  if (mode == Mode::deterministic_positive && !forcing.positive())
    throw ValidationError("deterministic_positive mode needs H >= 0");
  const double x0 = psi.value_or(1.0);
  if (mode == Mode::deterministic_positive && !(x0 >= 0.0))
    throw ValidationError("deterministic_positive mode needs psi >= 0");
  Scenario s{cfg, grid, Problem{std::move(kernel), std::move(n), std::move(forcing), x0}};
  s.mode = mode;
  s.noise = noise;

  if (s.noise == NoiseKind::brownian) {
    if (const auto v = as_number(c.sigma)) {
      s.sigma = SigmaEnvelope::constant(*v);
      s.sigma_constant = true;
    } else {
      static const std::regex power_re("^\\s*t\\s*\\^\\s*([0-9.eE+-]+)\\s*$");
      std::smatch m;
      if (std::regex_match(c.sigma, m, power_re))
        s.sigma = SigmaEnvelope::power(std::stod(m[1].str()));
      else
        s.sigma = SigmaEnvelope::expression(c.sigma);
    }
  } else if (s.noise == NoiseKind::stable) {
    if (!(c.alpha > 0.0 && c.alpha <= 2.0)) throw ValidationError("noise.alpha must be in (0, 2]");
    if (!(c.scale > 0.0)) throw ValidationError("noise.scale must be positive");
    if (!(c.skew >= -1.0 && c.skew <= 1.0)) throw ValidationError("noise.skew must be in [-1, 1]");
  }

  s.role = parse_role(c.envelope_role);
  if (!c.envelope.empty()) {
    if (const auto eps = call_arg(c.envelope, "power"))
      s.envelope = Envelope::power(*eps, s.role);
    else if (const auto a = call_arg(c.envelope, "clock"))
      s.envelope = Envelope::clock(s.problem.nonlinearity, *a, s.problem.kernel.total_mass(), s.role);
    else
      s.envelope = Envelope::expression(c.envelope, s.role);
  }
  if ((s.mode == Mode::deterministic_envelope || s.mode == Mode::stable) && !s.envelope)
    throw ValidationError(std::string(to_string(s.mode)) + " mode needs analysis.envelope");
  if (!(c.tolerance > 0.0) || !(c.lil_tolerance > 0.0)) throw ValidationError("tolerances must be positive");
  if (!(c.required_fraction > 0.0 && c.required_fraction <= 1.0))
    throw ValidationError("analysis.required_fraction must be in (0, 1]");

  if (c.L == "auto") {
    s.L = auto_L(s, s.L_source);
  } else {
    const auto v = c.L == "inf" ? std::optional<double>(kInf) : as_number(c.L);
    if (!v || !(*v >= 0.0)) throw ValidationError("analysis.L must be auto, inf or a number >= 0");
    s.L = fixed_L(*v);
    s.L_source = "analytic";
    try {
      std::string src;
      const LimitEstimate e = auto_L(s, src);
      s.notes.push_back("estimator (" + src + ") gives L = " + fmt(e.value) + " in [" + fmt(e.lo) + ", " +
                        fmt(e.hi) + "], flag " + to_string(e.flag));
    } catch (const Error& e) {
      s.notes.push_back(std::string("estimator unavailable: ") + e.what());
    }
  }
  return s;
}

RunResult run_path(const Scenario& s, std::uint64_t stream) {
  const RunConfig& c = s.config;
  const Nonlinearity& n = s.problem.nonlinearity;
  RunResult out;
  Trajectory& tr = out.trajectory;
  if (s.noise == NoiseKind::none) {
    tr = solve_deterministic(s.problem, s.grid);
  } else {
    const NoisePath z = s.noise == NoiseKind::brownian
                            ? sample_brownian([&](double t) { return s.sigma->sigma(t); }, s.grid, c.seed, stream)
                            : sample_stable(c.alpha, c.scale, c.skew, s.grid, c.seed, stream);
    tr = solve_stochastic(s.problem, z, {});
  }
  const double M = tr.mass;

  ClassifyInputs in;
  in.mode = s.mode;
  in.L = s.L;
  in.L_source = s.L_source;
  in.tolerance = c.tolerance;
  in.lil_tolerance = c.lil_tolerance;
  in.envelope_role = s.role;
  Metrics& m = out.path.metrics;

  auto try_estimate = [&](auto fn) -> std::optional<LimitEstimate> {
    try {
      return fn();
    } catch (const InsufficientHorizon&) {
      return std::nullopt;
    }
  };

  switch (s.mode) {
    case Mode::deterministic_positive: {
      in.clock = try_estimate([&] { return clock_ratio(tr, n); });
      if (!s.problem.forcing.is_zero())
        in.x_over_H = try_estimate([&] {
          return ratio_limit(tr, [&](std::size_t k) { return tr.H[k] > 0.0 ? tr.x[k] / tr.H[k] : kNaN; });
        });
      if (in.clock) put_estimate(m, "clock", *in.clock, 3);
      if (in.x_over_H) put_estimate(m, "xh", *in.x_over_H, 4);
      break;
    }
    case Mode::deterministic_envelope: {
      const Envelope& g = *s.envelope;
      in.x_over_gamma = tail_of(tr, [&](std::size_t k) { return std::fabs(tr.x[k]) / g(tr.time(k)); });
      if (in.x_over_gamma) in.gamma_ratio_rising = windows_rising(*in.x_over_gamma, 3);
      in.clock = try_estimate([&] { return clock_ratio(tr, n, 12, true); });
      if (in.clock) put_estimate(m, "clock", *in.clock, 3);
      put_tail(m, "gamma", in.x_over_gamma);
      break;
    }
    case Mode::brownian:
    case Mode::stable: {
      in.clock_tail = tail_of(tr, [&](std::size_t k) { return clock_value(n, std::fabs(tr.x[k]), M, tr.time(k)); });
      put_tail(m, "clock", in.clock_tail);
      double mx = 0.0;
      for (double v : tr.x) mx = std::max(mx, std::fabs(v));
      m["max_abs_x"] = mx;
      if (s.mode == Mode::brownian) {
        const SigmaEnvelope& sg = *s.sigma;
        in.x_over_sigma = tail_of(tr, [&](std::size_t k) {
          const double t = tr.time(k);
          return sg.defined_at(t) ? tr.x[k] / sg(t) : kNaN;
        });
        const std::size_t K = tr.size() - 1;
        if (sg.defined_at(tr.time(K))) in.residual_over_sigma = std::fabs(tr.x[K] - tr.Z[K]) / sg(tr.time(K));
        put_tail(m, "sigma", in.x_over_sigma);
        if (in.residual_over_sigma) m["residual_over_sigma"] = *in.residual_over_sigma;
      } else {
        const Envelope& g = *s.envelope;
        in.x_over_gamma = tail_of(tr, [&](std::size_t k) { return std::fabs(tr.x[k]) / g(tr.time(k)); });
        if (in.x_over_gamma) in.gamma_ratio_rising = windows_rising(*in.x_over_gamma, 3);
        in.integrable = envelope_integrability(g, c.alpha, c.T) == Integrability::finite;
        m["integrable"] = *in.integrable ? 1.0 : 0.0;
        put_tail(m, "gamma", in.x_over_gamma);
      }
      break;
    }
  }
  m["L"] = s.L.value;
  m["L_lo"] = s.L.lo;
  m["L_hi"] = s.L.hi;
  m["reached"] = tr.horizon();
  m["truncated"] = tr.truncated ? 1.0 : 0.0;
  m["x_final"] = tr.x.back();

  out.path.report = classify(in);
  for (const auto& note : s.notes) out.path.report.notes.push_back(note);
  if (tr.truncated) out.path.report.notes.push_back("solution overflowed; diagnostics use the truncated horizon " + fmt(tr.horizon()));
  out.path.stream = stream;
  out.path.truncated = tr.truncated;
  out.path.reached = tr.horizon();
  return out;
}

bool EnsembleResult::all_passed() const { return none_failed(checks); }

EnsembleResult run_ensemble(const Scenario& s, unsigned workers) {
  const std::uint64_t N = s.config.paths;
  if (N < 2) throw ValidationError("ensemble needs noise.paths >= 2");
  if (s.noise == NoiseKind::none) throw ValidationError("ensemble needs a noise.kind");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, N));

  EnsembleResult e;
  e.paths.resize(N);
  std::vector<std::exception_ptr> errors(N);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t i = next++; i < N; i = next++) {
      try {
        e.paths[i] = run_path(s, i).path;  // trajectory dropped here
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  // Aggregates, in path order.
  const double need = s.config.required_fraction;
  const double dN = static_cast<double>(N);
  const RegimeReport& first = e.paths.front().report;
  for (const Check& proto : first.checks) {
    std::size_t passed = 0, applicable = 0;
    for (const auto& p : e.paths) {
      const Check* c = p.report.find(proto.name);
      if (!c || c->status == CheckStatus::na) continue;
      ++applicable;
      if (c->status == CheckStatus::pass) ++passed;
    }
    const double frac = applicable ? static_cast<double>(passed) / dN : kNaN;
    e.metrics["fraction." + proto.name] = frac;
    const bool pooled = proto.theorem == "stoch.infty" && (proto.name == "sigma_limsup" || proto.name == "sigma_liminf");
    if (pooled) {
      // Ensemble limsup: the level that a fraction `need` of the per-path limsups stays below
      // (liminf: the mirror quantile). The plain maximum over paths grows with the ensemble size.
      std::vector<double> v;
      for (const auto& p : e.paths) {
        const Check* c = p.report.find(proto.name);
        if (c && c->status != CheckStatus::na) v.push_back(c->measured);
      }
      const bool upper = proto.name == "sigma_limsup";
      const double q = v.empty() ? kNaN : quantile(v, upper ? need : 1.0 - need);
      e.metrics["ensemble." + proto.name] = q;
      Check c{proto.name, (q >= proto.lo && q <= proto.hi) ? CheckStatus::pass : CheckStatus::fail, q, proto.lo,
              proto.hi, proto.theorem};
      if (v.empty()) c.status = CheckStatus::na;
      e.checks.push_back(c);
    } else if (applicable) {
      e.checks.push_back(fraction_check(proto.name, proto.theorem, frac, need));
    } else {
      e.checks.push_back(Check{proto.name, CheckStatus::na, kNaN, need, 1.0, proto.theorem});
    }
  }
  if (s.mode == Mode::brownian && s.sigma_constant) {
    std::size_t big = 0;
    for (const auto& p : e.paths)
      if (p.metrics.at("max_abs_x") >= 10.0) ++big;
    const double frac = static_cast<double>(big) / dN;
    e.metrics["fraction.unbounded"] = frac;
    e.checks.push_back(fraction_check("unbounded", "sigma_const", frac, need));
  }
  std::map<std::string, std::vector<double>> columns;
  for (const auto& p : e.paths)
    for (const auto& [k, v] : p.metrics) columns[k].push_back(v);
  for (const auto& [k, v] : columns) {
    e.metrics["median." + k] = median(v);
    e.metrics["max." + k] = *std::max_element(v.begin(), v.end());
    e.metrics["min." + k] = *std::min_element(v.begin(), v.end());
  }
  e.metrics["paths"] = dN;
  e.notes = first.notes;
  return e;
}

ConvergenceResult run_convergence(const Scenario& s) {
  const auto levels = static_cast<int>(s.config.levels);
  if (levels < 3) throw ValidationError("convergence.levels must be at least 3");
  ConvergenceResult r;
  if (s.noise == NoiseKind::none) {
    r.report = refine_and_compare(s.problem, s.grid, levels);
  } else {
    // Strong order is a mean statement: average the level differences over noise.paths streams.
    const std::size_t top = std::size_t{1} << (levels - 1);
    const UniformGrid fine(s.grid.step / static_cast<double>(top), s.grid.steps * top);
    const std::uint64_t paths = std::max<std::uint64_t>(1, s.config.paths);
    for (std::uint64_t i = 0; i < paths; ++i) {
      const NoisePath z = s.noise == NoiseKind::brownian
                              ? sample_brownian([&](double t) { return s.sigma->sigma(t); }, fine, s.config.seed, i)
                              : sample_stable(s.config.alpha, s.config.scale, s.config.skew, fine, s.config.seed, i);
      const ConvergenceReport one = refine_and_compare(s.problem, s.grid, levels, {}, &z);
      if (i == 0) {
        r.report = one;
      } else {
        for (std::size_t j = 0; j < one.differences.size(); ++j) r.report.differences[j] += one.differences[j];
      }
    }
    for (double& d : r.report.differences) d /= static_cast<double>(paths);
    fit_orders(r.report);
    r.metrics["paths"] = static_cast<double>(paths);
  }
  const double worst = *std::max_element(r.report.differences.begin(), r.report.differences.end());
  r.exact = worst <= 1e-12;
  r.metrics["order"] = r.report.fitted_order;
  r.metrics["max_difference"] = worst;
  r.metrics["exact"] = r.exact ? 1.0 : 0.0;
  const bool deterministic = s.noise == NoiseKind::none;
  r.check.name = "order";
  r.check.theorem = "";
  r.check.measured = r.report.fitted_order;
  r.check.lo = deterministic ? 1.8 : 0.9;
  r.check.hi = deterministic ? 2.2 : kInf;
  if (r.exact)
    r.check.status = CheckStatus::pass;
  else if (s.noise == NoiseKind::stable)
    r.check.status = CheckStatus::na;
  else
    r.check.status = (r.check.measured >= r.check.lo && r.check.measured <= r.check.hi) ? CheckStatus::pass
                                                                                          : CheckStatus::fail;
  return r;
}

std::vector<Check> evaluate_assertions(const RunConfig& cfg, const Metrics& metrics) {
  std::vector<Check> out;
  for (const auto& [name, band] : cfg.assertions) {
    Check c{name, CheckStatus::fail, kNaN, band.first, band.second, ""};
    const auto it = metrics.find(name);
    if (it != metrics.end()) {
      c.measured = it->second;
      if (c.measured >= c.lo && c.measured <= c.hi) c.status = CheckStatus::pass;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::size_t> snapshot_indices(const Trajectory& tr, std::size_t count) {
  std::vector<std::size_t> idx{0};
  if (tr.size() < 2) return idx;
  const std::size_t K = tr.size() - 1;
  const double lo = std::log(tr.grid.step);
  const double hi = std::log(tr.time(K));
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 1.0;
    const double t = std::exp(lo + frac * (hi - lo));
    auto k = static_cast<std::size_t>(std::llround(t / tr.grid.step));
    k = std::clamp<std::size_t>(k, 1, K);
    if (k != idx.back()) idx.push_back(k);
  }
  if (idx.back() != K) idx.push_back(K);
  return idx;
}

std::string trajectory_csv(const Scenario& s, const Trajectory& tr, bool full_dump) {
  const Nonlinearity& n = s.problem.nonlinearity;
  const bool absolute = s.mode != Mode::deterministic_positive;
  const bool has_H = !s.problem.forcing.is_zero();
  std::vector<std::size_t> idx;
  if (full_dump) {
    idx.resize(tr.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  } else {
    idx = snapshot_indices(tr, s.config.snapshots);
  }
  std::ostringstream o;
  o << "t,x,H,Z,M_t,clock_ratio,xh_ratio,xsigma_ratio\n";
  for (std::size_t k : idx) {
    const double t = tr.time(k);
    const double x = tr.x[k];
    const double clock = clock_value(n, absolute ? std::fabs(x) : x, tr.mass, t);
    const double xh = has_H && tr.H[k] != 0.0 ? x / tr.H[k] : kNaN;
    const double xs = s.sigma && t > 0.0 && s.sigma->defined_at(t) ? x / (*s.sigma)(t) : kNaN;
    o << csv_num(t) << ',' << csv_num(x) << ',' << csv_num(tr.H[k]) << ','
      << (tr.stochastic ? csv_num(tr.Z[k]) : std::string()) << ',' << csv_num(s.problem.kernel.cumulative(t))
      << ',' << csv_num(clock) << ',' << csv_num(xh) << ',' << csv_num(xs) << '\n';
  }
  return o.str();
}

std::string run_report_text(const Scenario& s, const RunResult& r, const std::vector<Check>& asserts) {
  std::ostringstream o;
  o << header_text(s, "solve");
  if (s.noise != NoiseKind::none) o << "stream = " << r.path.stream << "\n";
  o << "reached = " << fmt(r.path.reached) << "\n";
  o << "truncated = " << (r.path.truncated ? "true" : "false") << "\n";
  o << "recursive = " << (r.trajectory.recursive ? "true" : "false") << "\n";
  o << r.path.report.serialize();
  o << metrics_text(r.path.metrics);
  o << checks_text("assert.", asserts);
  const bool ok = r.path.report.all_passed() && none_failed(asserts);
  o << "status = " << (ok ? "pass" : "fail") << "\n";
  return o.str();
}

std::string ensemble_report_text(const Scenario& s, const EnsembleResult& e, const std::vector<Check>& asserts) {
  std::ostringstream o;
  o << header_text(s, "ensemble");
  o << "paths = " << e.paths.size() << "\n";
  o << "required_fraction = " << fmt(s.config.required_fraction) << "\n";
  const RegimeReport& first = e.paths.front().report;
  o << "mode = " << to_string(first.mode) << "\n";
  o << "L = " << fmt(first.L.value) << "\n";
  o << "L_lo = " << fmt(first.L.lo) << "\n";
  o << "L_hi = " << fmt(first.L.hi) << "\n";
  o << "L_flag = " << to_string(first.L.flag) << "\n";
  o << "L_source = " << first.L_source << "\n";
  o << "regime = " << to_string(first.regime) << "\n";
  o << "G_L = " << fmt(first.G_L) << "\n";
  o << "G_U = " << fmt(first.G_U) << "\n";
  o << checks_text("checks.", e.checks);
  o << metrics_text(e.metrics);
  for (std::size_t i = 0; i < e.notes.size(); ++i) o << "note." << i << " = " << e.notes[i] << "\n";
  o << checks_text("assert.", asserts);
  o << "status = " << (e.all_passed() && none_failed(asserts) ? "pass" : "fail") << "\n";
  return o.str();
}

std::string ensemble_csv(const EnsembleResult& e) {
  std::vector<std::string> metric_names, check_names;
  for (const auto& [k, v] : e.paths.front().metrics) metric_names.push_back(k);
  for (const auto& c : e.paths.front().report.checks) check_names.push_back(c.name);
  std::ostringstream o;
  o << "stream";
  for (const auto& k : metric_names) o << ',' << k;
  for (const auto& k : check_names) o << ",check." << k;
  o << '\n';
  for (const auto& p : e.paths) {
    o << p.stream;
    for (const auto& k : metric_names) {
      const auto it = p.metrics.find(k);
      o << ',' << (it == p.metrics.end() ? std::string() : csv_num(it->second));
    }
    for (const auto& k : check_names) {
      const Check* c = p.report.find(k);
      o << ',' << (c ? to_string(c->status) : "");
    }
    o << '\n';
  }
  return o.str();
}

std::string convergence_report_text(const Scenario& s, const ConvergenceResult& c, const std::vector<Check>& asserts) {
  std::ostringstream o;
  o << header_text(s, "convergence");
  const auto& r = c.report;
  for (std::size_t i = 0; i < r.steps.size(); ++i) o << "level." << i << ".dt = " << fmt(r.steps[i]) << "\n";
  for (std::size_t i = 0; i < r.differences.size(); ++i) o << "difference." << i << " = " << fmt(r.differences[i]) << "\n";
  for (std::size_t i = 0; i < r.orders.size(); ++i) o << "order." << i << " = " << fmt(r.orders[i]) << "\n";
  o << "fitted_order = " << fmt(r.fitted_order) << "\n";
  o << "exact = " << (c.exact ? "true" : "false") << "\n";
  if (c.exact) o << "note.0 = all levels agree to rounding; the observed order is not defined\n";
  o << checks_text("checks.", {c.check});
  o << checks_text("assert.", asserts);
  o << "status = " << (c.check.status != CheckStatus::fail && none_failed(asserts) ? "pass" : "fail") << "\n";
  return o.str();
}

std::vector<std::string> canned_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, text] : detail::canned_table()) ids.push_back(id);
  return ids;
}

std::string canned_config(const std::string& id) {
  for (const auto& [name, text] : detail::canned_table())
    if (name == id) return text;
  std::string known;
  for (const auto& k : canned_ids()) known += (known.empty() ? "" : ", ") + k;
  throw ValidationError("unknown example id '" + id + "' (known: " + known + ")");
}

namespace {

RunConfig with_seed(RunConfig cfg, const CommandOptions& opt) {
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

}  // namespace

int cmd_solve(const RunConfig& cfg0, const CommandOptions& opt, std::ostream& log) {
  const Scenario s = build_scenario(with_seed(cfg0, opt));
  const RunResult r = run_path(s, 0);
  const auto asserts = evaluate_assertions(s.config, r.path.metrics);
  const std::string csv = trajectory_csv(s, r.trajectory, opt.full_dump);
  const std::string report = run_report_text(s, r, asserts);
  const auto dir = prepare_dir(opt.out_dir);
  write_file(dir / "trajectory.csv", csv);
  write_file(dir / "report.txt", report);
  const bool ok = r.path.report.all_passed() && none_failed(asserts);
  log << s.config.name << ": regime " << to_string(r.path.report.regime) << ", L = " << fmt(s.L.value) << " ("
      << to_string(s.L.flag) << "), " << (ok ? "pass" : "FAIL") << " -> " << (dir / "report.txt").string() << "\n";
  for (const Check& c : r.path.report.checks)
    log << "  check " << c.name << ": " << to_string(c.status) << " (" << fmt(c.measured) << " in [" << fmt(c.lo)
        << ", " << fmt(c.hi) << "])\n";
  for (const Check& c : asserts)
    log << "  assert " << c.name << ": " << to_string(c.status) << " (" << fmt(c.measured) << " in [" << fmt(c.lo)
        << ", " << fmt(c.hi) << "])\n";
  return ok ? 0 : 2;
}

int cmd_ensemble(const RunConfig& cfg0, const CommandOptions& opt, std::ostream& log) {
  const Scenario s = build_scenario(with_seed(cfg0, opt));
  if (s.config.paths < 2) throw ValidationError("ensemble needs noise.paths >= 2");
  const EnsembleResult e = run_ensemble(s, opt.workers);
  const auto asserts = evaluate_assertions(s.config, e.metrics);
  const std::string report = ensemble_report_text(s, e, asserts);
  const std::string csv = ensemble_csv(e);
  const auto dir = prepare_dir(opt.out_dir);
  write_file(dir / "report.txt", report);
  write_file(dir / "ensemble.csv", csv);
  const bool ok = e.all_passed() && none_failed(asserts);
  log << s.config.name << ": " << e.paths.size() << " paths, regime "
      << to_string(e.paths.front().report.regime) << ", " << (ok ? "pass" : "FAIL") << " -> "
      << (dir / "report.txt").string() << "\n";
  for (const Check& c : e.checks)
    log << "  check " << c.name << ": " << to_string(c.status) << " (" << fmt(c.measured) << ")\n";
  for (const Check& c : asserts)
    log << "  assert " << c.name << ": " << to_string(c.status) << " (" << fmt(c.measured) << " in [" << fmt(c.lo)
        << ", " << fmt(c.hi) << "])\n";
  return ok ? 0 : 2;
}

int cmd_convergence(const RunConfig& cfg0, const CommandOptions& opt, std::ostream& log) {
  const Scenario s = build_scenario(with_seed(cfg0, opt));
  const ConvergenceResult c = run_convergence(s);
  const auto asserts = evaluate_assertions(s.config, c.metrics);
  const std::string report = convergence_report_text(s, c, asserts);
  const auto dir = prepare_dir(opt.out_dir);
  write_file(dir / "report.txt", report);
  const bool ok = c.check.status != CheckStatus::fail && none_failed(asserts);
  log << s.config.name << ": fitted order " << fmt(c.report.fitted_order) << (c.exact ? " (exact to rounding)" : "")
      << ", " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int cmd_reproduce(const std::string& id, const CommandOptions& opt, std::ostream& log) {
  const RunConfig cfg = parse_config(canned_config(id));
  const int code = cfg.paths >= 2 ? cmd_ensemble(cfg, opt, log) : cmd_solve(cfg, opt, log);
  write_file(std::filesystem::path(opt.out_dir) / "config.cfg", serialize_config(with_seed(cfg, opt)));
  return code;
}

}  // namespace volterra
