#include "volterra/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "volterra/convolution.hpp"
#include "volterra/errors.hpp"
#include "volterra/expr.hpp"

namespace volterra {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void need_params(const std::string& name, const std::vector<double>& p, std::size_t count) {
  if (p.size() != count)
    throw ValidationError("forcing '" + name + "' takes " + std::to_string(count) +
                          " parameter(s), got " + std::to_string(p.size()));
}

}  // namespace

ForcingTerm::ForcingTerm() : H_([](double) { return 0.0; }), h_([](double) { return 0.0; }) {}

ForcingTerm ForcingTerm::zero() { return ForcingTerm{}; }

ForcingTerm ForcingTerm::builtin(const std::string& name, const std::vector<double>& params) {
  ForcingTerm out;
  out.zero_ = false;
  out.positive_ = true;
  if (name == "zero") {
    need_params(name, params, 0);
    return zero();
  }
  if (name == "log1p") {
    need_params(name, params, 0);
    out.H_ = [](double t) { return std::log1p(t); };
    out.h_ = [](double t) { return 1.0 / (1.0 + t); };
    out.description_ = "log1p";
    return out;
  }
  if (name == "power") {
    need_params(name, params, 1);
    const double p = params[0];
    if (!(p > 0.0)) throw ValidationError("forcing power(p) needs p > 0");
    out.H_ = [p](double t) { return std::pow(t, p); };
    out.h_ = [p](double t) { return p * std::pow(t, p - 1.0); };
    out.description_ = "power(" + fmt(p) + ")";
    return out;
  }
  if (name == "exp_sqrt") {
    need_params(name, params, 1);
    const double L = params[0];
    if (!(L > 0.0)) throw ValidationError("forcing exp_sqrt(L) needs L > 0");
    // Shifted by the t=0 value so H(0) = 0; for L = 1/2 the shift is exactly e.
    const double h0 = std::exp(std::sqrt(2.0 * L));
    out.H_ = [L, h0](double t) { return std::exp(std::sqrt(2.0 * L * (t + 1.0))) - h0; };
    out.h_ = [L](double t) {
      const double r = std::sqrt(2.0 * L * (t + 1.0));
      return std::exp(r) * L / r;
    };
    out.description_ = "exp_sqrt(" + fmt(L) + ")";
    return out;
  }
  if (name == "exp_power") {
    need_params(name, params, 1);
    const double a = params[0];
    if (!(a > 0.0)) throw ValidationError("forcing exp_power(alpha) needs alpha > 0");
    const double h0 = std::exp(std::pow(2.0, a));
    out.H_ = [a, h0](double t) { return std::exp(std::pow(2.0 * (t + 1.0), a)) - h0; };
    out.h_ = [a](double t) {
      const double u = std::pow(2.0 * (t + 1.0), a);
      return std::exp(u) * a * u / (t + 1.0);
    };
    out.description_ = "exp_power(" + fmt(a) + ")";
    return out;
  }
  throw ValidationError("unknown builtin forcing '" + name + "'");
}

ForcingTerm ForcingTerm::expression(const std::string& text) {
  const Expr e = Expr::parse(text, "t");
  const double h0 = e(0.0);
  if (!(std::fabs(h0) <= 1e-12))
    throw ValidationError("forcing expression must vanish at t=0, got H(0)=" + fmt(h0));
  ForcingTerm out;
  out.zero_ = false;
  out.H_ = e;
  out.h_ = nullptr;
  out.description_ = text;
  out.positive_ = true;
  for (int i = 0; i <= 256; ++i) {
    const double t = 1000.0 * i / 256.0;
    if (e(t) < 0.0) {
      out.positive_ = false;
      break;
    }
  }
  return out;
}

ForcingTerm ForcingTerm::tabulated(const UniformGrid& grid, std::vector<double> values,
                                   std::string description) {
  if (values.size() != grid.size())
    throw ValidationError("tabulated forcing: value count does not match the grid");
  if (values[0] != 0.0) throw ValidationError("tabulated forcing must start at 0");
  ForcingTerm out;
  out.zero_ = false;
  out.description_ = std::move(description);
  out.positive_ = std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0; });
  out.table_grid_ = grid;
  out.table_ = std::move(values);
  out.h_ = nullptr;
  out.H_ = [g = grid, tab = out.table_](double t) {
    if (t < 0.0 || t > g.horizon() * (1.0 + 1e-12))
      throw DomainError("tabulated forcing evaluated outside [0, " + fmt(g.horizon()) + "]");
    const double pos = std::min(t / g.step, static_cast<double>(g.steps));
    const auto k = std::min(static_cast<std::size_t>(pos), g.steps - 1);
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * tab[k] + w * tab[k + 1];
  };
  return out;
}

double ForcingTerm::H(double t) const {
  if (t < 0.0) throw DomainError("H(t) needs t >= 0");
  return H_(t);
}

std::optional<double> ForcingTerm::h(double t) const {
  if (!h_) return std::nullopt;
  return h_(t);
}

std::vector<double> ForcingTerm::on_grid(const UniformGrid& grid) const {
  if (table_grid_ && table_grid_->step == grid.step) {
    // Past the end of the table H is unknown; +inf makes the solver stop there.
    std::vector<double> out(grid.size(), std::numeric_limits<double>::infinity());
    const std::size_t n = std::min(grid.size(), table_.size());
    std::copy(table_.begin(), table_.begin() + static_cast<std::ptrdiff_t>(n), out.begin());
    return out;
  }
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = zero_ ? 0.0 : H_(grid.time(k));
  return out;
}

ForcingTerm example_forcing(const Nonlinearity& n, const std::function<double(double)>& target,
                            const MeasureKernel& kernel, const UniformGrid& grid,
                            const std::string& description) {
  if (!kernel.atoms().empty() || !kernel.density().exponential_form())
    throw ValidationError("example forcing is only defined for a pure exponential kernel");
  // Targets that leave double range end the table; the solver then truncates there.
  std::vector<double> x;
  x.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = target(grid.time(k));
    if (!std::isfinite(v) || std::fabs(v) > 1e300) {
      if (k < 2) throw ValidationError("example forcing: target is not finite at t=" + fmt(grid.time(k)));
      break;
    }
    if (k > 0 && !(v > x.back()))
      throw ValidationError("example forcing: target must be strictly increasing (fails at t=" +
                            fmt(grid.time(k)) + ")");
    x.push_back(v);
  }
  const UniformGrid used(grid.step, x.size() - 1);
  ConvolutionEngine conv(kernel, used, ConvolutionEngine::Rule::trapezoid);
  std::vector<double> H(used.size(), 0.0);
  conv.push(n.f(x[0]));
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double g = n.f(x[k]);
    H[k] = x[k] - x[0] - (conv.history_term() + conv.diagonal() * g);
    conv.push(g);
  }
  return ForcingTerm::tabulated(used, std::move(H), description);
}

// ---------------------------------------------------------------- Envelope

const char* to_string(EnvelopeRole role) {
  switch (role) {
    case EnvelopeRole::gamma:
      return "gamma";
    case EnvelopeRole::gamma_plus:
      return "gamma_plus";
    case EnvelopeRole::gamma_minus:
      return "gamma_minus";
  }
  return "gamma";
}

Envelope::Envelope(std::function<double(double)> fn, EnvelopeRole role, std::string description,
                   std::optional<double> power_exponent)
    : fn_(std::move(fn)), role_(role), description_(std::move(description)), power_(power_exponent) {}

Envelope Envelope::power(double eps, EnvelopeRole role) {
  if (!(eps > 0.0)) throw ValidationError("power envelope needs eps > 0");
  return Envelope([eps](double t) { return std::pow(1.0 + t, eps); }, role,
                  "(1+t)^" + fmt(eps), eps);
}

Envelope Envelope::clock(const Nonlinearity& n, double alpha, double mass, EnvelopeRole role) {
  if (!(alpha > 0.0) || !(mass > 0.0)) throw ValidationError("clock envelope needs alpha, M > 0");
  return Envelope([n, alpha, mass](double t) { return invert_F(n, alpha * mass * t); }, role,
                  "Finv(" + fmt(alpha) + "*" + fmt(mass) + "*t)");
}

Envelope Envelope::expression(const std::string& text, EnvelopeRole role) {
  const Expr e = Expr::parse(text, "t");
  for (int i = 0; i <= 64; ++i) {
    const double t = std::pow(10.0, -2.0 + 8.0 * i / 64.0);
    if (!(e(t) > 0.0)) throw ValidationError("envelope '" + text + "' must be positive");
  }
  return Envelope(e, role, text);
}

Envelope Envelope::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("envelope scale must be positive");
  Envelope out = *this;
  out.scale_ *= factor;
  return out;
}

Envelope normalize(const Envelope& gamma, const std::vector<double>& times,
                   const std::vector<double>& values) {
  if (times.size() != values.size() || times.empty())
    throw ValidationError("normalize: times and values must be non-empty and equal length");
  const double T = times.back();
  double peak = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= 0.5 * T) peak = std::max(peak, std::fabs(values[i]) / gamma(times[i]));
  if (!(peak > 0.0)) throw DomainError("normalize: |H| vanishes on the tail half");
  return gamma.scaled(peak);
}

}  // namespace volterra
