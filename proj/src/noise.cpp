#include "volterra/noise.hpp"

#include <cmath>
#include <numbers>

#include "volterra/errors.hpp"
#include "volterra/expr.hpp"
#include "volterra/numerics.hpp"
#include "volterra/rng.hpp"

namespace volterra {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::brownian:
      return "brownian";
    case NoiseKind::stable:
      return "stable";
  }
  return "none";
}

const char* to_string(Integrability v) { return v == Integrability::finite ? "finite" : "infinite"; }

NoisePath zero_noise(const UniformGrid& grid) {
  NoisePath p;
  p.grid = grid;
  p.values.assign(grid.size(), 0.0);
  return p;
}

NoisePath sample_brownian(const std::function<double(double)>& sigma, const UniformGrid& grid,
                          std::uint64_t seed, std::uint64_t stream) {
  NoisePath p;
  p.grid = grid;
  p.kind = NoiseKind::brownian;
  p.seed = seed;
  p.stream = stream;
  p.values.resize(grid.size());
  p.values[0] = 0.0;
  PhiloxStream rng(seed, stream);
  const double sq = std::sqrt(grid.step);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double s = sigma(grid.time(k) + 0.5 * grid.step);
    p.values[k + 1] = p.values[k] + s * sq * rng.normal();
  }
  return p;
}

NoisePath sample_stable(double alpha, double scale, double skew, const UniformGrid& grid,
                        std::uint64_t seed, std::uint64_t stream) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("stable index alpha must lie in (0, 2)");
  if (!(skew >= -1.0 && skew <= 1.0)) throw ValidationError("stable skew must lie in [-1, 1]");
  if (!(scale > 0.0)) throw ValidationError("stable scale must be positive");
  NoisePath p;
  p.grid = grid;
  p.kind = NoiseKind::stable;
  p.seed = seed;
  p.stream = stream;
  p.values.resize(grid.size());
  p.values[0] = 0.0;
  PhiloxStream rng(seed, stream);
  const double dt = grid.step;

  if (alpha == 1.0) {
    const double c = scale * dt;
    const double drift = 2.0 / kPi * skew * c * std::log(c);
    for (std::size_t k = 0; k < grid.steps; ++k) {
      const double V = kPi * (rng.uniform() - 0.5);
      const double W = rng.exponential();
      const double h = 0.5 * kPi + skew * V;
      const double X = 2.0 / kPi * (h * std::tan(V) - skew * std::log(0.5 * kPi * W * std::cos(V) / h));
      p.values[k + 1] = p.values[k] + c * X + drift;
    }
    return p;
  }

  const double t = std::tan(0.5 * kPi * alpha);
  const double B = std::atan(skew * t) / alpha;
  const double S = std::pow(1.0 + skew * skew * t * t, 0.5 / alpha);
  const double c = std::pow(dt, 1.0 / alpha) * scale;
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double V = kPi * (rng.uniform() - 0.5);
    const double W = rng.exponential();
    const double a = alpha * (V + B);
    const double X = S * std::sin(a) / std::pow(std::cos(V), 1.0 / alpha) *
                     std::pow(std::cos(V - a) / W, (1.0 - alpha) / alpha);
    p.values[k + 1] = p.values[k] + c * X;
  }
  return p;
}

NoisePath coarsen(const NoisePath& fine, std::size_t factor) {
  if (factor < 1 || fine.grid.steps % factor != 0)
    throw ValidationError("coarsen: factor must divide the number of steps");
  NoisePath out = fine;
  out.grid = UniformGrid(fine.grid.step * static_cast<double>(factor), fine.grid.steps / factor);
  out.values.resize(out.grid.size());
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = fine.values[k * factor];
  return out;
}

// ---------------------------------------------------------------- SigmaEnvelope

SigmaEnvelope::SigmaEnvelope(std::function<double(double)> sigma, std::string description)
    : sigma_(std::move(sigma)), description_(std::move(description)) {}

SigmaEnvelope SigmaEnvelope::constant(double sigma0) {
  SigmaEnvelope s([sigma0](double) { return sigma0; }, "constant");
  s.qv_closed_ = [v = sigma0 * sigma0](double t) { return v * t; };
  return s;
}

SigmaEnvelope SigmaEnvelope::power(double alpha) {
  if (!(alpha >= 0.0)) throw ValidationError("sigma power exponent must be >= 0");
  SigmaEnvelope s([alpha](double t) { return std::pow(t, alpha); }, "power");
  const double p = 2.0 * alpha + 1.0;
  s.qv_closed_ = [p](double t) { return std::pow(t, p) / p; };
  return s;
}

SigmaEnvelope SigmaEnvelope::expression(const std::string& text) {
  const Expr e = Expr::parse(text, "t");
  return SigmaEnvelope(e, text);
}

double SigmaEnvelope::qv(double t) const {
  if (t < 0.0) throw DomainError("quadratic variation needs t >= 0");
  if (t == 0.0) return 0.0;
  if (qv_closed_) return qv_closed_(t);
  return numerics::integrate(
      [this](double s) {
        const double v = sigma_(s);
        return v * v;
      },
      0.0, t, 1e-10);
}

double SigmaEnvelope::operator()(double t) const {
  const double q = qv(t);
  if (!(q > std::exp(1.0)))
    throw DomainError("Sigma(t) needs quadratic variation above e (loglog undefined), t=" +
                      std::to_string(t));
  return std::sqrt(2.0 * q * std::log(std::log(q)));
}

// ---------------------------------------------------------------- integrability

Integrability envelope_integrability(const Envelope& gamma, double alpha, double horizon) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("stable index alpha must lie in (0, 2)");
  if (auto eps = gamma.power_exponent()) {
    // Boundary eps * alpha == 1 diverges; the tolerance absorbs rounding in 1/alpha.
    return (*eps * alpha > 1.0 + 1e-12) ? Integrability::finite : Integrability::infinite;
  }
  if (!(horizon > 4.0)) throw ValidationError("envelope_integrability: horizon must exceed 4");
  auto g = [&](double s) { return std::pow(gamma(s), -alpha); };
  const double body = numerics::integrate(g, 0.0, horizon, 1e-8);
  if (!std::isfinite(body)) return Integrability::infinite;
  // Local power-law decay rate of the integrand over the last octave.
  const double p = -std::log(g(horizon) / g(0.5 * horizon)) / std::log(2.0);
  return p > 1.05 ? Integrability::finite : Integrability::infinite;
}

}  // namespace volterra
