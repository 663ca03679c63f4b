#include "volterra/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "volterra/detail/exp_moments.hpp"
#include "volterra/errors.hpp"
#include "volterra/numerics.hpp"

namespace volterra {

namespace detail {

// q0(z) = int_0^1 (1 - e^{-z u}) (1 - u) du,  q1(z) = int_0^1 (1 - e^{-z u}) u du.
ExpHatMoments exp_hat_moments(double rate, double step) {
  const double z = rate * step;
  double q0 = 0.0;
  double q1 = 0.0;
  if (z < 0.5) {
    double term = 1.0;  // z^m / m!
    for (int m = 1; m <= 30; ++m) {
      term *= z / m;
      const double sign = (m % 2 == 1) ? 1.0 : -1.0;
      q0 += sign * term / ((m + 1.0) * (m + 2.0));
      q1 += sign * term / (m + 2.0);
      if (term < 1e-18) break;
    }
  } else {
    const double em = std::exp(-z);
    const double g1 = (1.0 - em * (1.0 + z)) / (z * z);
    q0 = 0.5 - (1.0 - em) / z + g1;
    q1 = 0.5 - g1;
  }
  ExpHatMoments out;
  out.one_minus_lower = step * q0;
  out.one_minus_upper = step * q1;
  out.lower = 0.5 * step - out.one_minus_lower;
  out.upper = 0.5 * step - out.one_minus_upper;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- Density

Density Density::none() { return Density{}; }

Density Density::exponential(double coeff, double rate) {
  if (!(coeff >= 0.0) || !(rate > 0.0) || !std::isfinite(coeff) || !std::isfinite(rate))
    throw InvalidKernel("exponential density needs coeff >= 0 and rate > 0");
  Density d;
  d.kind_ = Kind::exponential;
  d.coeff_ = coeff;
  d.rate_ = rate;
  d.cutoff_ = std::numeric_limits<double>::infinity();
  d.mass_ = coeff / rate;
  return d;
}

Density Density::inverse_square(double coeff) {
  if (!(coeff >= 0.0) || !std::isfinite(coeff))
    throw InvalidKernel("inverse_square density needs coeff >= 0");
  Density d;
  d.kind_ = Kind::inverse_square;
  d.coeff_ = coeff;
  d.cutoff_ = std::numeric_limits<double>::infinity();
  d.mass_ = coeff;
  return d;
}

Density Density::expression(const std::string& text, double cutoff) {
  Expr e = Expr::parse(text, "s");

  // Promote exact exponentials to the closed form.
  const double r0 = e(0.0);
  const double r1 = e(1.0);
  if (r0 > 0.0 && r1 > 0.0 && r1 < r0 && std::isfinite(r0)) {
    const double rate = std::log(r0 / r1);
    bool exact = true;
    for (double s : {0.25, 0.5, 2.0, 3.0, 7.5}) {
      const double want = r0 * std::exp(-rate * s);
      if (std::fabs(e(s) - want) > 1e-12 * want) {
        exact = false;
        break;
      }
    }
    if (exact) return exponential(r0, rate);
  }

  if (!std::isfinite(cutoff) || !(cutoff > 0.0))
    throw InvalidKernel("density '" + text +
                        "' has no closed-form tail; kernel.cutoff must be finite and positive");
  Density d;
  d.kind_ = Kind::expression;
  d.expr_ = std::move(e);
  d.cutoff_ = cutoff;
  for (int i = 0; i <= 256; ++i) {
    const double s = cutoff * i / 256.0;
    const double v = d.expr_(s);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidKernel("density '" + text + "' is negative or non-finite at s=" +
                          std::to_string(s));
  }
  d.mass_ = numerics::integrate(d.expr_, 0.0, cutoff, 1e-12);
  return d;
}

double Density::operator()(double s) const {
  if (s < 0.0) return 0.0;
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::exponential:
      return coeff_ * std::exp(-rate_ * s);
    case Kind::inverse_square:
      return coeff_ / ((1.0 + s) * (1.0 + s));
    case Kind::expression:
      return s <= cutoff_ ? expr_(s) : 0.0;
  }
  return 0.0;
}

double Density::cumulative(double t) const {
  if (t <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::exponential:
      return -coeff_ / rate_ * std::expm1(-rate_ * t);
    case Kind::inverse_square:
      return coeff_ * t / (1.0 + t);
    case Kind::expression:
      return numerics::integrate(expr_, 0.0, std::min(t, cutoff_), 1e-12);
  }
  return 0.0;
}

double Density::mass() const { return mass_; }

std::optional<ExponentialDensity> Density::exponential_form() const {
  if (kind_ != Kind::exponential) return std::nullopt;
  return ExponentialDensity{coeff_, rate_};
}

std::string Density::spec() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::none:
      return "none";
    case Kind::exponential:
      os << coeff_ << "*exp(-" << rate_ << "*s)";
      return os.str();
    case Kind::inverse_square:
      if (coeff_ == 1.0) return "inverse_square";
      os << coeff_ << "/(1+s)^2";
      return os.str();
    case Kind::expression:
      return expr_.source();
  }
  return "none";
}

// ---------------------------------------------------------------- MeasureKernel

MeasureKernel::MeasureKernel(std::vector<Atom> atoms, Density density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
  double mass = density_.mass();
  for (const Atom& a : atoms_) {
    if (!(a.location >= 0.0) || !std::isfinite(a.location))
      throw InvalidKernel("atom location must be finite and >= 0");
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
      throw InvalidKernel("atom mass must be finite and >= 0");
    mass += a.mass;
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw InvalidKernel("total mass of the kernel must lie in (0, inf), got " +
                        std::to_string(mass));
  total_mass_ = mass;
}

MeasureKernel MeasureKernel::dirac(double mass) {
  return MeasureKernel({Atom{0.0, mass}}, Density::none());
}

MeasureKernel MeasureKernel::exponential(double coeff, double rate) {
  return MeasureKernel({}, Density::exponential(coeff, rate));
}

double MeasureKernel::cumulative(double t) const {
  if (t < 0.0 || std::isnan(t)) throw DomainError("M(t) needs t >= 0");
  double m = density_.cumulative(t);
  for (const Atom& a : atoms_)
    if (a.location <= t) m += a.mass;
  return m;
}

double MeasureKernel::tail_bound(double t) const {
  double tail = density_.mass() - density_.cumulative(t);
  for (const Atom& a : atoms_)
    if (a.location > t) tail += a.mass;
  return std::max(tail, 0.0);
}

double MeasureKernel::atom_at_zero() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_)
    if (a.location == 0.0) m += a.mass;
  return m;
}

bool MeasureKernel::admits_recursion() const noexcept {
  for (const Atom& a : atoms_)
    if (a.location != 0.0 && a.mass != 0.0) return false;
  return density_.is_none() || density_.exponential_form().has_value();
}

// ---------------------------------------------------------------- WeightTable

double WeightTable::trapezoid(std::size_t lag, std::size_t n) const {
  if (lag == 0) return lower[0];
  if (lag == n) return upper[n - 1];
  return lower[lag] + upper[lag - 1];
}

WeightTable grid_weights(const MeasureKernel& kernel, const UniformGrid& grid) {
  if (!(grid.step > 0.0)) throw ValidationError("grid_weights: step must be positive");
  if (grid.steps < 1) throw ValidationError("grid_weights: grid needs at least one step");
  const std::size_t n = grid.steps;
  const double dt = grid.step;

  WeightTable table;
  table.grid = grid;
  table.lower.assign(n, 0.0);
  table.upper.assign(n, 0.0);
  table.exponential_recursion = kernel.admits_recursion();

  // Atoms: split onto lags, then integrate the resulting step function.
  std::vector<double> lag_mass(n + 1, 0.0);
  for (const Atom& a : kernel.atoms()) {
    const double pos = a.location / dt;
    if (pos > static_cast<double>(n)) continue;
    double lag = std::floor(pos);
    double frac = pos - lag;
    if (frac > 1.0 - 1e-9) {
      lag += 1.0;
      frac = 0.0;
    } else if (frac < 1e-9) {
      frac = 0.0;
    }
    const auto l = static_cast<std::size_t>(lag);
    if (l <= n) lag_mass[l] += (1.0 - frac) * a.mass;
    if (frac > 0.0 && l + 1 <= n) lag_mass[l + 1] += frac * a.mass;
  }
  double step_level = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    step_level += lag_mass[j];
    table.lower[j] += 0.5 * dt * step_level;
    table.upper[j] += 0.5 * dt * step_level;
  }

  const Density& d = kernel.density();
  if (d.is_none()) return table;

  if (auto ex = d.exponential_form()) {
    const double scale = ex->coeff / ex->rate;
    const detail::ExpHatMoments mom = detail::exp_hat_moments(ex->rate, dt);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = ex->rate * dt * static_cast<double>(j);
      const double decay = std::exp(-x);
      const double grown = -std::expm1(-x);
      table.lower[j] += scale * (grown * 0.5 * dt + decay * mom.one_minus_lower);
      table.upper[j] += scale * (grown * 0.5 * dt + decay * mom.one_minus_upper);
    }
    return table;
  }

  // Generic density: Gauss-Legendre on each lag interval against the hats.
  double cum_left = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double left = dt * static_cast<double>(j);
    auto cum = [&](double u) {
      if (d.has_closed_cumulative()) return d.cumulative(u);
      const double hi = std::min(u, d.cutoff());
      if (hi <= left) return cum_left;
      return cum_left + numerics::gauss_legendre4(d, left, hi);
    };
    table.lower[j] += numerics::gauss_legendre4(
        [&](double u) { return cum(u) * (1.0 - (u - left) / dt); }, left, left + dt);
    table.upper[j] += numerics::gauss_legendre4(
        [&](double u) { return cum(u) * (u - left) / dt; }, left, left + dt);
    cum_left = cum(left + dt);
  }
  return table;
}

}  // namespace volterra
