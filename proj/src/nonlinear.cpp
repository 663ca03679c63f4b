#include "volterra/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/expr.hpp"
#include "volterra/numerics.hpp"

namespace volterra {

namespace {

constexpr double kE = std::numbers::e;

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> xs(static_cast<std::size_t>(points));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  return xs;
}

}  // namespace

Nonlinearity Nonlinearity::power(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ValidationError("power nonlinearity needs beta in (0,1), got " + std::to_string(beta));
  Nonlinearity n;
  n.family_ = Family::power;
  n.beta_ = beta;
  n.f_ = [beta](double x) { return std::copysign(std::pow(std::fabs(x), beta), x); };
  n.phi_ = [beta](double x) { return std::pow(x, beta); };
  n.phi_prime_ = [beta](double x) { return beta * std::pow(x, beta - 1.0); };
  const double p = 1.0 - beta;
  n.F_closed_ = [p](double x) { return (std::pow(x, p) - 1.0) / p; };
  n.F_inv_closed_ = [p](double y) { return std::pow(1.0 + p * y, 1.0 / p); };
  n.F_infimum_ = -1.0 / p;
  n.flags_ = {true, true, true, true, false, true};
  n.K_ = 1.0;
  n.eta_ = 1.0;
  std::ostringstream os;
  os.precision(17);
  os << "sign(x)*abs(x)^" << beta;
  n.f_source_ = os.str();
  n.phi_source_ = n.f_source_;
  return n;
}

Nonlinearity Nonlinearity::logtype() {
  Nonlinearity n;
  n.family_ = Family::logtype;
  n.beta_ = std::nan("");
  n.f_ = [](double x) { return (x + kE) / std::log(x + kE); };
  n.phi_ = n.f_;
  n.phi_prime_ = [](double x) {
    const double l = std::log(x + kE);
    return (l - 1.0) / (l * l);
  };
  // d/du (1/2) log^2(u + e) = 1 / f(u)
  const double l1 = std::log(1.0 + kE);
  n.F_closed_ = [l1](double x) {
    const double l = std::log(x + kE);
    return 0.5 * (l * l - l1 * l1);
  };
  n.F_inv_closed_ = [l1](double y) { return std::exp(std::sqrt(2.0 * y + l1 * l1)) - kE; };
  n.F_infimum_ = 0.5 * (1.0 - l1 * l1);
  n.flags_ = {true, false, true, true, true, true};
  n.K_ = kE;
  n.eta_ = 1.0;
  n.f_source_ = "(x+e)/log(x+e)";
  n.phi_source_ = n.f_source_;
  return n;
}

Nonlinearity Nonlinearity::custom(const std::string& f_expr, const std::string& phi_expr) {
  Nonlinearity n;
  n.family_ = Family::custom;
  n.beta_ = std::nan("");
  const Expr f = Expr::parse(f_expr, "x");
  const Expr phi = Expr::parse(phi_expr, "x");
  n.f_ = f;
  n.phi_ = phi;
  n.phi_prime_ = [phi](double x) {
    const double h = std::max(std::fabs(x), 1.0) * 1e-6;
    return (phi(x + h) - phi(x - h)) / (2.0 * h);
  };
  n.f_source_ = f_expr;
  n.phi_source_ = phi_expr;
  n.F_infimum_ = -std::numeric_limits<double>::infinity();

  // Sampled hypothesis checks.
  const auto xs = log_grid(1e-6, 1e8, 400);
  HypothesisFlags fl;
  fl.positivity = std::all_of(xs.begin(), xs.end(), [&](double x) { return f(x) > 0.0; });
  auto ratio_close = [&](double x) {
    const double p = phi(std::fabs(x));
    return p > 0.0 && std::fabs(std::fabs(f(x)) / p - 1.0) < 0.01;
  };
  fl.asymptotic_oddness = ratio_close(1e8) && ratio_close(-1e8);
  const PhiPropsReport props = check_phi_props(n, 1e8, 2.0);
  fl.sublinear_a3 = props.phi_increasing && n.phi_prime(1e8) < 0.5 * n.phi_prime(1e4);
  fl.sublinear_a4 = props.pass;
  double K = 0.0;
  bool finite = true;
  for (double x : xs) {
    for (double s : {x, -x}) {
      const double v = std::fabs(f(s));
      if (!std::isfinite(v)) finite = false;
      K = std::max(K, v - std::fabs(s));
    }
  }
  fl.global_linear = finite;
  n.K_ = finite ? std::max(K, 0.0) : std::nan("");
  n.eta_ = 1.0;
  // Difference quotients near the origin detect non-Lipschitz cusps like |x|^beta.
  const double h = 1e-10;
  fl.local_lipschitz = std::fabs(f(h) - f(-h)) / (2.0 * h) < 1e4;
  n.flags_ = fl;
  return n;
}

double Nonlinearity::phi_prime(double x) const { return phi_prime_(x); }

std::string Nonlinearity::describe() const {
  switch (family_) {
    case Family::power: {
      std::ostringstream os;
      os << "power(beta=" << beta_ << ")";
      return os.str();
    }
    case Family::logtype:
      return "logtype";
    case Family::custom:
      return "custom(f=" + f_source_ + ", phi=" + phi_source_ + ")";
  }
  return "?";
}

double eval_F(const Nonlinearity& n, double x) {
  if (!(x > 0.0)) throw DomainError("F(x) needs x > 0");
  if (n.F_closed_) return n.F_closed_(x);
  if (x == 1.0) return 0.0;
  const double lo = std::min(1.0, x);
  const double hi = std::max(1.0, x);
  for (int i = 0; i <= 64; ++i) {
    const double u = lo * std::pow(hi / lo, i / 64.0);
    if (!(n.f(u) > 0.0))
      throw SingularIntegrand("1/f is singular: f(" + std::to_string(u) + ") <= 0 inside the F range");
  }
  const double v = numerics::integrate([&](double u) { return 1.0 / n.f(u); }, 1.0, x, 1e-10);
  if (!std::isfinite(v)) throw SingularIntegrand("F integral did not converge");
  return v;
}

double invert_F(const Nonlinearity& n, double y) {
  if (std::isnan(y)) throw DomainError("invert_F: NaN argument");
  if (y <= n.F_infimum_)
    throw DomainError("invert_F: y=" + std::to_string(y) + " is below the range of F");
  if (n.F_inv_closed_) return n.F_inv_closed_(y);
  if (y == 0.0) return 1.0;
  const double tol = 1e-9 * std::max(1.0, std::fabs(y));
  try {
    return numerics::solve_increasing([&](double x) { return eval_F(n, x); },
                                      [&](double x) { return 1.0 / n.f(x); }, y, 1.0, 0.0, tol);
  } catch (const SingularIntegrand&) {
    throw DomainError("invert_F: y=" + std::to_string(y) + " is outside the range of F");
  }
}

double eval_Phi(const Nonlinearity& n, double x) {
  if (!(x > 0.0)) throw DomainError("Phi(x) needs x > 0");
  if (x == 1.0) return 0.0;
  const double v = numerics::integrate([&](double u) { return 1.0 / n.phi(u); }, 1.0, x, 1e-10);
  if (!std::isfinite(v)) throw SingularIntegrand("Phi integral did not converge");
  return v;
}

PhiPropsReport check_phi_props(const Nonlinearity& n, double horizon, double lambda,
                               double slack) {
  if (!(horizon > 1.0)) throw ValidationError("check_phi_props: horizon must exceed 1");
  if (!(lambda >= 1.0)) throw ValidationError("check_phi_props: lambda must be >= 1");
  PhiPropsReport r;
  r.horizon = horizon;
  r.lambda = lambda;
  r.slack = slack;
  const auto xs = log_grid(1.0, horizon, 401);
  const double tail_start = std::sqrt(horizon);

  r.phi_increasing = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(n.phi_prime(xs[i]) > 0.0)) r.phi_increasing = false;
    if (i > 0 && !(n.phi(xs[i]) > n.phi(xs[i - 1]))) r.phi_increasing = false;
  }

  double prev_prime = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (double x : xs) {
    if (x < tail_start) continue;
    const double p = n.phi(x);
    const double dp = n.phi_prime(x);
    r.max_elasticity = std::max(r.max_elasticity, x * dp / p);
    r.max_scaling = std::max(r.max_scaling, n.phi(lambda * x) / (lambda * p));
    if (dp > prev_prime * (1.0 + 1e-9)) monotone = false;
    prev_prime = dp;
  }
  // phi' must actually shrink across the tail, not merely stay flat.
  r.phi_prime_decays = monotone && n.phi_prime(horizon) <= 0.9 * n.phi_prime(tail_start);
  r.pass = r.phi_increasing && r.phi_prime_decays && r.max_elasticity <= 1.0 + slack &&
           r.max_scaling <= 1.0 + slack;
  return r;
}

}  // namespace volterra
