#include "volterra/numerics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "volterra/errors.hpp"

namespace volterra::numerics {

namespace {

double gk_panel(const ScalarFn& fn, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(fn, a, b, 20, rel_tol,
                                                                       &err);
}

}  // namespace

double integrate(const ScalarFn& fn, double a, double b, double rel_tol) {
  if (b < a) return -integrate(fn, b, a, rel_tol);
  if (a == b) return 0.0;
  const bool panelled = (a == 0.0 && b > 1.0) || (a > 0.0 && b > 4.0 * a);
  if (!panelled) return gk_panel(fn, a, b, rel_tol);
  double sum = 0.0;
  double lo = a;
  if (lo == 0.0) {
    const double first = std::min(1.0, b);
    sum += gk_panel(fn, 0.0, first, rel_tol);
    lo = first;
  }
  while (lo < b) {
    const double hi = std::min(b, 2.0 * lo);
    sum += gk_panel(fn, lo, hi, rel_tol);
    lo = hi;
  }
  return sum;
}

double gauss_legendre4(const ScalarFn& fn, double a, double b) {
  static constexpr std::array<double, 4> nodes = {-0.8611363115940526, -0.3399810435848563,
                                                  0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> weights = {0.3478548451374538, 0.6521451548625461,
                                                    0.6521451548625461, 0.3478548451374538};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * fn(mid + half * nodes[i]);
  return half * s;
}

double solve_increasing(const ScalarFn& fn, const ScalarFn& derivative, double target,
                        double guess, double lower_limit, double abs_tol) {
  double lo = guess;
  double hi = guess;
  double f_lo = fn(lo) - target;
  double f_hi = f_lo;
  if (f_lo == 0.0) return guess;

  // Geometric bracket expansion.
  int expansions = 0;
  if (f_lo < 0.0) {
    double step = std::max(std::fabs(guess), 1.0);
    while (f_hi < 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi = hi + step;
      step *= 2.0;
      f_hi = fn(hi) - target;
      if (++expansions > 2000 || !std::isfinite(hi))
        throw DomainError("solve_increasing: no upper bracket for target " +
                          std::to_string(target));
    }
  } else {
    while (f_lo > 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo = lower_limit + 0.5 * (lo - lower_limit);
      f_lo = fn(lo) - target;
      if (++expansions > 2000 || lo == hi)
        throw DomainError("solve_increasing: no lower bracket for target " +
                          std::to_string(target));
    }
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double fx = fn(x) - target;
    if (std::fabs(fx) <= abs_tol) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    double next = std::numeric_limits<double>::quiet_NaN();
    if (derivative) {
      const double d = derivative(x);
      if (d > 0.0 && std::isfinite(d)) next = x - fx / d;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x))
      return next;
    x = next;
  }
  return x;
}

}  // namespace volterra::numerics
