#pragma once

#include <functional>

namespace volterra::numerics {

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integral of fn over [a, b] to the given relative
/// tolerance. Ranges with b/a > 4 on the positive axis are split into
/// geometric panels first so power-law and logarithmic integrands keep full
/// accuracy over many decades. Returns a signed value (b < a allowed).
double integrate(const ScalarFn& fn, double a, double b, double rel_tol = 1e-10);

/// Fixed 4-point Gauss-Legendre rule on [a, b].
double gauss_legendre4(const ScalarFn& fn, double a, double b);

/// Root of an increasing function by geometric bracket expansion from
/// `guess`, then Newton steps safeguarded by bisection. `derivative` may be
/// empty, in which case plain bisection/secant is used. `lower_limit` is the
/// left edge of the domain (the bracket never crosses it).
double solve_increasing(const ScalarFn& fn, const ScalarFn& derivative, double target,
                        double guess, double lower_limit, double abs_tol);

}  // namespace volterra::numerics
