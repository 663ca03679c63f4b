#pragma once

#include <optional>
#include <vector>

#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/noise.hpp"
#include "volterra/nonlinear.hpp"

namespace volterra {

/// Everything that defines x(t) = psi + int_0^t M(t-s) f(x(s)) ds + H(t) [+ Z(t)].
struct Problem {
  MeasureKernel kernel;
  Nonlinearity nonlinearity;
  ForcingTerm forcing;
  double psi = 1.0;
};

struct SolverOptions {
  bool force_generic = false;  // skip the exponential recursion
  int max_iterations = 50;
  double tolerance = 1e-12;    // relative to max(1, |x|)
  double overflow = 1e300;
};

/// Solution samples on a uniform grid. When the state overflowed, the arrays
/// stop at the last finite step and `truncated` is set.
struct Trajectory {
  UniformGrid grid;  // requested grid
  double psi = 0.0;
  double mass = 0.0;
  std::vector<double> x;
  std::vector<double> H;
  std::vector<double> Z;  // empty for deterministic runs
  bool truncated = false;
  bool recursive = false;
  bool stochastic = false;

  std::size_t size() const noexcept { return x.size(); }
  double time(std::size_t k) const noexcept { return grid.time(k); }
  /// Last time actually reached.
  double horizon() const noexcept { return x.empty() ? 0.0 : grid.time(x.size() - 1); }
};

/// Implicit product-trapezoid scheme. Throws StepFailure when the diagonal
/// equation cannot be resolved.
Trajectory solve_deterministic(const Problem& p, const UniformGrid& grid,
                               const SolverOptions& opt = {});

/// Explicit left-rectangle scheme with the noise increment added at each step.
/// The forcing of `p` plays the role of the deterministic trend H0.
Trajectory solve_stochastic(const Problem& p, const NoisePath& noise, const SolverOptions& opt = {});

struct ConvergenceReport {
  std::vector<double> steps;        // dt at each level
  std::vector<double> differences;  // max relative change between consecutive levels
  std::vector<double> orders;       // log2 ratio of consecutive differences
  double fitted_order = 0.0;        // least-squares slope of -log2(difference)
};

/// Fills `orders` and `fitted_order` from `differences`.
void fit_orders(ConvergenceReport& rep);

/// Solves at dt, dt/2, ..., dt/2^{levels-1} and compares the levels on the
/// coarse grid. With `finest_noise` (sampled on the finest grid) the
/// stochastic scheme is used and each level sees the same path, subsampled.
ConvergenceReport refine_and_compare(const Problem& p, const UniformGrid& coarse, int levels,
                                     const SolverOptions& opt = {},
                                     const NoisePath* finest_noise = nullptr);

}  // namespace volterra
