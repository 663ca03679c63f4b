#pragma once

#include <cmath>
#include <cstddef>

#include "volterra/errors.hpp"

namespace volterra {

/// Uniform time grid t_k = k * step, k = 0..steps.
struct UniformGrid {
  double step = 0.0;
  std::size_t steps = 0;

  UniformGrid() = default;
  UniformGrid(double step_, std::size_t steps_) : step(step_), steps(steps_) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("grid step must be positive");
    if (steps < 1) throw ValidationError("grid needs at least one step");
  }

  /// Grid covering [0, horizon] with the step rounded so it divides the horizon.
  static UniformGrid covering(double horizon, double step_hint) {
    if (!(horizon > 0.0) || !(step_hint > 0.0)) throw ValidationError("grid: horizon and dt must be positive");
    const auto n = static_cast<std::size_t>(std::llround(std::ceil(horizon / step_hint - 1e-9)));
    return UniformGrid(horizon / static_cast<double>(n), n);
  }

  double time(std::size_t k) const noexcept { return static_cast<double>(k) * step; }
  double horizon() const noexcept { return time(steps); }
  std::size_t size() const noexcept { return steps + 1; }
};

}  // namespace volterra
