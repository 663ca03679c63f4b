#pragma once

namespace volterra::detail {

/// Moments of exp(-rate v) against the two linear hats on [0, step].
/// The one_minus_* fields hold the moments of (1 - exp(-rate v)), computed
/// without cancellation for small rate * step.
struct ExpHatMoments {
  double lower = 0.0;            // int e^{-rate v} (1 - v/step) dv
  double upper = 0.0;            // int e^{-rate v} v/step dv
  double one_minus_lower = 0.0;  // int (1 - e^{-rate v}) (1 - v/step) dv
  double one_minus_upper = 0.0;  // int (1 - e^{-rate v}) v/step dv
};

ExpHatMoments exp_hat_moments(double rate, double step);

}  // namespace volterra::detail
