#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/nonlinear.hpp"

namespace volterra {

/// Integrated deterministic forcing H with H(0) = 0.
class ForcingTerm {
 public:
  ForcingTerm();  // H = 0

  static ForcingTerm zero();
  /// Names: zero, log1p, power(p), exp_sqrt(L), exp_power(alpha).
  static ForcingTerm builtin(const std::string& name, const std::vector<double>& params = {});
  /// Expression in `t`; must vanish at 0.
  static ForcingTerm expression(const std::string& text);
  /// Values on a uniform grid, linearly interpolated in between.
  static ForcingTerm tabulated(const UniformGrid& grid, std::vector<double> values,
                               std::string description);

  double H(double t) const;
  /// Density h = H' when known in closed form.
  std::optional<double> h(double t) const;
  bool positive() const noexcept { return positive_; }
  bool is_zero() const noexcept { return zero_; }
  const std::string& description() const noexcept { return description_; }

  /// H at every grid point. Exact table values when the grid step matches a
  /// tabulated forcing (+inf past the table end).
  std::vector<double> on_grid(const UniformGrid& grid) const;

 private:
  std::function<double(double)> H_;
  std::function<double(double)> h_;
  bool positive_ = true;
  bool zero_ = true;
  std::string description_ = "zero";
  std::optional<UniformGrid> table_grid_;
  std::vector<double> table_;
};

/// Forcing that makes `target` the exact solution of the product-trapezoid
/// discretization on `grid`: H_k = target_k - target_0 - conv_k(f(target)).
/// The initial value is target(0). Only exponential kernels without atoms are
/// accepted; the target must be strictly increasing on the grid. If the target
/// leaves double range the table stops there and H reads +inf beyond it.
ForcingTerm example_forcing(const Nonlinearity& n, const std::function<double(double)>& target,
                            const MeasureKernel& kernel, const UniformGrid& grid,
                            const std::string& description = "example");

enum class EnvelopeRole { gamma, gamma_plus, gamma_minus };

const char* to_string(EnvelopeRole role);

/// Increasing positive comparison function.
class Envelope {
 public:
  Envelope(std::function<double(double)> fn, EnvelopeRole role, std::string description,
           std::optional<double> power_exponent = std::nullopt);

  /// (1 + t)^eps
  static Envelope power(double eps, EnvelopeRole role = EnvelopeRole::gamma);
  /// F^{-1}(alpha * mass * t)
  static Envelope clock(const Nonlinearity& n, double alpha, double mass,
                        EnvelopeRole role = EnvelopeRole::gamma_plus);
  static Envelope expression(const std::string& text, EnvelopeRole role = EnvelopeRole::gamma);

  double operator()(double t) const { return scale_ * fn_(t); }
  EnvelopeRole role() const noexcept { return role_; }
  const std::string& description() const noexcept { return description_; }
  /// eps when the envelope is a multiple of (1 + t)^eps.
  std::optional<double> power_exponent() const noexcept { return power_; }
  double scale() const noexcept { return scale_; }
  Envelope scaled(double factor) const;

 private:
  std::function<double(double)> fn_;
  EnvelopeRole role_;
  std::string description_;
  std::optional<double> power_;
  double scale_ = 1.0;
};

/// Rescales gamma so that max |H| / gamma over the tail half [T/2, T] of the
/// samples equals 1.
Envelope normalize(const Envelope& gamma, const std::vector<double>& times,
                   const std::vector<double>& values);

}  // namespace volterra
