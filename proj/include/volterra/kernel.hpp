#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volterra/expr.hpp"
#include "volterra/grid.hpp"

namespace volterra {

/// Point mass of the memory measure.
struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// Density c * exp(-rate * s).
struct ExponentialDensity {
  double coeff = 1.0;
  double rate = 1.0;
};

/// Absolutely continuous part of the memory measure.
///
/// Exponential and inverse-square densities carry closed-form cumulatives;
/// anything else is an expression in `s` integrated numerically up to a
/// finite cutoff.
class Density {
 public:
  static Density none();
  static Density exponential(double coeff, double rate);
  /// c / (1 + s)^2
  static Density inverse_square(double coeff = 1.0);
  /// Parses `text` as an expression in `s`. An expression that samples as an
  /// exact exponential is promoted to the closed-form exponential density.
  static Density expression(const std::string& text, double cutoff);

  double operator()(double s) const;
  /// Integral of the density over [0, t].
  double cumulative(double t) const;
  double mass() const;
  double cutoff() const noexcept { return cutoff_; }
  bool is_none() const noexcept { return kind_ == Kind::none; }
  bool has_closed_cumulative() const noexcept { return kind_ != Kind::expression; }
  std::optional<ExponentialDensity> exponential_form() const;
  /// Round-trippable text used by the run-config writer.
  std::string spec() const;

 private:
  enum class Kind { none, exponential, inverse_square, expression };
  Kind kind_ = Kind::none;
  double coeff_ = 0.0;
  double rate_ = 0.0;
  double cutoff_ = 0.0;
  double mass_ = 0.0;
  Expr expr_;
};

/// Finite nonnegative Borel measure on [0, inf): atoms plus a density.
/// Immutable after construction.
class MeasureKernel {
 public:
  /// Throws InvalidKernel when the total mass is not in (0, inf) or a mass is negative.
  MeasureKernel(std::vector<Atom> atoms, Density density);

  static MeasureKernel dirac(double mass = 1.0);
  static MeasureKernel exponential(double coeff = 1.0, double rate = 1.0);

  /// M(t) = mu([0, t]).
  double cumulative(double t) const;
  double total_mass() const noexcept { return total_mass_; }
  /// M - M(t); exact for closed-form densities.
  double tail_bound(double t) const;
  double atom_at_zero() const noexcept;

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const Density& density() const noexcept { return density_; }

  /// True when the convolution admits the O(N) exponential recursion:
  /// atoms only at 0 and a density that is absent or exponential.
  bool admits_recursion() const noexcept;

 private:
  std::vector<Atom> atoms_;
  Density density_;
  double total_mass_ = 0.0;
};

/// Per-lag product-integration moments of M on a uniform grid.
///
/// On [j dt, (j+1) dt], lower[j] integrates M against the hat that is 1 at
/// the left end and upper[j] against the hat that is 1 at the right end.
/// Atoms off the grid are split linearly between the two neighbouring lags.
struct WeightTable {
  UniformGrid grid;
  std::vector<double> lower;
  std::vector<double> upper;
  bool exponential_recursion = false;
  int order = 2;

  /// Product trapezoidal weight of sample g(t_{n-lag}) in the convolution at t_n.
  double trapezoid(std::size_t lag, std::size_t n) const;
  /// Left-endpoint product rectangle weight for lag j: integral of M over [j dt, (j+1) dt].
  double rectangle(std::size_t lag) const { return lower[lag] + upper[lag]; }
};

WeightTable grid_weights(const MeasureKernel& kernel, const UniformGrid& grid);

}  // namespace volterra
