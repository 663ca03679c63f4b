#include "volterra/convolution.hpp"

#include <cmath>

#include "volterra/detail/exp_moments.hpp"
#include "volterra/errors.hpp"

namespace volterra {

ConvolutionEngine::ConvolutionEngine(const MeasureKernel& kernel, const UniformGrid& grid, Rule rule,
                                     bool force_generic)
    : rule_(rule), table_(grid_weights(kernel, grid)) {
  recursive_ = table_.exponential_recursion && !force_generic;
  g_.reserve(grid.size());
  if (recursive_) {
    const double dt = grid.step;
    c0_ = kernel.atom_at_zero();
    if (auto ex = kernel.density().exponential_form()) {
      ratio_ = ex->coeff / ex->rate;
      c0_ += ratio_;
      decay_ = std::exp(-ex->rate * dt);
      const auto mom = detail::exp_hat_moments(ex->rate, dt);
      alpha0_ = mom.lower;
      beta0_ = mom.upper;
      e0_ = -std::expm1(-ex->rate * dt) / ex->rate;
    }
    return;
  }
  const std::size_t n = grid.steps;
  if (rule_ == Rule::trapezoid) {
    mid_.assign(n, 0.0);
    for (std::size_t l = 1; l < n; ++l) mid_[l] = table_.lower[l] + table_.upper[l - 1];
  } else {
    mid_.resize(n);
    for (std::size_t j = 0; j < n; ++j) mid_[j] = table_.rectangle(j);
  }
}

double ConvolutionEngine::history_term() const {
  const std::size_t k = g_.size();
  if (k == 0) return 0.0;
  const double dt = table_.grid.step;
  if (recursive_) {
    if (rule_ == Rule::trapezoid)
      return c0_ * (trap_ + 0.5 * dt * g_.back()) - ratio_ * (alpha0_ * decay_ * sa_ + beta0_ * sb_);
    return c0_ * dt * sum_ - ratio_ * e0_ * sb_;
  }
  double acc = 0.0;
  if (rule_ == Rule::trapezoid) {
    for (std::size_t lag = 1; lag < k; ++lag) acc += mid_[lag] * g_[k - lag];
    acc += table_.upper[k - 1] * g_[0];
  } else {
    for (std::size_t j = 0; j < k; ++j) acc += mid_[j] * g_[k - 1 - j];
  }
  return acc;
}

void ConvolutionEngine::push(double g) {
  if (g_.size() >= table_.grid.size())
    throw Error("convolution engine: pushed past the end of the grid");
  if (recursive_) {
    const double dt = table_.grid.step;
    if (!g_.empty()) {
      trap_ += 0.5 * dt * (g_.back() + g);
      sa_ = g + decay_ * sa_;
    }
    sb_ = g + decay_ * sb_;
    sum_ += g;
  }
  g_.push_back(g);
}

}  // namespace volterra
