#pragma once

#include <cstddef>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"

namespace volterra {

/// Running evaluation of sum_j w_j g(t_k - t_j) as samples g_0, g_1, ... arrive.
///
/// Trapezoid rule: the value at step k is history_term() + diagonal() * g_k,
/// where history_term() only involves g_0..g_{k-1}.
/// Rectangle rule: left-endpoint weights, no diagonal, history_term() is the
/// whole sum.
///
/// Kernels with atoms only at 0 and an exponential (or no) density use an
/// O(1)-per-step recursion unless `force_generic` is set.
class ConvolutionEngine {
 public:
  enum class Rule { trapezoid, rectangle };

  ConvolutionEngine(const MeasureKernel& kernel, const UniformGrid& grid, Rule rule,
                    bool force_generic = false);

  /// Number of samples pushed so far; the next sample has index size().
  std::size_t size() const noexcept { return g_.size(); }
  double history_term() const;
  double diagonal() const noexcept { return rule_ == Rule::trapezoid ? table_.lower[0] : 0.0; }
  void push(double g);

  bool recursive() const noexcept { return recursive_; }
  const WeightTable& weights() const noexcept { return table_; }

 private:
  Rule rule_;
  WeightTable table_;
  bool recursive_ = false;
  std::vector<double> g_;
  std::vector<double> mid_;  // trapezoid interior weights lower[l] + upper[l-1]

  // Recursion state for M(u) = c0 - ratio * exp(-rate u).
  double c0_ = 0.0;
  double ratio_ = 0.0;
  double decay_ = 0.0;   // exp(-rate * dt)
  double alpha0_ = 0.0;  // hat moments of exp(-rate v)
  double beta0_ = 0.0;
  double e0_ = 0.0;      // alpha0 + beta0
  double sum_ = 0.0;     // sum of all pushed g
  double trap_ = 0.0;    // trapezoid integral of pushed g over [0, t_{k-1}]
  double sa_ = 0.0;      // sum_{j<k} e^{-rate j dt} g_{k-1-j} shifted by one step, see push()
  double sb_ = 0.0;
};

}  // namespace volterra
