#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "volterra/convolution.hpp"
#include "volterra/errors.hpp"
#include "volterra/kernel.hpp"

using namespace volterra;

TEST_SUITE("kernel") {

TEST_CASE("cumulative of the exponential density") {
  const auto k = MeasureKernel::exponential();
  CHECK(k.cumulative(2.0) == doctest::Approx(0.864665).epsilon(1e-6));
  CHECK(k.cumulative(0.0) == 0.0);
  CHECK(k.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("atom beyond t is not yet counted") {
  const MeasureKernel k({{1.0, 0.5}}, Density::exponential(1.0, 1.0));
  const double ref = oracle::simpson([](double s) { return std::exp(-s); }, 0.0, 0.5);
  CHECK(k.cumulative(0.5) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(k.cumulative(0.5) == doctest::Approx(0.393469).epsilon(1e-6));
  CHECK(k.cumulative(1.0) == doctest::Approx(0.5 + 1.0 - std::exp(-1.0)));
}

TEST_CASE("total mass of atoms plus density") {
  const MeasureKernel k({{1.0, 0.5}}, Density::exponential(1.0, 1.0));
  const double dens = oracle::simpson_log([](double s) { return std::exp(-s); }, 1e-12, 60.0) ;
  CHECK(k.total_mass() == doctest::Approx(0.5 + dens).epsilon(1e-6));
  CHECK(k.total_mass() == doctest::Approx(1.5));
}

TEST_CASE("inverse square density") {
  const auto d = Density::inverse_square();
  CHECK(d.mass() == doctest::Approx(1.0));
  CHECK(d.cumulative(3.0) == doctest::Approx(0.75));
  const MeasureKernel k({}, d);
  CHECK_FALSE(k.admits_recursion());
}

TEST_CASE("expression density promoted to exponential") {
  const auto d = Density::expression("2*exp(-3*s)", 1.0 / 0.0);
  REQUIRE(d.exponential_form().has_value());
  CHECK(d.exponential_form()->coeff == doctest::Approx(2.0));
  CHECK(d.exponential_form()->rate == doctest::Approx(3.0));
  CHECK(d.mass() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("generic expression density integrates numerically") {
  const auto d = Density::expression("1/(1+s)^3", 50.0);
  CHECK_FALSE(d.has_closed_cumulative());
  const double ref = oracle::simpson([](double s) { return std::pow(1.0 + s, -3.0); }, 0.0, 2.0);
  CHECK(d.cumulative(2.0) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("invalid measures are rejected") {
  CHECK_THROWS_AS(MeasureKernel({}, Density::none()), InvalidKernel);
  CHECK_THROWS_AS(MeasureKernel({{0.0, -1.0}}, Density::exponential(1.0, 1.0)), InvalidKernel);
  CHECK_THROWS_AS(MeasureKernel({}, Density::expression("1", 1.0 / 0.0)), ValidationError);
}

TEST_CASE("unit atom at zero gives trapezoid weights") {
  const UniformGrid g(0.1, 10);
  const auto w = grid_weights(MeasureKernel::dirac(), g);
  // M = 1 on [0, inf): the hat moments are dt/2 each.
  CHECK(w.lower[0] == doctest::Approx(0.05));
  CHECK(w.upper[0] == doctest::Approx(0.05));
  CHECK(w.trapezoid(0, 5) == doctest::Approx(0.05));
  CHECK(w.trapezoid(2, 5) == doctest::Approx(0.1));
  CHECK(w.trapezoid(5, 5) == doctest::Approx(0.05));
  CHECK(w.exponential_recursion);
}

TEST_CASE("recursion flag") {
  const UniformGrid g(0.1, 10);
  CHECK(grid_weights(MeasureKernel::exponential(), g).exponential_recursion);
  CHECK_FALSE(grid_weights(MeasureKernel({}, Density::inverse_square()), g).exponential_recursion);
  CHECK_FALSE(grid_weights(MeasureKernel({{1.0, 0.5}}, Density::exponential(1.0, 1.0)), g)
                  .exponential_recursion);
}

TEST_CASE("hat moments integrate M") {
  const UniformGrid g(0.25, 8);
  const auto k = MeasureKernel::exponential();
  const auto w = grid_weights(k, g);
  for (std::size_t j = 0; j < 8; ++j) {
    const double a = g.time(j), b = g.time(j + 1);
    const double lo = oracle::simpson([&](double u) { return k.cumulative(u) * (b - u) / g.step; }, a, b, 2000);
    const double hi = oracle::simpson([&](double u) { return k.cumulative(u) * (u - a) / g.step; }, a, b, 2000);
    CHECK(w.lower[j] == doctest::Approx(lo).epsilon(1e-9));
    CHECK(w.upper[j] == doctest::Approx(hi).epsilon(1e-9));
  }
}

TEST_CASE("off-grid atom is split between neighbouring lags") {
  const UniformGrid g(0.1, 20);
  const MeasureKernel k({{0.25, 1.0}}, Density::none());
  const auto w = grid_weights(k, g);
  const double total = w.rectangle(0) + w.rectangle(1) + w.rectangle(2) + w.rectangle(3);
  const double ref = oracle::simpson([&](double u) { return k.cumulative(u); }, 0.0, 0.4, 4000);
  CHECK(total == doctest::Approx(ref).epsilon(1e-3));
}

// Convolution of M against g(s) = cos(s) at t = 2, refined.
static double conv_error(const MeasureKernel& k, int n, bool generic) {
  const double T = 2.0;
  const UniformGrid g(T / n, static_cast<std::size_t>(n));
  ConvolutionEngine eng(k, g, ConvolutionEngine::Rule::trapezoid, generic);
  double val = 0.0;
  for (std::size_t i = 0; i <= g.steps; ++i) {
    const double gi = std::cos(g.time(i));
    if (i == g.steps) val = eng.history_term() + eng.diagonal() * gi;
    eng.push(gi);
  }
  const double ref = oracle::simpson([&](double s) { return k.cumulative(T - s) * std::cos(s); }, 0.0, T, 20000);
  return std::fabs(val - ref);
}

TEST_CASE("trapezoid convolution is second order") {
  for (const auto& k : {MeasureKernel::exponential(), MeasureKernel({}, Density::inverse_square())}) {
    std::vector<double> lx, ly;
    for (int n : {10, 20, 40, 80}) {
      lx.push_back(std::log2(2.0 / n));
      ly.push_back(std::log2(conv_error(k, n, true)));
    }
    const double order = oracle::slope(lx, ly);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }
}

TEST_CASE("exponential recursion matches the generic sum") {
  const MeasureKernel k({{0.0, 0.3}}, Density::exponential(2.0, 0.7));
  const UniformGrid g(0.01, 1000);
  ConvolutionEngine fast(k, g, ConvolutionEngine::Rule::trapezoid);
  ConvolutionEngine slow(k, g, ConvolutionEngine::Rule::trapezoid, true);
  REQUIRE(fast.recursive());
  REQUIRE_FALSE(slow.recursive());
  double worst = 0.0;
  for (std::size_t i = 0; i <= g.steps; ++i) {
    const double gi = std::sqrt(1.0 + g.time(i)) + std::sin(3.0 * g.time(i));
    worst = std::max(worst, std::fabs(fast.history_term() - slow.history_term()) /
                                std::max(1.0, std::fabs(slow.history_term())));
    fast.push(gi);
    slow.push(gi);
  }
  CHECK(worst <= 1e-10);

  ConvolutionEngine rf(k, g, ConvolutionEngine::Rule::rectangle);
  ConvolutionEngine rs(k, g, ConvolutionEngine::Rule::rectangle, true);
  worst = 0.0;
  for (std::size_t i = 0; i <= 500; ++i) {
    worst = std::max(worst, std::fabs(rf.history_term() - rs.history_term()));
    rf.push(std::cos(g.time(i)));
    rs.push(std::cos(g.time(i)));
  }
  CHECK(worst <= 1e-10);
}

}
