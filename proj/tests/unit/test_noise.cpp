#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "volterra/asymptotics.hpp"
#include "volterra/errors.hpp"
#include "volterra/noise.hpp"
#include "volterra/rng.hpp"

using namespace volterra;

namespace {
std::vector<double> endpoints_brownian(const std::function<double(double)>& sigma, double T, std::size_t steps,
                                       int paths, std::uint64_t seed) {
  const UniformGrid g(T / steps, steps);
  std::vector<double> out;
  for (int p = 0; p < paths; ++p) out.push_back(sample_brownian(sigma, g, seed, p).values.back());
  return out;
}

std::vector<double> endpoints_stable(double alpha, double T, std::size_t steps, int paths, std::uint64_t seed) {
  const UniformGrid g(T / steps, steps);
  std::vector<double> out;
  for (int p = 0; p < paths; ++p) out.push_back(sample_stable(alpha, 1.0, 0.0, g, seed, p).values.back());
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}
}  // namespace

TEST_SUITE("noise") {

TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  PhiloxStream a(42, 3), b(42, 3), c(42, 4);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differ |= x != c.next_u32();
  }
  CHECK(differ);
  PhiloxStream u(7, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("zero sigma gives zero noise") {
  const auto p = sample_brownian([](double) { return 0.0; }, UniformGrid(0.01, 100), 1, 0);
  for (double v : p.values) CHECK(v == 0.0);
  CHECK(p.values.size() == 101);
}

TEST_CASE("brownian variance with constant sigma") {
  const auto z = endpoints_brownian([](double) { return 1.0; }, 1.0, 20, 10000, 11);
  CHECK(std::fabs(oracle::sample_variance(z) - 1.0) <= 0.05);
}

TEST_CASE("brownian variance with sigma = t") {
  const auto z = endpoints_brownian([](double t) { return t; }, 2.0, 40, 10000, 12);
  CHECK(oracle::sample_variance(z) == doctest::Approx(8.0 / 3.0).epsilon(0.05));
}

TEST_CASE("paths are bit-identical for identical stream ids") {
  const UniformGrid g(0.01, 1000);
  const auto a = sample_brownian([](double t) { return 1.0 + t; }, g, 99, 5);
  const auto b = sample_brownian([](double t) { return 1.0 + t; }, g, 99, 5);
  CHECK(a.values == b.values);
  const auto s1 = sample_stable(1.2, 1.0, 0.3, g, 99, 5);
  const auto s2 = sample_stable(1.2, 1.0, 0.3, g, 99, 5);
  CHECK(s1.values == s2.values);
  CHECK(s1.values != sample_stable(1.2, 1.0, 0.3, g, 99, 6).values);
}

TEST_CASE("coarsen keeps every k-th value") {
  const UniformGrid g(0.01, 1000);
  const auto f = sample_brownian([](double) { return 1.0; }, g, 3, 0);
  const auto c = coarsen(f, 4);
  REQUIRE(c.values.size() == 251);
  CHECK(c.grid.step == doctest::Approx(0.04));
  CHECK(c.values[10] == f.values[40]);
}

TEST_CASE("sigma envelope formulas") {
  const auto c = SigmaEnvelope::constant(2.0);
  const double t = 100.0;
  CHECK(c(t) == doctest::Approx(std::sqrt(2 * 4 * t * std::log(std::log(4 * t)))));
  const auto p = SigmaEnvelope::power(2.0);
  for (double tt : {1e2, 1e3, 1e6}) {
    const double qv = std::pow(tt, 5.0) / 5.0;
    CHECK(p.qv(tt) == doctest::Approx(qv));
    CHECK(p(tt) / (std::pow(tt, 2.5) * std::sqrt(2 * std::log(std::log(qv)) / 5.0)) == doctest::Approx(1.0));
  }
  // Numerical quadratic variation against the closed form.
  const auto e = SigmaEnvelope::expression("t^2");
  CHECK(e.qv(10.0) == doctest::Approx(1e5 / 5.0).epsilon(1e-9));
  CHECK(e(10.0) == doctest::Approx(p(10.0)).epsilon(1e-8));
}

TEST_CASE("sigma envelope domain guard") {
  const auto c = SigmaEnvelope::constant(1.0);
  CHECK_FALSE(c.defined_at(2.0));
  CHECK_THROWS_AS(c(2.0), DomainError);
  CHECK(c.defined_at(3.0));
}

TEST_CASE("cauchy median") {
  auto z = endpoints_stable(1.0, 1.0, 1, 20001, 21);
  std::nth_element(z.begin(), z.begin() + 10000, z.end());
  CHECK(std::fabs(z[10000]) < 0.05);
}

TEST_CASE("stable self-similarity") {
  const double alpha = 1.5;
  const auto z1 = endpoints_stable(alpha, 1.0, 16, 4000, 31);
  auto z2 = endpoints_stable(alpha, 2.0, 32, 4000, 32);
  for (double& v : z2) v /= std::pow(2.0, 1.0 / alpha);
  const double d = ks_statistic(z1, z2);
  const double crit = 1.628 * std::sqrt(2.0 / 4000.0);  // significance 0.01
  CHECK(d < crit);
}

TEST_CASE("stable tail index") {
  const double alpha = 0.6;
  auto z = endpoints_stable(alpha, 1.0, 1, 200000, 41);
  for (double& v : z) v = std::fabs(v);
  std::sort(z.begin(), z.end());
  std::vector<double> lx, ly;
  for (double lg = 2.0; lg <= 4.0 + 1e-9; lg += 0.25) {
    const double x = std::pow(10.0, lg);
    const auto above = z.end() - std::upper_bound(z.begin(), z.end(), x);
    lx.push_back(std::log(x));
    ly.push_back(std::log(double(above) / z.size()));
  }
  CHECK(oracle::slope(lx, ly) == doctest::Approx(-alpha).epsilon(0.1 / alpha));
}

TEST_CASE("stable parameter validation") {
  const UniformGrid g(0.1, 10);
  CHECK_THROWS_AS(sample_stable(2.0, 1.0, 0.0, g, 1, 0), ValidationError);
  CHECK_THROWS_AS(sample_stable(0.0, 1.0, 0.0, g, 1, 0), ValidationError);
  CHECK_THROWS_AS(sample_stable(1.5, 1.0, 1.5, g, 1, 0), ValidationError);
}

TEST_CASE("envelope integrability matches the p-integral") {
  for (double alpha : {0.6, 1.0, 1.5}) {
    for (double eps : {0.5, 0.9, 1.0 / alpha, 2.0}) {
      const bool finite = eps * alpha > 1.0 + 1e-12;
      CHECK(envelope_integrability(Envelope::power(eps), alpha, 1e6) ==
            (finite ? Integrability::finite : Integrability::infinite));
      // Same envelope without the power tag goes through quadrature.
      const auto expr = Envelope([eps](double t) { return std::pow(1.0 + t, eps); }, EnvelopeRole::gamma, "expr");
      if (std::fabs(eps * alpha - 1.0) > 0.05)
        CHECK(envelope_integrability(expr, alpha, 1e8) ==
              (finite ? Integrability::finite : Integrability::infinite));
    }
  }
}

}

TEST_SUITE("noise_lil") {

TEST_CASE("iterated-logarithm proxy for brownian noise") {
  const UniformGrid g(0.05, 20000);  // T = 1e3
  const auto env = SigmaEnvelope::constant(1.0);
  int inside = 0;
  const int paths = 200;
  for (int p = 0; p < paths; ++p) {
    const auto z = sample_brownian([](double) { return 1.0; }, g, 2024, p);
    std::vector<double> t, v;
    for (std::size_t k = g.steps / 2; k <= g.steps; ++k) {
      t.push_back(g.time(k));
      v.push_back(std::fabs(z.values[k]) / env(g.time(k)));
    }
    const double m = *std::max_element(v.begin(), v.end());
    inside += (m >= 0.5 && m <= 1.5);
  }
  MESSAGE("fraction inside [0.5, 1.5]: " << double(inside) / paths);
  CHECK(inside >= 0.9 * paths);
}

}
