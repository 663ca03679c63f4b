#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "volterra/asymptotics.hpp"
#include "volterra/errors.hpp"

using namespace volterra;

namespace {
LimitEstimate finite_L(double v, double half = 0.0) {
  LimitEstimate e;
  e.value = v;
  e.lo = v - half;
  e.hi = v + half;
  return e;
}

LimitEstimate flagged(LimitFlag f) {
  LimitEstimate e;
  e.flag = f;
  e.value = f == LimitFlag::infinite ? INFINITY : 0.0;
  e.lo = e.value;
  e.hi = e.value;
  return e;
}

LimitEstimate rising_trace(double base) {
  LimitEstimate e = finite_L(base);
  for (int i = 0; i < 6; ++i) {
    e.times.push_back(std::pow(2.0, i));
    e.values.push_back(base * (1 + i));
  }
  return e;
}
}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("bounded gamma has L = 0") {
  const auto e = estimate_L([](double) { return 5.0; }, Nonlinearity::power(0.5), 1.0, 1e6);
  CHECK(e.flag == LimitFlag::zero);
  CHECK(regime_of(e) == Regime::ode_dominated);
}

TEST_CASE("power family recovers L") {
  const double beta = 0.5;
  for (double L : {0.5, 1.618, 3.0}) {
    const auto g = [&](double t) { return std::pow(L * (1 - beta) * t, 1 / (1 - beta)); };
    const auto e = estimate_L(g, Nonlinearity::power(beta), 1.0, 1e6);
    CHECK(e.flag == LimitFlag::finite);
    CHECK(e.value == doctest::Approx(L).epsilon(0.01));
  }
}

TEST_CASE("logtype family recovers L = 2") {
  const double e1 = std::exp(1.0);
  const auto g = [&](double t) { return std::exp(std::sqrt(4 * (t + 1))) - e1; };
  const auto e = estimate_L(g, Nonlinearity::logtype(), 1.0, 1e3);
  CHECK(e.value == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("ratio scales as c^(1-beta)") {
  const double beta = 0.3, c = 7.5;
  const auto n = Nonlinearity::power(beta);
  const auto g = [](double t) { return 1.0 + t * t; };
  const auto a = estimate_L(g, n, 2.0, 1e4);
  const auto b = estimate_L([&](double t) { return c * g(t); }, n, 2.0, 1e4);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values[i] == doctest::Approx(a.values[i] * std::pow(c, 1 - beta)).epsilon(1e-8));
}

TEST_CASE("short horizon is rejected") {
  CHECK_THROWS_AS(estimate_L([](double t) { return 1 + t; }, Nonlinearity::power(0.5), 1.0, 1e3, 4),
                  InsufficientHorizon);
}

TEST_CASE("geometric times") {
  const auto t = geometric_times(1024.0, 4);
  REQUIRE(t.size() == 4);
  CHECK(t[0] == 128.0);
  CHECK(t[3] == 1024.0);
}

TEST_CASE("extrapolation of a 1/sqrt(t) trace") {
  std::vector<double> t, v;
  for (int j = 11; j >= 0; --j) {
    t.push_back(1e6 / std::pow(2.0, j));
    v.push_back(2.0 + 3.0 / std::sqrt(t.back()));
  }
  const auto e = extrapolate_limit(t, v);
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(e.contains(2.0));
}

TEST_CASE("tail limsup") {
  std::vector<double> t, c, s, m;
  const double T = 1e8;
  for (int i = 0; i <= 200000; ++i) {
    const double x = T / 2 + i * (T / 2) / 200000;
    t.push_back(x);
    c.push_back(3.0);
    s.push_back(std::sin(std::log(x)));
    m.push_back(x / T);
  }
  CHECK(tail_limsup(t, c).limsup == 3.0);
  CHECK(tail_limsup(t, c).liminf == 3.0);
  double smax = -2.0;
  for (double x = T / 2; x <= T; x *= 1.00001) smax = std::max(smax, std::sin(std::log(x)));
  CHECK(tail_limsup(t, s).limsup == doctest::Approx(smax).epsilon(1e-6));
  CHECK(tail_limsup(t, m).limsup == doctest::Approx(1.0));
  CHECK(tail_limsup(t, m).window_max.size() == 8);
  CHECK_THROWS_AS(tail_limsup({1.0, 2.0}, {1.0, 1.0}), InsufficientHorizon);
}

TEST_CASE("sin(log t) tail limsup over a full period is about one") {
  std::vector<double> t, s;
  const double T = std::exp(20.0);
  for (int i = 0; i <= 400000; ++i) {
    // geometric sampling spanning [T/2, T]
    const double x = T / 2 * std::pow(2.0, i / 400000.0);
    t.push_back(x);
    s.push_back(std::sin(std::log(x) * 10.0));
  }
  CHECK(tail_limsup(t, s).limsup == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("bound identities") {
  for (double L : {1.1, 1.5, 2.0, 10.0, 1e6}) {
    CHECK(bound_GU(L) * (L - 1) == doctest::Approx(L));
    CHECK((bound_GL(L) - 1) * L == doctest::Approx(1.0));
    CHECK(bound_GL(L) > 1.0);
    CHECK(bound_GU(L) > 1.0);
  }
  CHECK(bound_GL(1e9) == doctest::Approx(1.0));
  CHECK(bound_GU(1e9) == doctest::Approx(1.0));
}

TEST_CASE("regime is monotone in L") {
  std::vector<LimitEstimate> seq = {flagged(LimitFlag::zero)};
  for (double v = 0.05; v < 50; v *= 1.3) seq.push_back(finite_L(v, 0.02 * v));
  seq.push_back(flagged(LimitFlag::infinite));
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(regime_of(seq[i - 1]) <= regime_of(seq[i]));
  CHECK(regime_of(finite_L(1.0, 0.01)) == Regime::indeterminate);
  CHECK(regime_of(finite_L(0.5, 0.01)) == Regime::intermediate_low);
}

TEST_CASE("deterministic L = 0 classification") {
  ClassifyInputs in;
  in.L = flagged(LimitFlag::zero);
  in.clock = finite_L(1.01);
  in.x_over_H = rising_trace(20.0);
  const auto r = classify(in);
  CHECK(r.regime == Regime::ode_dominated);
  REQUIRE(r.find("clock_limit"));
  CHECK(r.find("clock_limit")->status == CheckStatus::pass);
  CHECK(r.find("xh_divergence")->status == CheckStatus::pass);
  CHECK(r.all_passed());
}

TEST_CASE("deterministic L = 2 classification") {
  ClassifyInputs in;
  in.L = finite_L(2.0);
  in.clock = finite_L(1.0);
  in.x_over_H = finite_L(1.9);
  const auto r = classify(in);
  CHECK(r.regime == Regime::intermediate_high);
  CHECK(r.G_L == doctest::Approx(1.5));
  CHECK(r.G_U == doctest::Approx(2.0));
  const Check* c = r.find("xh_bounds");
  REQUIRE(c);
  CHECK(c->lo == doctest::Approx(1.5 * 0.95));
  CHECK(c->hi == doctest::Approx(2.0 * 1.05));
  CHECK(c->status == CheckStatus::pass);
  in.x_over_H = finite_L(2.5);
  CHECK(classify(in).find("xh_bounds")->status == CheckStatus::fail);
  const auto text = r.serialize();
  CHECK(text.find("regime = intermediate_high") != std::string::npos);
  CHECK(text.find("checks.xh_bounds = pass") != std::string::npos);
}

TEST_CASE("missing statistics give n/a") {
  ClassifyInputs in;
  in.L = finite_L(2.0);
  const auto r = classify(in);
  for (const auto& c : r.checks) CHECK(c.status == CheckStatus::na);
}

TEST_CASE("brownian infinite-L classification") {
  ClassifyInputs in;
  in.mode = Mode::brownian;
  in.L = flagged(LimitFlag::infinite);
  in.tolerance = 0.1;
  TailStats s;
  s.limsup = 0.9;
  s.liminf = -1.1;
  in.x_over_sigma = s;
  in.residual_over_sigma = 0.01;
  const auto r = classify(in);
  CHECK(r.find("sigma_limsup")->status == CheckStatus::pass);
  CHECK(r.find("sigma_liminf")->status == CheckStatus::pass);
  CHECK(r.find("residual_over_sigma")->status == CheckStatus::pass);
  in.residual_over_sigma = 0.3;
  CHECK(classify(in).find("residual_over_sigma")->status == CheckStatus::fail);
}

TEST_CASE("majorant clock after gamma agrees with estimate_L") {
  const double beta = 0.5;
  const auto n = Nonlinearity::power(beta);
  for (double L : {0.7, 2.0}) {
    const auto g = [&](double t) { return std::pow(L * (1 - beta) * t, 1 / (1 - beta)); };
    const auto est = estimate_L(g, n, 1.0, 1e6);
    std::vector<double> vals;
    const auto times = geometric_times(1e6, 12);
    for (double t : times) vals.push_back(eval_Phi(n, g(t)) / t);
    const auto phi_est = extrapolate_limit(times, vals);
    CHECK(phi_est.lo <= est.hi + 1e-9);
    CHECK(est.lo <= phi_est.hi + 1e-9);
  }
}

}
