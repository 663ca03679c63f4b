// One line per acceptance criterion; exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "volterra/asymptotics.hpp"
#include "volterra/config.hpp"
#include "volterra/convolution.hpp"
#include "volterra/noise.hpp"
#include "volterra/scenario.hpp"
#include "volterra/solver.hpp"

using namespace volterra;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [FAIL]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double center, double rel) { return std::fabs(v - center) <= rel * std::fabs(center); }

Scenario canned(const std::string& id) { return build_scenario(parse_config(canned_config(id))); }

double fraction(const EnsembleResult& e, const std::function<bool(const Metrics&)>& pred) {
  std::size_t n = 0;
  for (const auto& p : e.paths) n += pred(p.metrics) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(e.paths.size());
}

void golden(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = canned("golden");
  const auto r = run_path(s);
  const double secs = seconds_since(t0);
  const double phi = (1 + std::sqrt(5.0)) / 2, A = (3 + std::sqrt(5.0)) / 2;
  const double clock = r.path.metrics.at("clock"), xh = r.path.metrics.at("xh");
  o.expect(s.config.T == 1e4 && s.config.dt == 1e-2, "T=1e4 dt=1e-2");
  o.expect(std::fabs(clock - phi) <= 0.08, fmt("clock %.5f vs %.5f +- 0.08", clock, phi));
  o.expect(within(xh, A, 0.05), fmt("x/H %.5f vs %.5f +- 5%%", xh, A));
  o.expect(r.trajectory.recursive, "O(N) recursion");
  o.expect(secs <= 30.0, fmt("runtime %.2f s <= 30 s", secs));
}

void intermediate_high(Outcome& o) {
  const Scenario s = canned("Lgt1");
  const auto r = run_path(s);
  const double clock = r.path.metrics.at("clock"), xh = r.path.metrics.at("xh");
  o.expect(s.config.T == 1e3, "T=1e3");
  o.expect(within(xh, 2.0, 0.10), fmt("x/H %.5f vs 2 +- 10%%", xh));
  o.expect(within(clock, 1.0, 0.10), fmt("clock %.5f vs 1 +- 10%%", clock));
}

void small_perturbation(Outcome& o) {
  const Scenario s = canned("small_perturbation");
  const auto r = run_path(s);
  const auto& m = r.path.metrics;
  o.expect(s.config.T == 1e4 && s.problem.psi == 1.0, "T=1e4 psi=1");
  o.expect(within(m.at("clock"), 1.0, 0.05), fmt("clock %.5f vs 1 +- 5%%", m.at("clock")));
  o.expect(m.at("xh_last") >= 50.0, fmt("x/H at T %.4g >= 50", m.at("xh_last")));
  o.expect(m.at("xh_rising") == 1.0, "x/H rising over last 4 samples");
}

void forcing_dominated(Outcome& o) {
  const Scenario s = canned("Linf");
  const auto r = run_path(s);
  const auto& m = r.path.metrics;
  o.expect(r.path.truncated, fmt("truncated at t=%.6g", r.path.reached));
  o.expect(within(m.at("xh"), 1.0, 0.05), fmt("x/H %.5f vs 1 +- 5%%", m.at("xh")));
  o.expect(m.at("clock_last") >= 10.0, fmt("clock %.4g >= 10", m.at("clock_last")));
  o.expect(m.at("clock_rising") == 1.0, "clock rising");
}

void brownian_constant(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = canned("sigma_const");
  const auto e = run_ensemble(s, 0);
  const double secs = seconds_since(t0);
  o.expect(e.paths.size() == 100 && s.config.T == 1e3 && s.sigma_constant, "N=100 T=1e3 sigma=1");
  const double a = fraction(e, [](const Metrics& m) { return m.at("clock_limsup") <= 1.1; });
  const double b = fraction(e, [](const Metrics& m) { return m.at("max_abs_x") >= 10.0; });
  o.expect(a >= 0.95, fmt("limsup F(|X|)/Mt <= 1.1 on %.2f of paths (>= 0.95)", a));
  o.expect(b >= 0.95, fmt("max|X| >= 10 on %.2f of paths (>= 0.95)", b));
  o.expect(secs <= 120.0, fmt("runtime %.2f s <= 120 s", secs));
}

void brownian_large(Outcome& o) {
  const Scenario s = canned("stoch1");
  const auto e = run_ensemble(s, 0);
  o.expect(e.paths.size() == 100 && s.config.T == 1e3, "N=100 T=1e3 sigma=t^2 beta=1/2");
  const double a = fraction(e, [](const Metrics& m) { return std::fabs(m.at("residual_over_sigma")) <= 0.1; });
  o.expect(a >= 0.9, fmt("|X-Z|/Sigma <= 0.1 on %.2f of paths (>= 0.9)", a));
  const double ls = e.metrics.at("ensemble.sigma_limsup");
  o.expect(ls >= 0.6 && ls <= 1.4, fmt("ensemble limsup X/Sigma %.4f in [0.6, 1.4]", ls));
}

void stable_retention(Outcome& o) {
  const Scenario s = canned("stoch2");
  const auto e = run_ensemble(s, 0);
  o.expect(e.paths.size() == 100 && s.config.T == 1e3 && s.config.alpha == 1.5 && s.config.beta == 0.9,
           "N=100 T=1e3 alpha=1.5 beta=0.9");
  const double a = fraction(e, [](const Metrics& m) { return m.at("clock_limsup") <= 1.15; });
  o.expect(a >= 0.9, fmt("limsup F(|X|)/Mt <= 1.15 on %.2f of paths (>= 0.9)", a));
  int agree = 0, total = 0;
  for (double alpha : {0.6, 1.0, 1.5}) {
    for (double eps : {0.5, 0.9, 1.0 / alpha, 2.0}) {
      const bool closed_finite = eps * alpha > 1.0 + 1e-12;
      const bool got = envelope_integrability(Envelope::power(eps), alpha, 1e6) == Integrability::finite;
      agree += got == closed_finite;
      ++total;
    }
  }
  o.expect(agree == total, fmt("integrability grid %.0f/%.0f match", agree, total));
}

struct LPoint {
  std::string label;
  std::function<double(double)> gamma;
  Nonlinearity n;
  double horizon;
  double L;  // inf or 0 for flags
};

void l_oracle(Outcome& o) {
  const double e = std::exp(1.0);
  std::vector<LPoint> pts;
  const auto pw = [](double L, double beta) {
    return [L, beta](double t) { return std::pow(L * (1 - beta) * t, 1 / (1 - beta)); };
  };
  for (double L : {0.5, 1.0, (1 + std::sqrt(5.0)) / 2, 3.0})
    pts.push_back({fmt("power1/2 L=%.3f", L), pw(L, 0.5), Nonlinearity::power(0.5), 1e6, L});
  pts.push_back({"power0.9 L=2", pw(2.0, 0.9), Nonlinearity::power(0.9), 1e6, 2.0});
  for (double L : {1.5, 2.0, 4.0})
    pts.push_back({fmt("logtype L=%.1f", L), [L, e](double t) { return std::exp(std::sqrt(2 * L * (t + 1))) - e; },
                   Nonlinearity::logtype(), 1e3, L});
  for (double eps : {2.0, 10.0, 20.0}) {
    const double L = eps < 10 ? 0.0 : (eps > 10 ? INFINITY : eps * 0.9 + 1);
    pts.push_back({fmt("(1+t)^%.0f beta=0.9", eps), [eps](double t) { return std::pow(1 + t, eps); },
                   Nonlinearity::power(0.9), 1e6, L});
  }
  pts.push_back({"exp(t) beta=1/2", [](double t) { return std::exp(t); }, Nonlinearity::power(0.5), 200.0, INFINITY});

  int ok = 0;
  std::ostringstream bad;
  for (const auto& p : pts) {
    bool pass = false;
    std::string got;
    try {
      const auto est = estimate_L(p.gamma, p.n, 1.0, p.horizon);
      if (std::isinf(p.L)) pass = est.flag == LimitFlag::infinite;
      else if (p.L == 0.0) pass = est.flag == LimitFlag::zero;
      else pass = est.flag == LimitFlag::finite && within(est.value, p.L, 0.02);
      got = fmt("%.5g", est.value) + "/" + to_string(est.flag);
    } catch (const std::exception& ex) {
      got = ex.what();
    }
    ok += pass;
    if (!pass) bad << " " << p.label << " got " << got;
  }
  o.expect(ok == static_cast<int>(pts.size()), fmt("%.0f/%.0f points", ok, pts.size()) + bad.str());
}

void convergence(Outcome& o) {
  const auto ode = run_convergence(canned("conv_ode"));
  double maxdiff = 0.0;
  for (double d : ode.report.differences) maxdiff = std::max(maxdiff, d);
  const bool ode_ok = ode.exact || (ode.report.fitted_order >= 1.8 && ode.report.fitted_order <= 2.2);
  o.expect(ode_ok && ode.report.differences.size() == 3,
           ode.exact ? fmt("sqrt ODE exact on the grid (max diff %.1e)", maxdiff)
                     : fmt("sqrt ODE order %.4f", ode.report.fitted_order));
  for (const char* id : {"conv_ode_logtype", "conv_logtype"}) {
    const auto c = run_convergence(canned(id));
    const double q = c.report.fitted_order;
    o.expect(!c.exact && q >= 1.8 && q <= 2.2 && c.report.differences.size() == 3,
             std::string(id) + fmt(" order %.4f", q));
  }
  const Problem p{MeasureKernel::exponential(), Nonlinearity::logtype(), ForcingTerm::builtin("log1p"), 1.0};
  const UniformGrid g(0.01, 1000);
  SolverOptions generic;
  generic.force_generic = true;
  const auto a = solve_deterministic(p, g);
  const auto b = solve_deterministic(p, g, generic);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::fabs(a.x[k] - b.x[k]));
  o.expect(a.recursive && !b.recursive && worst <= 1e-10, fmt("recursion vs generic %.2e <= 1e-10", worst));
}

void validators(Outcome& o) {
  const auto p = check_phi_props(Nonlinearity::power(0.5), 1e8, 2.0);
  const auto l = check_phi_props(Nonlinearity::logtype(), 1e8, 3.0);
  const auto x = check_phi_props(Nonlinearity::custom("x", "x"), 1e8, 2.0);
  o.expect(p.pass, "power props pass");
  o.expect(l.pass, "logtype props pass");
  o.expect(!x.pass, "phi(x)=x fails");
  for (const auto& n : {Nonlinearity::power(0.5), Nonlinearity::logtype()}) {
    const double r = eval_F(n, 1e8) / eval_Phi(n, 1e8);
    o.expect(within(r, 1.0, 0.02), n.describe() + fmt(" F/Phi(1e8) %.6f", r));
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"golden-ratio clock limit", golden},
      {"intermediate-high bounds", intermediate_high},
      {"small-perturbation persistence", small_perturbation},
      {"forcing-dominated growth", forcing_dominated},
      {"brownian constant sigma", brownian_constant},
      {"brownian large-noise regime", brownian_large},
      {"stable-noise retention", stable_retention},
      {"L-estimator oracle suite", l_oracle},
      {"solver convergence", convergence},
      {"validator suite", validators},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& ex) {
      o.expect(false, std::string("error: ") + ex.what());
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
