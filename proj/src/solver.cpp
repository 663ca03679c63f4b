#include "volterra/solver.hpp"

#include <algorithm>
#include <cmath>

#include "volterra/convolution.hpp"
#include "volterra/errors.hpp"

namespace volterra {

namespace {

bool blown(double v, double limit) { return !std::isfinite(v) || std::fabs(v) > limit; }

// y = c + a f(y): fixed point first, then Newton with a difference-quotient slope.
double resolve_diagonal(const Nonlinearity& n, double c, double a, double guess, double t,
                        const SolverOptions& opt) {
  if (a == 0.0) return c;
  auto scale = [](double y) { return std::max(1.0, std::fabs(y)); };
  double y = guess;
  for (int i = 0; i < opt.max_iterations; ++i) {
    const double next = c + a * n.f(y);
    if (!std::isfinite(next)) break;
    if (std::fabs(next - y) <= opt.tolerance * scale(next)) return next;
    y = next;
  }
  y = guess;
  for (int i = 0; i < opt.max_iterations; ++i) {
    const double r = y - c - a * n.f(y);
    const double h = 1e-7 * scale(y);
    const double slope = 1.0 - a * (n.f(y + h) - n.f(y - h)) / (2.0 * h);
    if (!(std::fabs(slope) > 1e-14) || !std::isfinite(slope)) break;
    const double next = y - r / slope;
    if (!std::isfinite(next)) break;
    if (std::fabs(next - y) <= opt.tolerance * scale(next)) return next;
    y = next;
  }
  throw StepFailure(t, "diagonal equation did not converge");
}

}  // namespace

Trajectory solve_deterministic(const Problem& p, const UniformGrid& grid, const SolverOptions& opt) {
  Trajectory tr;
  tr.grid = grid;
  tr.psi = p.psi;
  tr.mass = p.kernel.total_mass();
  tr.H = p.forcing.on_grid(grid);
  ConvolutionEngine conv(p.kernel, grid, ConvolutionEngine::Rule::trapezoid, opt.force_generic);
  tr.recursive = conv.recursive();
  const Nonlinearity& n = p.nonlinearity;
  const double a0 = conv.diagonal();

  tr.x.reserve(grid.size());
  tr.x.push_back(p.psi);
  conv.push(n.f(p.psi));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double c = p.psi + tr.H[k] + conv.history_term();
    if (blown(c, opt.overflow)) {
      tr.truncated = true;
      break;
    }
    const double prev = tr.x.back();
    const double guess = c + a0 * n.f(prev);
    const double y = resolve_diagonal(n, c, a0, blown(guess, opt.overflow) ? c : guess, grid.time(k), opt);
    const double g = n.f(y);
    if (blown(y, opt.overflow) || !std::isfinite(g)) {
      tr.truncated = true;
      break;
    }
    tr.x.push_back(y);
    conv.push(g);
  }
  tr.H.resize(tr.x.size());
  return tr;
}

Trajectory solve_stochastic(const Problem& p, const NoisePath& noise, const SolverOptions& opt) {
  const UniformGrid& grid = noise.grid;
  if (noise.values.size() != grid.size()) throw ValidationError("noise path does not match its grid");
  Trajectory tr;
  tr.grid = grid;
  tr.psi = p.psi;
  tr.mass = p.kernel.total_mass();
  tr.stochastic = true;
  tr.H = p.forcing.on_grid(grid);
  tr.Z = noise.values;
  ConvolutionEngine conv(p.kernel, grid, ConvolutionEngine::Rule::rectangle, opt.force_generic);
  tr.recursive = conv.recursive();
  const Nonlinearity& n = p.nonlinearity;

  tr.x.reserve(grid.size());
  tr.x.push_back(p.psi);
  conv.push(n.f(p.psi));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double y = p.psi + tr.H[k] + tr.Z[k] + conv.history_term();
    const double g = n.f(y);
    if (blown(y, opt.overflow) || !std::isfinite(g)) {
      tr.truncated = true;
      break;
    }
    tr.x.push_back(y);
    conv.push(g);
  }
  tr.H.resize(tr.x.size());
  tr.Z.resize(tr.x.size());
  return tr;
}

void fit_orders(ConvergenceReport& rep) {
  rep.orders.clear();
  for (std::size_t i = 0; i + 1 < rep.differences.size(); ++i)
    rep.orders.push_back(std::log2(rep.differences[i] / rep.differences[i + 1]));
  // Least-squares slope of log2(d_i) against i.
  const double m = static_cast<double>(rep.differences.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < rep.differences.size(); ++i) {
    const double xi = static_cast<double>(i);
    const double yi = std::log2(rep.differences[i]);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  rep.fitted_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvergenceReport refine_and_compare(const Problem& p, const UniformGrid& coarse, int levels,
                                     const SolverOptions& opt, const NoisePath* finest_noise) {
  if (levels < 3) throw ValidationError("refine_and_compare needs at least 3 levels");
  const std::size_t top = std::size_t{1} << (levels - 1);
  if (finest_noise && (finest_noise->grid.steps != coarse.steps * top))
    throw ValidationError("refine_and_compare: noise path must live on the finest grid");

  ConvergenceReport rep;
  std::vector<std::vector<double>> on_coarse;
  for (int level = 0; level < levels; ++level) {
    const std::size_t factor = std::size_t{1} << level;
    const UniformGrid g(coarse.step / static_cast<double>(factor), coarse.steps * factor);
    Trajectory tr = finest_noise ? solve_stochastic(p, coarsen(*finest_noise, top / factor), opt)
                                 : solve_deterministic(p, g, opt);
    if (tr.truncated) throw Error("refine_and_compare: solution overflowed at level " + std::to_string(level));
    std::vector<double> sub(coarse.size());
    for (std::size_t k = 0; k < sub.size(); ++k) sub[k] = tr.x[k * factor];
    on_coarse.push_back(std::move(sub));
    rep.steps.push_back(g.step);
  }
  for (int level = 0; level + 1 < levels; ++level) {
    double d = 0.0;
    const auto& a = on_coarse[static_cast<std::size_t>(level)];
    const auto& b = on_coarse[static_cast<std::size_t>(level) + 1];
    for (std::size_t k = 0; k < a.size(); ++k)
      d = std::max(d, std::fabs(b[k] - a[k]) / std::max(1.0, std::fabs(b[k])));
    rep.differences.push_back(d);
  }
  fit_orders(rep);
  return rep;
}

}  // namespace volterra
