#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "volterra/asymptotics.hpp"
#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/noise.hpp"
#include "volterra/scenario.hpp"
#include "volterra/solver.hpp"

namespace py = pybind11;
using namespace volterra;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict check_dict(const Check& c) {
  py::dict d;
  d["name"] = c.name;
  d["status"] = to_string(c.status);
  d["measured"] = c.measured;
  d["lo"] = c.lo;
  d["hi"] = c.hi;
  d["theorem"] = c.theorem;
  return d;
}

py::list checks_list(const std::vector<Check>& checks) {
  py::list out;
  for (const auto& c : checks) out.append(check_dict(c));
  return out;
}

py::dict estimate_dict(const LimitEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["lo"] = e.lo;
  d["hi"] = e.hi;
  d["flag"] = to_string(e.flag);
  d["times"] = to_array(e.times);
  d["values"] = to_array(e.values);
  return d;
}

py::dict trajectory_dict(const Trajectory& tr) {
  std::vector<double> t(tr.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = tr.time(k);
  py::dict d;
  d["t"] = to_array(t);
  d["x"] = to_array(tr.x);
  d["H"] = to_array(tr.H);
  d["Z"] = to_array(tr.Z);
  d["truncated"] = tr.truncated;
  d["recursive"] = tr.recursive;
  return d;
}

py::dict run(const std::string& config_text) {
  const RunConfig cfg = parse_config(config_text);
  const Scenario s = build_scenario(cfg);
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run_path(s);
  }
  const auto asserts = evaluate_assertions(cfg, r.path.metrics);
  py::dict d;
  d["regime"] = to_string(r.path.report.regime);
  d["L"] = estimate_dict(r.path.report.L);
  d["G_L"] = r.path.report.G_L;
  d["G_U"] = r.path.report.G_U;
  d["metrics"] = r.path.metrics;
  d["checks"] = checks_list(r.path.report.checks);
  d["assertions"] = checks_list(asserts);
  bool ok = r.path.report.all_passed();
  for (const auto& a : asserts) ok = ok && a.status != CheckStatus::fail;
  d["passed"] = ok;
  d["trajectory"] = trajectory_dict(r.trajectory);
  d["report"] = run_report_text(s, r, asserts);
  return d;
}

py::dict ensemble(const std::string& config_text, unsigned workers) {
  const RunConfig cfg = parse_config(config_text);
  const Scenario s = build_scenario(cfg);
  EnsembleResult e;
  {
    py::gil_scoped_release release;
    e = run_ensemble(s, workers);
  }
  const auto asserts = evaluate_assertions(cfg, e.metrics);
  py::dict d;
  d["metrics"] = e.metrics;
  d["checks"] = checks_list(e.checks);
  d["assertions"] = checks_list(asserts);
  py::list paths;
  for (const auto& p : e.paths) paths.append(py::cast(p.metrics));
  d["paths"] = paths;
  bool ok = e.all_passed();
  for (const auto& a : asserts) ok = ok && a.status != CheckStatus::fail;
  d["passed"] = ok;
  d["report"] = ensemble_report_text(s, e, asserts);
  return d;
}

py::dict convergence(const std::string& config_text) {
  const RunConfig cfg = parse_config(config_text);
  const Scenario s = build_scenario(cfg);
  ConvergenceResult c;
  {
    py::gil_scoped_release release;
    c = run_convergence(s);
  }
  py::dict d;
  d["steps"] = c.report.steps;
  d["differences"] = c.report.differences;
  d["orders"] = c.report.orders;
  d["fitted_order"] = c.report.fitted_order;
  d["exact"] = c.exact;
  d["check"] = check_dict(c.check);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Perturbed sublinear Volterra equations: solver, noise and regime classifier";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InsufficientHorizon>(m, "InsufficientHorizon", base.ptr());

  py::class_<Nonlinearity>(m, "Nonlinearity")
      .def_static("power", &Nonlinearity::power, py::arg("beta"))
      .def_static("logtype", &Nonlinearity::logtype)
      .def_static("custom", &Nonlinearity::custom, py::arg("f"), py::arg("phi"))
      .def("f", &Nonlinearity::f)
      .def("phi", &Nonlinearity::phi)
      .def("__repr__", &Nonlinearity::describe);

  m.def("eval_F", &eval_F, py::arg("n"), py::arg("x"));
  m.def("invert_F", &invert_F, py::arg("n"), py::arg("y"));
  m.def("eval_Phi", &eval_Phi, py::arg("n"), py::arg("x"));
  m.def(
      "check_phi_props",
      [](const Nonlinearity& n, double horizon, double lam) {
        const auto r = check_phi_props(n, horizon, lam);
        py::dict d;
        d["pass"] = r.pass;
        d["max_elasticity"] = r.max_elasticity;
        d["max_scaling"] = r.max_scaling;
        return d;
      },
      py::arg("n"), py::arg("horizon"), py::arg("lam"));

  py::class_<MeasureKernel>(m, "MeasureKernel")
      .def_static("exponential", &MeasureKernel::exponential, py::arg("coeff") = 1.0, py::arg("rate") = 1.0)
      .def_static("dirac", &MeasureKernel::dirac, py::arg("mass") = 1.0)
      .def("cumulative", &MeasureKernel::cumulative)
      .def_property_readonly("total_mass", &MeasureKernel::total_mass);

  py::class_<ForcingTerm>(m, "ForcingTerm")
      .def_static("zero", &ForcingTerm::zero)
      .def_static("builtin", &ForcingTerm::builtin, py::arg("name"), py::arg("params") = std::vector<double>{})
      .def_static("expression", &ForcingTerm::expression)
      .def("H", &ForcingTerm::H);

  m.def(
      "solve",
      [](const MeasureKernel& k, const Nonlinearity& n, const ForcingTerm& h, double psi, double T, double dt) {
        const Problem p{k, n, h, psi};
        return trajectory_dict(solve_deterministic(p, UniformGrid::covering(T, dt)));
      },
      py::arg("kernel"), py::arg("n"), py::arg("forcing"), py::arg("psi"), py::arg("T"), py::arg("dt"));

  m.def(
      "estimate_L",
      [](const std::function<double(double)>& gamma, const Nonlinearity& n, double mass, double horizon,
         int samples) { return estimate_dict(estimate_L(gamma, n, mass, horizon, samples)); },
      py::arg("gamma"), py::arg("n"), py::arg("mass"), py::arg("horizon"), py::arg("samples") = 12);

  m.def(
      "sample_brownian",
      [](const std::function<double(double)>& sigma, double T, double dt, std::uint64_t seed, std::uint64_t stream) {
        return to_array(sample_brownian(sigma, UniformGrid::covering(T, dt), seed, stream).values);
      },
      py::arg("sigma"), py::arg("T"), py::arg("dt"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "sample_stable",
      [](double alpha, double scale, double skew, double T, double dt, std::uint64_t seed, std::uint64_t stream) {
        return to_array(sample_stable(alpha, scale, skew, UniformGrid::covering(T, dt), seed, stream).values);
      },
      py::arg("alpha"), py::arg("scale"), py::arg("skew"), py::arg("T"), py::arg("dt"), py::arg("seed"),
      py::arg("stream") = 0);
  m.def(
      "power_envelope_integrable",
      [](double eps, double alpha) {
        return envelope_integrability(Envelope::power(eps), alpha, 1e6) == Integrability::finite;
      },
      py::arg("eps"), py::arg("alpha"));

  m.def("parse_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        "Validates config text and returns its canonical form.");
  m.def("canned_ids", &canned_ids);
  m.def("canned_config", &canned_config);
  m.def("run", &run, py::arg("config"));
  m.def("ensemble", &ensemble, py::arg("config"), py::arg("workers") = 0);
  m.def("convergence", &convergence, py::arg("config"));
}
