#include "l1nc/experiments.hpp"
#include "l1nc/problems.hpp"
#include "l1nc/stationarity.hpp"
#include "l1nc/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>

namespace py = pybind11;
using namespace l1nc;

namespace {

// Smooth part supplied as Python callables; the GIL is held for the whole solve.
class PyOracle final : public SmoothOracle {
 public:
  PyOracle(Index n, py::function value, py::function gradient, py::function hess_vec)
      : n_(n), value_(std::move(value)), gradient_(std::move(gradient)),
        hess_vec_(std::move(hess_vec)) {}

  Index dim() const override { return n_; }
  double value(const Vector& x) const override { return value_(x).cast<double>(); }
  Vector gradient(const Vector& x) const override { return gradient_(x).cast<Vector>(); }
  Vector hess_vec(const Vector& x, const Vector& v) const override {
    return hess_vec_(x, v).cast<Vector>();
  }

 private:
  Index n_;
  py::function value_, gradient_, hess_vec_;
};

py::object optional_float(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict trace_columns_dict(const Trace& trace) {
  py::list iter, phase, kind, step, ls_j, norm_d, fval, norm_g, norm_g_eps, norm_Gt, lmin,
      hvp, grad, f_evals;
  for (const IterationTrace& r : trace) {
    iter.append(r.iter);
    phase.append(std::string(to_string(r.phase)));
    kind.append(std::string(to_string(r.step_kind)));
    step.append(r.step_size);
    ls_j.append(r.ls_j);
    norm_d.append(r.norm_d);
    fval.append(r.fval);
    norm_g.append(r.norm_g);
    norm_g_eps.append(r.norm_g_eps);
    norm_Gt.append(r.norm_Gt);
    lmin.append(optional_float(r.lambda_min));
    hvp.append(r.counters.hvp_count);
    grad.append(r.counters.grad_evals);
    f_evals.append(r.counters.f_evals);
  }
  py::dict d;
  d["iter"] = iter;
  d["phase"] = phase;
  d["step_kind"] = kind;
  d["step_size"] = step;
  d["ls_j"] = ls_j;
  d["norm_d"] = norm_d;
  d["fval"] = fval;
  d["norm_g"] = norm_g;
  d["norm_g_eps"] = norm_g_eps;
  d["norm_Gt"] = norm_Gt;
  d["lambda_min"] = lmin;
  d["hvp"] = hvp;
  d["grad"] = grad;
  d["f_evals"] = f_evals;
  return d;
}

SolverConfig config_for(SolverKind s, const std::string& preset, const std::string& json) {
  SolverConfig base;
  if (preset == "toy")
    base = toy_config(s);
  else if (preset == "student-t")
    base = student_t_config(s);
  else if (preset != "default")
    throw ConfigError("unknown preset '" + preset + "'");
  return json.empty() ? base : config_from_json(json, base);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "l1-regularized nonconvex second-order solvers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

  py::class_<CompositeProblem, std::shared_ptr<CompositeProblem>>(m, "Problem")
      .def_property_readonly("dim", &CompositeProblem::dim)
      .def_property_readonly("lam", &CompositeProblem::lambda)
      .def("phi", &CompositeProblem::phi, py::arg("x"))
      .def("value", [](const CompositeProblem& p, const Vector& x) { return p.oracle().value(x); })
      .def("gradient",
           [](const CompositeProblem& p, const Vector& x) { return p.oracle().gradient(x); })
      .def("hess_vec", [](const CompositeProblem& p, const Vector& x,
                          const Vector& v) { return p.oracle().hess_vec(x, v); });

  m.def("toy_problem", [] { return std::make_shared<CompositeProblem>(make_toy_problem()); });
  m.def(
      "quadratic_problem",
      [](const Matrix& Q, const Vector& c, double lam) {
        return std::make_shared<CompositeProblem>(std::make_shared<QuadraticOracle>(Q, c), lam);
      },
      py::arg("Q"), py::arg("c"), py::arg("lam"));
  m.def(
      "student_t_problem",
      [](Index n, double d_db, std::uint64_t seed) {
        const StudentTInstance inst = build_student_t(SignalSpec{n, d_db, seed});
        return py::make_tuple(std::make_shared<CompositeProblem>(*inst.problem), inst.x_true);
      },
      py::arg("n") = 256, py::arg("d") = 20.0, py::arg("seed") = 0);
  m.def(
      "callback_problem",
      [](Index n, double lam, py::function value, py::function gradient, py::function hess_vec) {
        return std::make_shared<CompositeProblem>(
            std::make_shared<PyOracle>(n, std::move(value), std::move(gradient),
                                       std::move(hess_vec)),
            lam);
      },
      py::arg("n"), py::arg("lam"), py::arg("value"), py::arg("gradient"), py::arg("hess_vec"));

  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("a"));
  m.def(
      "gradient_mapping",
      [](const CompositeProblem& p, const Vector& x, double t) {
        return gradient_mapping(p, x, t);
      },
      py::arg("problem"), py::arg("x"), py::arg("t"));
  m.def(
      "residual_g",
      [](const CompositeProblem& p, const Vector& x) { return residual_g(p, x); },
      py::arg("problem"), py::arg("x"));
  m.def(
      "residual_g_eps",
      [](const CompositeProblem& p, const Vector& x, double eps) {
        return residual_g_eps(p, x, eps);
      },
      py::arg("problem"), py::arg("x"), py::arg("eps"));

  m.def(
      "default_config",
      [](const std::string& solver, const std::string& preset) {
        return config_to_json(config_for(solver_from_string(solver), preset, ""));
      },
      py::arg("solver") = "pgn2cm", py::arg("preset") = "default");

  m.def(
      "solve",
      [](const CompositeProblem& p, const Vector& x0, const std::string& solver,
         const std::string& preset, const std::string& config_json, const std::string& mode) {
        const SolverKind s = solver_from_string(solver);
        const SolverConfig cfg = config_for(s, preset, config_json);
        const RunRecord r = execute(solver, s, p, x0, cfg, fpgn2cm_mode_from_string(mode));
        py::dict out;
        out["x"] = r.report.final_x;
        out["status"] = std::string(to_string(r.report.status));
        out["iterations"] = r.report.iterations;
        out["fval"] = r.fval;
        out["norm_g"] = r.report.certificate.norm_g;
        out["norm_g_eps"] = r.report.certificate.norm_g_eps;
        out["lambda_min"] = optional_float(r.report.certificate.lambda_min);
        out["hvp_count"] = r.report.counters.hvp_count;
        out["grad_evals"] = r.report.counters.grad_evals;
        out["trace_valid"] = r.validation.ok;
        out["validation_failures"] = r.validation.failures;
        out["config"] = config_to_json(r.config);
        out["trace"] = trace_columns_dict(r.report.trace);
        return out;
      },
      py::arg("problem"), py::arg("x0"), py::arg("solver") = "pgn2cm",
      py::arg("preset") = "default", py::arg("config") = "", py::arg("mode") = "nonconvex");

  m.def(
      "validate_trace_file",
      [](const std::string& path, const std::string& config_json) {
        const TraceValidation v =
            validate_trace(read_trace_file(path), config_from_json(config_json));
        return py::make_tuple(v.ok, v.failures);
      },
      py::arg("path"), py::arg("config"));
}
