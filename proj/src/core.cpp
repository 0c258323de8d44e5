#include "l1nc/core.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace l1nc {

SymmetricOperator SymmetricOperator::from_matrix(Matrix m) {
  const Index n = m.rows();
  return SymmetricOperator(
      n, [mat = std::move(m)](const Vector& v) -> Vector { return mat * v; });
}

SymmetricOperator SmoothOracle::hessian_at(const Vector& x) const {
  return SymmetricOperator(
      dim(), [this, base = Vector(x)](const Vector& v) -> Vector {
        return hess_vec(base, v);
      });
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothOracle> oracle,
                                   double lambda)
    : oracle_(std::move(oracle)), lambda_(lambda) {
  if (!oracle_) throw ConfigError("composite problem needs an oracle");
  if (oracle_->dim() < 1) throw ConfigError("oracle dimension must be >= 1");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
    throw ConfigError("lambda must be a finite positive number");
}

double CompositeProblem::phi(const Vector& x) const {
  return oracle_->value(x) + lambda_ * x.lpNorm<1>();
}

double SolverConfig::eps_h_value() const {
  return eps_h ? *eps_h : std::sqrt(eps_g);
}

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw ConfigError(std::string("invalid solver config: ") + what);
}

}  // namespace

void SolverConfig::validate() const {
  require(eps_g > 0.0 && eps_g < 1.0, "eps_g must lie in (0,1)");
  const double eh = eps_h_value();
  require(eh > 0.0 && eh < 1.0, "eps_h must lie in (0,1)");
  require(beta > 1.0, "beta must exceed 1");
  require(eta_bar > 0.0 && eta_bar <= 1.0, "eta_bar must lie in (0,1]");
  require(eta_nc > 0.0 && eta_nc < 0.5, "eta_nc must lie in (0,1/2)");
  require(eta_sol > 0.0 && eta_sol < 1.0, "eta_sol must lie in (0,1)");
  require(theta_nc > 0.0 && theta_nc < 1.0, "theta_nc must lie in (0,1)");
  require(theta_sol > 0.0 && theta_sol < 1.0, "theta_sol must lie in (0,1)");
  require(zeta > 0.0 && zeta < 1.0, "zeta must lie in (0,1)");
  require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  require(tau_hat >= 1.0, "tau_hat must be >= 1");
  require(tau_convex > 1.0, "tau_convex must exceed 1");
  require(sigma >= 0.0 && sigma < 1.0, "sigma must lie in [0,1)");
  require(max_iters >= 0, "max_iters must be >= 0");
  require(ls_max_backtracks >= 1, "ls_max_backtracks must be >= 1");
  require(sign_threshold >= 0.0, "sign_threshold must be >= 0");
  require(zero_tol >= 0.0, "zero_tol must be >= 0");
  require(meo_power_iters >= 1, "meo_power_iters must be >= 1");
  require(meo_dense_max_dim >= 0, "meo_dense_max_dim must be >= 0");
}

std::string_view to_string(Phase p) {
  return p == Phase::First ? "First" : "Second";
}

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::ProxG: return "ProxG";
    case StepKind::NewtonCgSol: return "NewtonCgSol";
    case StepKind::NewtonCgNc: return "NewtonCgNc";
    case StepKind::MeoNc: return "MeoNc";
    case StepKind::Terminated: return "Terminated";
  }
  return "Terminated";
}

Phase phase_from_string(std::string_view s) {
  if (s == "First") return Phase::First;
  if (s == "Second") return Phase::Second;
  throw ConfigError("unknown phase '" + std::string(s) + "'");
}

StepKind step_kind_from_string(std::string_view s) {
  for (auto k : {StepKind::ProxG, StepKind::NewtonCgSol, StepKind::NewtonCgNc,
                 StepKind::MeoNc, StepKind::Terminated}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown step kind '" + std::string(s) + "'");
}

bool all_finite(const Vector& v) { return v.allFinite(); }

double CountedProblem::phi(const Vector& x) {
  ++counters_.f_evals;
  const double v = problem_.phi(x);
  if (!std::isfinite(v)) throw EvaluationError("objective value is not finite");
  return v;
}

Vector CountedProblem::gradient(const Vector& x) {
  ++counters_.grad_evals;
  Vector g = problem_.oracle().gradient(x);
  if (g.size() != x.size() || !g.allFinite())
    throw EvaluationError("gradient is not finite");
  return g;
}

SymmetricOperator CountedProblem::hessian(const Vector& x) {
  SymmetricOperator h = problem_.oracle().hessian_at(x);
  OpCounters* c = &counters_;
  return SymmetricOperator(h.dim(), [h, c](const Vector& v) -> Vector {
    ++c->hvp_count;
    Vector out = h(v);
    if (!out.allFinite())
      throw EvaluationError("Hessian-vector product is not finite");
    return out;
  });
}

std::optional<Matrix> CountedProblem::dense_hessian(const Vector& x) {
  ++counters_.dense_hessian_evals;
  auto h = problem_.oracle().dense_hessian(x);
  if (h && !h->allFinite()) throw EvaluationError("dense Hessian is not finite");
  return h;
}

Vector CountedProblem::prox(const Vector& z, double a) {
  ++counters_.prox_count;
  return z.unaryExpr([a](double zi) {
    const double m = std::abs(zi) - a;
    return m > 0.0 ? std::copysign(m, zi) : 0.0;
  });
}

OracleCheckReport check_oracle(const SmoothOracle& oracle, const Vector& x,
                               double h, std::uint64_t seed) {
  if (!(h > 0.0)) throw ContractViolation("finite-difference step must be > 0");
  if (!x.allFinite()) throw ContractViolation("check point must be finite");

  OracleCheckReport report;
  auto fail = [&](const std::string& what, int dir) {
    std::ostringstream os;
    os << what << " (direction " << dir << ")";
    report.ok = false;
    report.failure = os.str();
    return report;
  };

  const Index n = oracle.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  const Vector grad = oracle.gradient(x);
  if (!grad.allFinite()) return fail("non-finite gradient at x", -1);

  for (int dir = 0; dir < 10; ++dir) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    v.normalize();

    const double fp = oracle.value(x + h * v);
    const double fm = oracle.value(x - h * v);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      return fail("non-finite value near x", dir);
    const double fd = (fp - fm) / (2.0 * h);
    const double an = grad.dot(v);
    report.max_gradient_error = std::max(
        report.max_gradient_error, std::abs(fd - an) / std::max(1.0, std::abs(an)));

    const Vector gp = oracle.gradient(x + h * v);
    const Vector gm = oracle.gradient(x - h * v);
    if (!gp.allFinite() || !gm.allFinite())
      return fail("non-finite gradient near x", dir);
    const Vector hv = oracle.hess_vec(x, v);
    if (!hv.allFinite()) return fail("non-finite Hessian-vector product", dir);
    const Vector fdv = (gp - gm) / (2.0 * h);
    report.max_hvp_error =
        std::max(report.max_hvp_error,
                 (fdv - hv).norm() / std::max(1.0, hv.norm()));
  }
  return report;
}

}  // namespace l1nc
