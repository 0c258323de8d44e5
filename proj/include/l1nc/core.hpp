#pragma once

// Shared vocabulary for the l1-regularized composite solvers: the smooth
// oracle contract, the composite problem, solver configuration, operation
// counters and per-iteration trace records.
//
// The smoothness constants of f (gradient Lipschitz L_g, Hessian Lipschitz
// L_H, gradient bound U_g) appear in the convergence theory only. No routine
// in this library takes them as input; the Capped CG operator-norm bound M is
// estimated on the fly instead.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace l1nc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Invalid parameter or problem data detected at construction.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of an operation was violated by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An oracle produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal iteration cap was hit; indicates a bug, never expected.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Symmetric linear map on R^dim, known only through its action.
class SymmetricOperator {
 public:
  using Action = std::function<Vector(const Vector&)>;

  SymmetricOperator(Index dim, Action action)
      : dim_(dim), action_(std::move(action)) {}

  Index dim() const { return dim_; }
  Vector apply(const Vector& v) const { return action_(v); }
  Vector operator()(const Vector& v) const { return action_(v); }

  static SymmetricOperator from_matrix(Matrix m);

 private:
  Index dim_;
  Action action_;
};

/// Evaluation bundle for the smooth part f. Implementations must not mutate
/// interior state in any const member: oracles are shared read-only across
/// concurrent solver runs.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Product of the Hessian at x with v.
  virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;

  /// Hessian at a fixed base point as an operator. Each application is one
  /// Hessian-vector product; overrides may precompute per-point data.
  virtual SymmetricOperator hessian_at(const Vector& x) const;

  virtual bool has_dense_hessian() const { return false; }
  virtual std::optional<Matrix> dense_hessian(const Vector&) const {
    return std::nullopt;
  }
};

/// phi(x) = f(x) + lambda * ||x||_1 with lambda > 0.
class CompositeProblem {
 public:
  CompositeProblem(std::shared_ptr<const SmoothOracle> oracle, double lambda);

  const SmoothOracle& oracle() const { return *oracle_; }
  std::shared_ptr<const SmoothOracle> oracle_ptr() const { return oracle_; }
  double lambda() const { return lambda_; }
  Index dim() const { return oracle_->dim(); }

  double phi(const Vector& x) const;

 private:
  std::shared_ptr<const SmoothOracle> oracle_;
  double lambda_;
};

struct SolverConfig {
  double eps_g = 1e-5;
  /// Defaults to sqrt(eps_g) when unset.
  std::optional<double> eps_h;
  double beta = 2.0;
  double eta_bar = 1.0;
  /// Cubic-decrease line search after a minimum-eigenvalue step.
  double eta_nc = 1e-4;
  /// Quadratic-decrease line search after a Newton-CG step.
  double eta_sol = 1e-4;
  double theta_nc = 0.25;
  double theta_sol = 0.7;
  double zeta = 0.999;
  double delta = 1.0;
  double tau_hat = 1.0;
  /// Regularization multiplier of the convex-mode first-phase variant.
  double tau_convex = 2.0;
  double sigma = 0.01;
  std::int64_t max_iters = 500000;
  int ls_max_backtracks = 100;
  double sign_threshold = 1e-16;
  std::uint64_t rng_seed = 0;
  /// Relative tolerance standing in for "!= 0" in branch tests.
  double zero_tol = 1e-14;
  /// Power-iteration steps used to estimate ||H|| for the eigenvalue oracle.
  int meo_power_iters = 20;
  /// Exact eigensolve instead of Lanczos when the oracle exposes a dense
  /// Hessian and the restricted block is at most this size. 0 disables.
  int meo_dense_max_dim = 64;
  /// Start each proximal backtracking at the previous j instead of 0.
  bool prox_warm_start = false;
  bool record_trace = true;
  bool record_iterates = false;

  double eps_h_value() const;
  /// Throws ConfigError on any range violation.
  void validate() const;
};

struct OpCounters {
  std::int64_t grad_evals = 0;
  std::int64_t hvp_count = 0;
  std::int64_t prox_count = 0;
  std::int64_t f_evals = 0;
  std::int64_t dense_hessian_evals = 0;
};

enum class Phase { First, Second };
enum class StepKind { ProxG, NewtonCgSol, NewtonCgNc, MeoNc, Terminated };

std::string_view to_string(Phase p);
std::string_view to_string(StepKind k);
Phase phase_from_string(std::string_view s);
StepKind step_kind_from_string(std::string_view s);

/// One row per iterate x^k. Step fields describe the step taken from x^k;
/// fval is phi(x^k). The last row of a run has step_kind Terminated.
struct IterationTrace {
  std::int64_t iter = 0;
  Phase phase = Phase::First;
  StepKind step_kind = StepKind::Terminated;
  /// beta^j for proximal steps, theta^j for curvature and Newton steps.
  double step_size = 0.0;
  int ls_j = 0;
  double norm_d = 0.0;
  double fval = 0.0;
  double norm_g = 0.0;
  double norm_g_eps = 0.0;
  /// ||G_t(x^k)||: at the accepted t for ProxG rows, else at the check t.
  double norm_Gt = 0.0;
  std::optional<double> lambda_min;
  OpCounters counters;
  double wall_ms = 0.0;
};

using Trace = std::vector<IterationTrace>;

/// Right-hand sides of the three sufficient-decrease tests. Shared by the
/// solvers and the trace validator so both evaluate identical expressions.
inline double prox_decrease_rhs(double phi, double eta_bar, double t,
                                double norm_G) {
  return phi - eta_bar / t * (norm_G * norm_G);
}
inline double cubic_decrease_rhs(double phi, double eta, double step,
                                 double norm_d) {
  return phi - eta * (step * step) * (norm_d * norm_d * norm_d);
}
inline double quadratic_decrease_rhs(double phi, double eta, double step,
                                     double eps_h, double norm_d) {
  return phi - eta * (step * step) * eps_h * (norm_d * norm_d);
}

/// Oracle access that counts every callback and rejects non-finite output.
class CountedProblem {
 public:
  CountedProblem(const CompositeProblem& problem, OpCounters& counters)
      : problem_(problem), counters_(counters) {}

  const CompositeProblem& problem() const { return problem_; }
  double lambda() const { return problem_.lambda(); }
  Index dim() const { return problem_.dim(); }
  OpCounters& counters() { return counters_; }

  double phi(const Vector& x);
  Vector gradient(const Vector& x);
  SymmetricOperator hessian(const Vector& x);
  std::optional<Matrix> dense_hessian(const Vector& x);
  bool has_dense_hessian() const {
    return problem_.oracle().has_dense_hessian();
  }
  /// Soft-thresholding step prox_{a||.||_1}(z), counted as one prox.
  Vector prox(const Vector& z, double a);

 private:
  const CompositeProblem& problem_;
  OpCounters& counters_;
};

struct OracleCheckReport {
  bool ok = true;
  double max_gradient_error = 0.0;
  double max_hvp_error = 0.0;
  std::string failure;
};

/// Compares the gradient and Hessian-vector products against central
/// differences along 10 random unit directions.
OracleCheckReport check_oracle(const SmoothOracle& oracle, const Vector& x,
                               double h, std::uint64_t seed = 7);

bool all_finite(const Vector& v);

}  // namespace l1nc
