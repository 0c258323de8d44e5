#pragma once

// Hybrid proximal gradient / negative curvature method, its first-phase-only
// variant, and the step routines shared with the Newton-CG method.

#include "l1nc/capped_cg.hpp"
#include "l1nc/core.hpp"
#include "l1nc/meo.hpp"
#include "l1nc/stationarity.hpp"

#include <chrono>
#include <random>

namespace l1nc {

enum class SolveStatus {
  StrongStar2oPoint,
  Weak2oPoint,
  FirstOrderPoint,
  MaxIters,
  LineSearchStall
};

std::string_view to_string(SolveStatus s);

/// True for the statuses that carry a stationarity certificate.
bool is_certified(SolveStatus s);

struct SolveCertificate {
  double norm_g = 0.0;
  double norm_g_eps = 0.0;
  double norm_Gt = 0.0;
  double t = 1.0;
  std::optional<double> lambda_min;
  double sigma = 0.0;
  bool empty_support = false;
  bool exact_eigensolve = false;
};

struct NewtonCgStepRecord {
  std::int64_t iter = 0;
  DirectionType d_type = DirectionType::SOL;
  /// Full-length direction; left empty in solver reports.
  Vector d;
  double norm_d = 0.0;
  double norm_g = 0.0;
  double tau_k = 0.0;
  int j = 0;
  int cg_iterations = 0;
  /// tau_k ||g||^delta inside [2 eps_h, 2 tau_hat eps_h]; checked when ||g|| <= 1.
  bool tau_in_interval = true;
  bool tau_interval_checked = false;
  /// SOL: regularized curvature, length bound, residual bound.
  bool sol_curvature_ok = true;
  bool sol_norm_ok = true;
  bool sol_residual_ok = true;
  /// NC: descent sign and Rayleigh identity of the rescaled direction.
  bool nc_descent_ok = true;
  bool nc_rayleigh_ok = true;
  bool shrinkage_checked = false;
  bool shrinkage_ok = true;

  bool contracts_ok() const {
    return tau_in_interval && sol_curvature_ok && sol_norm_ok &&
           sol_residual_ok && nc_descent_ok && nc_rayleigh_ok && shrinkage_ok;
  }
};

struct SolveReport {
  Vector final_x;
  SolveStatus status = SolveStatus::MaxIters;
  SolveCertificate certificate;
  Trace trace;
  OpCounters counters;
  std::int64_t iterations = 0;
  /// x^0, x^1, ... when SolverConfig::record_iterates is set.
  std::vector<Vector> iterates;
  std::vector<NewtonCgStepRecord> newton_steps;
};

struct ProxStepResult {
  bool accepted = false;
  Vector x_next;
  double t = 1.0;
  int j = 0;
  double phi_next = 0.0;
  double norm_G = 0.0;
};

/// Backtracks t = beta^j from j = j_start until
/// phi(prox) < phi(x) - eta_bar / t * ||G_t(x)||^2.
ProxStepResult prox_grad_step(CountedProblem& cp, const Vector& x,
                              double phi_x, const Vector& grad,
                              const SolverConfig& cfg, int j_start = 0);

struct CurvatureStepResult {
  bool accepted = false;
  Vector x_next;
  /// Restricted direction d on J; ||d|| = |lambda_hat|.
  Vector d;
  double step = 1.0;
  int j = 0;
  double phi_next = 0.0;
  double norm_d = 0.0;
};

/// d_J = -sgn(g_J' S_J u) |lambda_hat| u with sgn(0) = 1, then backtracks
/// x + theta^j S d until phi < phi(x) - eta theta^{2j} ||d||^3.
CurvatureStepResult negative_curvature_step(CountedProblem& cp,
                                            const Vector& x, double phi_x,
                                            const Vector& g,
                                            const IndexList& J,
                                            const Vector& s, const Vector& u,
                                            double lambda_hat, double eta,
                                            double theta, int max_backtracks);

SolveReport hpgncm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg);

/// Proximal gradient loop alone; stops once G_t(x) vanishes to roundoff.
SolveReport fpgncm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg);

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

CurvatureOptions curvature_options(const SolverConfig& cfg);

}  // namespace detail

}  // namespace l1nc
