#pragma once

// Proximal gradient / Newton-CG method with negative curvature, and its
// first-phase-only variant.

#include "l1nc/capped_cg.hpp"
#include "l1nc/core.hpp"
#include "l1nc/hpgncm.hpp"
#include "l1nc/stationarity.hpp"

namespace l1nc {

enum class Pgn2cmBranch { ProxG, NewtonCG, SecondPhase };

std::string_view to_string(Pgn2cmBranch b);

/// ProxG if the eps-zero block of g^eps is nonzero (relative to
/// zero_tol (1 + ||grad||)); NewtonCG if the eps-support block exceeds eps_g;
/// otherwise SecondPhase.
Pgn2cmBranch pgn2cm_phase_select(const Vector& x, const Vector& grad,
                                 double lambda, double eps_g,
                                 double zero_tol = 1e-14);
Pgn2cmBranch pgn2cm_phase_select(const CompositeProblem& problem,
                                 const Vector& x, double eps_g,
                                 double zero_tol = 1e-14);

/// Regularization and Capped CG parameters for one Newton-CG step.
struct NewtonCgParams {
  /// Curvature tolerance handed to Capped CG.
  double eps_cg = 0.0;
  /// Coefficient tau_bar of ||g||^delta in the shift.
  double tau_bar = 0.0;
  /// eps_h of the quadratic-decrease line search.
  double eps_ls = 0.0;
};

/// Default parameters: eps_cg = eps_h, tau_bar = 2 eps_h / min{1, ||g||^delta}.
NewtonCgParams newton_cg_params(const SolverConfig& cfg, double norm_g);

struct NewtonCgStepResult {
  bool accepted = false;
  Vector x_next;
  double phi_next = 0.0;
  NewtonCgStepRecord record;
};

/// One Newton-CG step on the eps-support with a quadratic-decrease line
/// search x + theta_sol^j d.
NewtonCgStepResult newton_cg_step(CountedProblem& cp, const Vector& x,
                                  double phi_x, const Vector& grad,
                                  const SolverConfig& cfg,
                                  const std::optional<NewtonCgParams>& params = {});

SolveReport pgn2cm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg);

enum class Fpgn2cmMode { Nonconvex, Convex };

/// First-phase loop: ProxG and Newton-CG branches only. Nonconvex mode uses
/// eps_h = sqrt(eps_g); convex mode shifts by tau_convex sqrt(eps_g) ||g||^delta
/// with curvature tolerance sqrt(eps_g) ||g||^delta.
SolveReport fpgn2cm_solve(const CompositeProblem& problem, const Vector& x0,
                          const SolverConfig& cfg,
                          Fpgn2cmMode mode = Fpgn2cmMode::Nonconvex);

}  // namespace l1nc
