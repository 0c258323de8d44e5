#include "l1nc/pgn2cm.hpp"

#include "solver_support.hpp"

#include <algorithm>
#include <cmath>

namespace l1nc {

std::string_view to_string(Pgn2cmBranch b) {
  switch (b) {
    case Pgn2cmBranch::ProxG: return "ProxG";
    case Pgn2cmBranch::NewtonCG: return "NewtonCG";
    case Pgn2cmBranch::SecondPhase: return "SecondPhase";
  }
  return "SecondPhase";
}

namespace {

struct BranchNorms {
  bool zero_nonempty = false, support_nonempty = false;
  double zero_block = 0.0, support_block = 0.0;
};

BranchNorms branch_norms(const Vector& x, const Vector& g_eps, double eps_g) {
  const double cut = std::sqrt(eps_g);
  BranchNorms b;
  double z2 = 0.0, s2 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > cut) {
      b.support_nonempty = true;
      s2 += g_eps(i) * g_eps(i);
    } else {
      b.zero_nonempty = true;
      z2 += g_eps(i) * g_eps(i);
    }
  }
  b.zero_block = std::sqrt(z2);
  b.support_block = std::sqrt(s2);
  return b;
}

bool zero_block_active(const BranchNorms& b, const Vector& grad,
                       double zero_tol) {
  return b.zero_nonempty && b.zero_block > zero_tol * (1.0 + grad.norm());
}

bool subset(const IndexList& a, const IndexList& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

Pgn2cmBranch pgn2cm_phase_select(const Vector& x, const Vector& grad,
                                 double lambda, double eps_g,
                                 double zero_tol) {
  const Vector ge = residual_g_eps(x, grad, lambda, eps_g);
  const BranchNorms b = branch_norms(x, ge, eps_g);
  if (zero_block_active(b, grad, zero_tol)) return Pgn2cmBranch::ProxG;
  if (b.support_nonempty && b.support_block > eps_g) return Pgn2cmBranch::NewtonCG;
  return Pgn2cmBranch::SecondPhase;
}

Pgn2cmBranch pgn2cm_phase_select(const CompositeProblem& problem,
                                 const Vector& x, double eps_g,
                                 double zero_tol) {
  return pgn2cm_phase_select(x, problem.oracle().gradient(x), problem.lambda(),
                             eps_g, zero_tol);
}

NewtonCgParams newton_cg_params(const SolverConfig& cfg, double norm_g) {
  const double eps_h = cfg.eps_h_value();
  NewtonCgParams p;
  p.eps_cg = eps_h;
  p.tau_bar = 2.0 * eps_h / std::min(1.0, std::pow(norm_g, cfg.delta));
  p.eps_ls = eps_h;
  return p;
}

NewtonCgStepResult newton_cg_step(CountedProblem& cp, const Vector& x,
                                  double phi_x, const Vector& grad,
                                  const SolverConfig& cfg,
                                  const std::optional<NewtonCgParams>& params) {
  const IndexPartition part = partition(x, cfg.eps_g, cfg.sign_threshold);
  const IndexList& J = part.ie_neq0;
  if (J.empty()) throw ContractViolation("Newton-CG step needs a nonempty eps-support");
  const Vector ge = residual_g_eps(x, grad, cp.lambda(), cfg.eps_g);
  const Vector gJ = gather(ge, J);
  const double ng = gJ.norm();
  if (!(ng > 0.0)) throw ContractViolation("Newton-CG step needs a nonzero residual");
  const NewtonCgParams p = params ? *params : newton_cg_params(cfg, ng);

  CappedCgOptions opts;
  opts.eps = p.eps_cg;
  opts.zeta = cfg.zeta;
  opts.delta = cfg.delta;
  opts.tau_bar = p.tau_bar;
  const CappedCgOutcome cg = capped_cg(restricted_operator(cp.hessian(x), J), gJ, opts);

  NewtonCgStepResult res;
  NewtonCgStepRecord& rec = res.record;
  rec.d_type = cg.type;
  rec.tau_k = p.tau_bar;
  rec.norm_g = ng;
  rec.cg_iterations = cg.iterations;

  const double shift = cg.shift;
  if (!params && ng <= 1.0) {
    const double eps_h = cfg.eps_h_value();
    const double slack = 1e-12 * eps_h;
    rec.tau_interval_checked = true;
    rec.tau_in_interval = shift >= 2.0 * eps_h - slack &&
                          shift <= 2.0 * cfg.tau_hat * eps_h + slack;
  }

  Vector dJ;
  if (cg.type == DirectionType::SOL) {
    dJ = cg.d;
    const double dd = dJ.squaredNorm();
    rec.sol_curvature_ok = dJ.dot(cg.Hd + shift * dJ) >= p.eps_cg * dd;
    rec.sol_norm_ok = std::sqrt(dd) <= 1.1 * ng / p.eps_cg;
    rec.sol_residual_ok =
        cg.residual.norm() <= 0.5 * p.eps_cg * cfg.zeta * std::sqrt(dd);
  } else {
    const double nd = cg.d.norm();
    const double dHd = cg.d.dot(cg.Hd);
    const double sgn = cg.d.dot(gJ) < 0.0 ? -1.0 : 1.0;
    dJ = -sgn * (std::abs(dHd) / (nd * nd)) * (cg.d / nd);
    const double rayleigh = dHd / (nd * nd);
    rec.nc_descent_ok = dJ.dot(gJ) <= 0.0;
    rec.nc_rayleigh_ok =
        std::abs(rayleigh + dJ.norm()) <= 1e-10 * (1.0 + std::abs(rayleigh)) &&
        rayleigh < p.eps_cg - shift;
  }
  rec.norm_d = dJ.norm();

  const Vector D = scatter(dJ, J, x.size());
  for (int j = 0; j <= cfg.ls_max_backtracks; ++j) {
    const double step = std::pow(cfg.theta_sol, j);
    Vector xt = x + step * D;
    const double phi_t = cp.phi(xt);
    rec.j = j;
    res.phi_next = phi_t;
    if (phi_t < quadratic_decrease_rhs(phi_x, cfg.eta_sol, step, p.eps_ls, rec.norm_d)) {
      res.accepted = true;
      res.x_next = std::move(xt);
      break;
    }
  }

  if (res.accepted && cg.type == DirectionType::SOL && rec.j == 0) {
    bool signs_kept = true;
    for (Index i : part.ie_plus) signs_kept = signs_kept && res.x_next(i) > 0.0;
    for (Index i : part.ie_minus) signs_kept = signs_kept && res.x_next(i) < 0.0;
    if (signs_kept) {
      const IndexPartition next = partition(res.x_next, cfg.eps_g, cfg.sign_threshold);
      rec.shrinkage_checked = true;
      rec.shrinkage_ok = subset(next.ie_plus, part.ie_plus) &&
                         subset(next.ie_minus, part.ie_minus);
    }
  }
  rec.d = D;
  return res;
}

namespace {

enum class LoopKind { Full, FirstPhaseNonconvex, FirstPhaseConvex };

SolveReport pgn2cm_loop(const CompositeProblem& problem, const Vector& x0,
                        const SolverConfig& cfg, LoopKind kind) {
  detail::require_start(problem, x0, cfg);
  detail::RunContext ctx(problem, cfg);
  Vector x = x0;
  double phi = ctx.cp().phi(x);
  double t_prev = 1.0;
  int j_prev = 0;
  const double root_eps = std::sqrt(cfg.eps_g);

  for (std::int64_t k = 0;; ++k) {
    IterationTrace row;
    const detail::PointData pd = detail::evaluate_point(ctx, x, row, k, phi);
    row.norm_Gt = ctx.gradient_map(x, pd.grad, t_prev).norm();
    ctx.visit(x);

    auto stop = [&](SolveStatus status) {
      row.step_kind = StepKind::Terminated;
      detail::fill_certificate(ctx.report().certificate, row, t_prev);
      ctx.push(row);
      return ctx.finish(x, status, k);
    };
    // a stalled first-phase-only run still counts as converged when the
    // relaxed residual is already small
    auto stall = [&]() {
      if (kind != LoopKind::Full && row.norm_g_eps <= cfg.eps_g)
        return stop(SolveStatus::FirstOrderPoint);
      return stop(SolveStatus::LineSearchStall);
    };
    if (k >= cfg.max_iters) return stop(SolveStatus::MaxIters);

    const BranchNorms b = branch_norms(x, pd.g_eps, cfg.eps_g);
    const double newton_gate =
        kind == LoopKind::Full ? cfg.eps_g
                               : cfg.zero_tol * (1.0 + pd.grad.norm());

    if (zero_block_active(b, pd.grad, cfg.zero_tol)) {
      ProxStepResult ps = prox_grad_step(ctx.cp(), x, phi, pd.grad, cfg,
                                         cfg.prox_warm_start ? j_prev : 0);
      if (!ps.accepted) return stall();
      row.phase = Phase::First;
      row.step_kind = StepKind::ProxG;
      row.step_size = ps.t;
      row.ls_j = ps.j;
      row.norm_Gt = ps.norm_G;
      ctx.push(row);
      t_prev = ps.t;
      j_prev = ps.j;
      x = std::move(ps.x_next);
      phi = ps.phi_next;
      continue;
    }

    if (b.support_nonempty && b.support_block > newton_gate) {
      std::optional<NewtonCgParams> params;
      if (kind == LoopKind::FirstPhaseConvex) {
        NewtonCgParams p;
        p.eps_cg = root_eps * std::pow(b.support_block, cfg.delta);
        p.tau_bar = cfg.tau_convex * root_eps;
        p.eps_ls = cfg.eps_h_value();
        params = p;
      }
      NewtonCgStepResult ns = newton_cg_step(ctx.cp(), x, phi, pd.grad, cfg, params);
      ns.record.iter = k;
      row.phase = Phase::First;
      row.step_kind = ns.record.d_type == DirectionType::SOL
                          ? StepKind::NewtonCgSol
                          : StepKind::NewtonCgNc;
      row.step_size = std::pow(cfg.theta_sol, ns.record.j);
      row.ls_j = ns.record.j;
      row.norm_d = ns.record.norm_d;
      ns.record.d = Vector();
      ctx.report().newton_steps.push_back(ns.record);
      if (!ns.accepted) return stall();
      ctx.push(row);
      x = std::move(ns.x_next);
      phi = ns.phi_next;
      continue;
    }

    if (kind != LoopKind::Full) return stop(SolveStatus::FirstOrderPoint);

    detail::SecondPhaseResult sp = detail::second_phase(ctx, x, phi, pd.g, row);
    if (sp.kind == detail::SecondPhase::Certified)
      return stop(SolveStatus::Weak2oPoint);
    if (sp.kind == detail::SecondPhase::Stall)
      return stop(SolveStatus::LineSearchStall);
    ctx.push(row);
    x = std::move(sp.x_next);
    phi = sp.phi_next;
  }
}

}  // namespace

SolveReport pgn2cm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg) {
  if (!(cfg.eta_sol < (1.0 - cfg.zeta) / 2.0))
    throw ConfigError("invalid solver config: eta_sol must lie in (0,(1-zeta)/2)");
  return pgn2cm_loop(problem, x0, cfg, LoopKind::Full);
}

SolveReport fpgn2cm_solve(const CompositeProblem& problem, const Vector& x0,
                          const SolverConfig& cfg, Fpgn2cmMode mode) {
  if (!(cfg.eta_sol < (1.0 - cfg.zeta) / 2.0))
    throw ConfigError("invalid solver config: eta_sol must lie in (0,(1-zeta)/2)");
  SolverConfig local = cfg;
  local.eps_h = std::sqrt(cfg.eps_g);
  return pgn2cm_loop(problem, x0, local,
                     mode == Fpgn2cmMode::Convex ? LoopKind::FirstPhaseConvex
                                                 : LoopKind::FirstPhaseNonconvex);
}

}  // namespace l1nc
