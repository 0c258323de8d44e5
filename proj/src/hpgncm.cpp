#include "l1nc/hpgncm.hpp"

#include "solver_support.hpp"

#include <cmath>

namespace l1nc {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::StrongStar2oPoint: return "StrongStar2oPoint";
    case SolveStatus::Weak2oPoint: return "Weak2oPoint";
    case SolveStatus::FirstOrderPoint: return "FirstOrderPoint";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchStall: return "LineSearchStall";
  }
  return "MaxIters";
}

bool is_certified(SolveStatus s) {
  return s == SolveStatus::StrongStar2oPoint || s == SolveStatus::Weak2oPoint ||
         s == SolveStatus::FirstOrderPoint;
}

ProxStepResult prox_grad_step(CountedProblem& cp, const Vector& x,
                              double phi_x, const Vector& grad,
                              const SolverConfig& cfg, int j_start) {
  ProxStepResult res;
  const double lambda = cp.lambda();
  for (int j = std::max(j_start, 0); j <= cfg.ls_max_backtracks; ++j) {
    const double t = std::pow(cfg.beta, j);
    Vector xp = cp.prox(x - grad / t, lambda / t);
    const double nG = (t * (x - xp)).norm();
    const double phi_p = cp.phi(xp);
    res.j = j;
    res.t = t;
    res.norm_G = nG;
    res.phi_next = phi_p;
    if (phi_p < prox_decrease_rhs(phi_x, cfg.eta_bar, t, nG)) {
      res.accepted = true;
      res.x_next = std::move(xp);
      return res;
    }
  }
  return res;
}

CurvatureStepResult negative_curvature_step(CountedProblem& cp,
                                            const Vector& x, double phi_x,
                                            const Vector& g,
                                            const IndexList& J,
                                            const Vector& s, const Vector& u,
                                            double lambda_hat, double eta,
                                            double theta, int max_backtracks) {
  if (J.empty() || static_cast<Index>(J.size()) != u.size())
    throw ContractViolation("curvature direction does not match the support");
  const Vector sJ = gather(s, J);
  const double a = gather(g, J).dot(sJ.cwiseProduct(u));
  const double sign = a < 0.0 ? -1.0 : 1.0;

  CurvatureStepResult res;
  res.d = -sign * std::abs(lambda_hat) * u;
  res.norm_d = res.d.norm();
  const Vector Sd = scatter(sJ.cwiseProduct(res.d), J, x.size());
  for (int j = 0; j <= max_backtracks; ++j) {
    const double step = std::pow(theta, j);
    Vector xt = x + step * Sd;
    const double phi_t = cp.phi(xt);
    res.j = j;
    res.step = step;
    res.phi_next = phi_t;
    if (phi_t < cubic_decrease_rhs(phi_x, eta, step, res.norm_d)) {
      res.accepted = true;
      res.x_next = std::move(xt);
      return res;
    }
  }
  return res;
}

namespace detail {

CurvatureOptions curvature_options(const SolverConfig& cfg) {
  CurvatureOptions o;
  o.sigma = cfg.sigma;
  o.power_iters = cfg.meo_power_iters;
  o.dense_max_dim = cfg.meo_dense_max_dim;
  return o;
}

SecondPhaseResult second_phase(RunContext& ctx, const Vector& x, double phi,
                               const Vector& g, IterationTrace& row) {
  const SolverConfig& cfg = ctx.cfg();
  const double eps_h = cfg.eps_h_value();
  SecondPhaseResult res;
  row.phase = Phase::Second;

  const IndexPartition part = partition(x, cfg.eps_g, cfg.sign_threshold);
  if (part.i_neq0.empty()) {
    ctx.report().certificate.empty_support = true;
    res.kind = SecondPhase::Certified;
    return res;
  }
  const Vector s = scaling(x, cfg.eps_g);
  const MeoOutcome o = scaled_curvature_oracle(
      ctx.cp(), x, part.i_neq0, s, eps_h, curvature_options(cfg), ctx.rng());
  row.lambda_min = o.lambda_hat;
  ctx.report().certificate.sigma = o.sigma;
  ctx.report().certificate.exact_eigensolve = o.exact;
  if (o.kind == MeoKind::Certificate) {
    res.kind = SecondPhase::Certified;
    return res;
  }

  CurvatureStepResult step = negative_curvature_step(
      ctx.cp(), x, phi, g, part.i_neq0, s, o.v, o.lambda_hat, cfg.eta_nc,
      cfg.theta_nc, cfg.ls_max_backtracks);
  row.norm_d = step.norm_d;
  row.ls_j = step.j;
  row.step_size = step.step;
  if (!step.accepted) {
    res.kind = SecondPhase::Stall;
    return res;
  }
  row.step_kind = StepKind::MeoNc;
  res.kind = SecondPhase::Stepped;
  res.x_next = std::move(step.x_next);
  res.phi_next = step.phi_next;
  return res;
}

void fill_certificate(SolveCertificate& c, const IterationTrace& row,
                      double t) {
  c.norm_g = row.norm_g;
  c.norm_g_eps = row.norm_g_eps;
  c.norm_Gt = row.norm_Gt;
  c.t = t;
  c.lambda_min = row.lambda_min;
}

PointData evaluate_point(RunContext& ctx, const Vector& x,
                         IterationTrace& row, std::int64_t k, double phi) {
  const SolverConfig& cfg = ctx.cfg();
  const double lambda = ctx.problem().lambda();
  PointData pd;
  pd.grad = ctx.cp().gradient(x);
  pd.g = residual_g(x, pd.grad, lambda, cfg.sign_threshold);
  pd.g_eps = residual_g_eps(x, pd.grad, lambda, cfg.eps_g);
  row = IterationTrace{};
  row.iter = k;
  row.fval = phi;
  row.norm_g = pd.g.norm();
  row.norm_g_eps = pd.g_eps.norm();
  return pd;
}

void require_start(const CompositeProblem& problem, const Vector& x0,
                   const SolverConfig& cfg) {
  cfg.validate();
  if (x0.size() != problem.dim())
    throw ContractViolation("starting point has the wrong dimension");
  if (!x0.allFinite()) throw ContractViolation("starting point must be finite");
}

}  // namespace detail

SolveReport hpgncm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg) {
  detail::require_start(problem, x0, cfg);
  detail::RunContext ctx(problem, cfg);
  Vector x = x0;
  double phi = ctx.cp().phi(x);
  double t_check = 1.0;
  int j_prev = 0;

  for (std::int64_t k = 0;; ++k) {
    IterationTrace row;
    const detail::PointData pd = detail::evaluate_point(ctx, x, row, k, phi);
    row.norm_Gt = ctx.gradient_map(x, pd.grad, t_check).norm();
    ctx.visit(x);

    if (k >= cfg.max_iters) {
      detail::fill_certificate(ctx.report().certificate, row, t_check);
      ctx.push(row);
      return ctx.finish(x, SolveStatus::MaxIters, k);
    }

    if (row.norm_Gt > cfg.eps_g) {
      ProxStepResult ps = prox_grad_step(ctx.cp(), x, phi, pd.grad, cfg,
                                         cfg.prox_warm_start ? j_prev : 0);
      if (!ps.accepted) {
        detail::fill_certificate(ctx.report().certificate, row, t_check);
        ctx.push(row);
        return ctx.finish(x, SolveStatus::LineSearchStall, k);
      }
      row.phase = Phase::First;
      row.step_kind = StepKind::ProxG;
      row.step_size = ps.t;
      row.ls_j = ps.j;
      row.norm_Gt = ps.norm_G;
      ctx.push(row);
      t_check = ps.t;
      j_prev = ps.j;
      x = std::move(ps.x_next);
      phi = ps.phi_next;
      continue;
    }

    detail::SecondPhaseResult sp = detail::second_phase(ctx, x, phi, pd.g, row);
    if (sp.kind != detail::SecondPhase::Stepped) {
      row.step_kind = StepKind::Terminated;
      detail::fill_certificate(ctx.report().certificate, row, t_check);
      ctx.push(row);
      return ctx.finish(x,
                        sp.kind == detail::SecondPhase::Certified
                            ? SolveStatus::StrongStar2oPoint
                            : SolveStatus::LineSearchStall,
                        k);
    }
    ctx.push(row);
    x = std::move(sp.x_next);
    phi = sp.phi_next;
  }
}

SolveReport fpgncm_solve(const CompositeProblem& problem, const Vector& x0,
                         const SolverConfig& cfg) {
  detail::require_start(problem, x0, cfg);
  detail::RunContext ctx(problem, cfg);
  Vector x = x0;
  double phi = ctx.cp().phi(x);
  double t_check = 1.0;
  int j_prev = 0;

  for (std::int64_t k = 0;; ++k) {
    IterationTrace row;
    const detail::PointData pd = detail::evaluate_point(ctx, x, row, k, phi);
    row.norm_Gt = ctx.gradient_map(x, pd.grad, t_check).norm();
    ctx.visit(x);

    auto stop = [&](SolveStatus status) {
      detail::fill_certificate(ctx.report().certificate, row, t_check);
      ctx.push(row);
      return ctx.finish(x, status, k);
    };
    if (k >= cfg.max_iters) return stop(SolveStatus::MaxIters);
    if (row.norm_Gt <= cfg.zero_tol * (1.0 + pd.grad.norm()))
      return stop(SolveStatus::FirstOrderPoint);

    ProxStepResult ps = prox_grad_step(ctx.cp(), x, phi, pd.grad, cfg,
                                       cfg.prox_warm_start ? j_prev : 0);
    if (!ps.accepted) {
      // decrease below roundoff: a first-order point if the residual is small
      return stop(row.norm_Gt <= cfg.eps_g ? SolveStatus::FirstOrderPoint
                                           : SolveStatus::LineSearchStall);
    }
    row.phase = Phase::First;
    row.step_kind = StepKind::ProxG;
    row.step_size = ps.t;
    row.ls_j = ps.j;
    row.norm_Gt = ps.norm_G;
    ctx.push(row);
    t_check = ps.t;
    j_prev = ps.j;
    x = std::move(ps.x_next);
    phi = ps.phi_next;
  }
}

}  // namespace l1nc
