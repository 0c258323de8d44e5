#pragma once

#include "l1nc/hpgncm.hpp"

namespace l1nc::detail {

/// Per-run mutable state shared by the solver loops.
class RunContext {
 public:
  RunContext(const CompositeProblem& problem, const SolverConfig& cfg)
      : problem_(problem), cfg_(cfg), cp_(problem, report_.counters),
        rng_(cfg.rng_seed) {}
  RunContext(const RunContext&) = delete;
  RunContext& operator=(const RunContext&) = delete;

  CountedProblem& cp() { return cp_; }
  const SolverConfig& cfg() const { return cfg_; }
  const CompositeProblem& problem() const { return problem_; }
  std::mt19937_64& rng() { return rng_; }
  SolveReport& report() { return report_; }

  void push(IterationTrace row) {
    row.counters = report_.counters;
    row.wall_ms = clock_.ms();
    if (cfg_.record_trace) report_.trace.push_back(std::move(row));
  }

  void visit(const Vector& x) {
    if (cfg_.record_iterates) report_.iterates.push_back(x);
  }

  /// t (x - prox_{lambda/t}(x - grad/t)), counted as one prox.
  Vector gradient_map(const Vector& x, const Vector& grad, double t) {
    return t * (x - cp_.prox(x - grad / t, problem_.lambda() / t));
  }

  SolveReport finish(const Vector& x, SolveStatus status, std::int64_t iters) {
    report_.final_x = x;
    report_.status = status;
    report_.iterations = iters;
    return std::move(report_);
  }

 private:
  const CompositeProblem& problem_;
  const SolverConfig& cfg_;
  SolveReport report_;
  CountedProblem cp_;
  std::mt19937_64 rng_;
  Stopwatch clock_;
};

enum class SecondPhase { Certified, Stepped, Stall };

struct SecondPhaseResult {
  SecondPhase kind = SecondPhase::Certified;
  Vector x_next;
  double phi_next = 0.0;
};

/// Eigenvalue oracle on the scaled Hessian over the exact-sign support, then
/// either a certificate or a cubic-decrease curvature step. Fills the
/// second-phase fields of `row`.
SecondPhaseResult second_phase(RunContext& ctx, const Vector& x, double phi,
                               const Vector& g, IterationTrace& row);

struct PointData {
  Vector grad, g, g_eps;
};

/// Gradient and both residuals at x; resets `row` to the point fields.
PointData evaluate_point(RunContext& ctx, const Vector& x, IterationTrace& row,
                         std::int64_t k, double phi);

void require_start(const CompositeProblem& problem, const Vector& x0,
                   const SolverConfig& cfg);

void fill_certificate(SolveCertificate& c, const IterationTrace& row,
                      double t);

}  // namespace l1nc::detail
