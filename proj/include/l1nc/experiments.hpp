#pragma once

// Desk-scale experiment drivers: the toy escape and rate runs, Student's t
// sweeps with per-trial parallelism, and eps-scaling studies on convex
// quadratics. Shared by the command-line runner, the acceptance binary and
// the Python module.

#include "l1nc/hpgncm.hpp"
#include "l1nc/pgn2cm.hpp"
#include "l1nc/problems.hpp"
#include "l1nc/trace_io.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace l1nc {

enum class SolverKind { Hpgncm, Pgn2cm, Fpgncm, Fpgn2cm };

std::string_view to_string(SolverKind s);
/// hpgncm | pgn2cm | fpgncm | fpgn2cm; anything else is a ConfigError.
SolverKind solver_from_string(std::string_view s);
std::string_view to_string(Fpgn2cmMode m);
Fpgn2cmMode fpgn2cm_mode_from_string(std::string_view s);

/// Configuration the solver actually runs with; fpgn2cm pins eps_h to
/// sqrt(eps_g).
SolverConfig effective_config(SolverKind s, const SolverConfig& cfg);

SolveReport run_solver(SolverKind s, const CompositeProblem& problem,
                       const Vector& x0, const SolverConfig& cfg,
                       Fpgn2cmMode mode = Fpgn2cmMode::Nonconvex);

/// Toy presets: eps_g = 1e-5, beta = 2, eta = 1e-4, theta = 0.25,
/// theta_sol = 0.7, zeta = 0.999, delta = 1. eta_bar = 1 for the hybrid
/// method and 0.7 elsewhere: with eta_bar = 1 the strict proximal decrease
/// test fails wherever f is locally convex.
SolverConfig toy_config(SolverKind s);
/// Student's t presets: eps_g = 1e-4, eps_h = 1e-2, beta = 2.75,
/// eta_bar = 0.7; theta = 0.25 for the hybrid method, theta_sol = 0.75 and
/// theta_nc = 0.3 for Newton-CG.
SolverConfig student_t_config(SolverKind s);

/// User overrides layered on top of a preset: a JSON object keyed by
/// SolverConfig field names, then the explicit flags.
struct ConfigOverrides {
  std::string json;
  std::optional<double> eps_g;
  std::optional<double> eps_h;
  std::optional<std::int64_t> max_iters;

  SolverConfig apply(SolverConfig preset) const;
};

/// Exact extreme eigenvalues on the exact-sign support of x, unscaled and
/// scaled; NaN when the support is empty.
struct RestrictedSpectrum {
  Index support = 0;
  double lambda_min_h = 0.0;
  double lambda_min_shs = 0.0;
};
RestrictedSpectrum restricted_spectrum(const CompositeProblem& problem,
                                       const Vector& x, double eps_g);

struct RunRecord {
  std::string name;
  SolverKind solver = SolverKind::Hpgncm;
  Fpgn2cmMode mode = Fpgn2cmMode::Nonconvex;
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  SolverConfig config;
  SolveReport report;
  double fval = 0.0;
  double wall_ms = 0.0;
  RestrictedSpectrum spectrum;
  TraceValidation validation;
};

/// Runs one solver, times it, computes the output spectrum and replays the
/// trace through the validator.
RunRecord execute(const std::string& name, SolverKind s,
                  const CompositeProblem& problem, const Vector& x0,
                  const SolverConfig& cfg,
                  Fpgn2cmMode mode = Fpgn2cmMode::Nonconvex);

/// Runs `count` independent tasks on up to `threads` workers (0 = hardware
/// concurrency). Task i writes only its own slot.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& task);

// ---- toy -----------------------------------------------------------------

struct RateSeries {
  std::string name;
  std::vector<double> norm_g, norm_Gt, norm_g_eps, err;
  /// ||x^{k+1} - xbar|| / ||x^k - xbar|| over pairs whose errors both exceed
  /// the floor.
  std::vector<double> ratios;
};

/// Errors and consecutive ratios of an iterate sequence against xbar.
void fill_rates(RateSeries& rs, const std::vector<Vector>& iterates,
                const Vector& xbar, double floor);

struct ToySpec {
  ConfigOverrides overrides;
  Fpgn2cmMode rate_mode = Fpgn2cmMode::Convex;
  /// hpgncm and pgn2cm run from (2,-2,0); fpgncm and fpgn2cm from the rate
  /// start.
  std::vector<SolverKind> solvers{SolverKind::Hpgncm, SolverKind::Pgn2cm,
                                  SolverKind::Fpgncm, SolverKind::Fpgn2cm};
};

struct ToyResult {
  std::vector<RunRecord> runs;
  Vector xbar;
  std::vector<RateSeries> rates;
};

/// Hybrid and Newton-CG solvers from (2,-2,0); both first-phase variants
/// from the rate start. xbar is the limit of a long first-phase Newton-CG
/// run from the rate start.
ToyResult run_toy(const ToySpec& spec);

// ---- Student's t -------------------------------------------------------------

struct StudentTSpec {
  Index n = 256;
  double d_db = 20.0;
  int trials = 5;
  std::uint64_t seed_base = 0;
  std::vector<SolverKind> solvers{SolverKind::Hpgncm, SolverKind::Pgn2cm};
  ConfigOverrides overrides;
  int threads = 0;
};

struct SummaryRow {
  std::string algorithm;
  Index n = 0;
  double d = 0.0;
  int trials = 0;
  int certified = 0;
  double iter = 0.0;
  double fval = 0.0;
  double time_s = 0.0;
  double norm_g = 0.0;
  double lambda_min_h = 0.0;
  double lambda_min_shs = 0.0;
  double hvp = 0.0;
  double grad = 0.0;
};

/// Means over the records; NaN spectra are skipped.
SummaryRow summarize(const std::string& algorithm, Index n, double d,
                     const std::vector<const RunRecord*>& runs);

struct StudentTResult {
  std::vector<StudentTInstance> instances;
  /// Ordered by trial, then by solver in the order requested.
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

/// Trial i uses instance seed seed_base + i and starts from x = 0.
StudentTResult run_student_t(const StudentTSpec& spec);

// ---- eps scaling ---------------------------------------------------------

/// Every solver runs the toy preset with eta_bar = 0.7 from x = 0; eps_h
/// follows sqrt(eps_g).
struct ScalingSpec {
  std::vector<double> eps_grid{3e-2, 1e-2, 3e-3, 1e-3, 3e-4,
                               1e-4, 3e-5, 1e-5, 3e-6};
  Index n = 30;
  /// Eigenvalues log-spaced in [1, condition].
  double condition = 100.0;
  double lambda = 0.3;
  /// Planted minimizer with this many nonzeros; 0 selects the random-center
  /// family instead.
  Index planted_support = 10;
  int instances = 3;
  std::uint64_t seed_base = 0;
  std::vector<SolverKind> solvers{SolverKind::Hpgncm, SolverKind::Pgn2cm};
  ConfigOverrides overrides;
  int threads = 0;
};

struct ScalingPoint {
  SolverKind solver = SolverKind::Hpgncm;
  double eps = 0.0;
  int instance = 0;
  std::int64_t iterations = 0;
  std::int64_t hvp = 0;
  std::int64_t grad = 0;
  SolveStatus status = SolveStatus::MaxIters;
  bool trace_ok = true;
};

struct SlopeFit {
  bool defined = false;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  /// 95% interval from the Student t quantile.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Least squares fit of log(y) against log(x); undefined with fewer than two
/// distinct x.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingResult {
  std::vector<ScalingPoint> points;
  /// One fit per solver (in the order requested) of mean iterations against eps.
  std::vector<std::pair<SolverKind, SlopeFit>> fits;
};

ScalingResult run_scaling(const ScalingSpec& spec);

// ---- artifacts -------------------------------------------------------------

/// Per-run trace CSV plus an effective config JSON next to it, so
/// validate-trace can rebuild the line-search tests exactly.
void write_run_artifacts(const std::string& dir, const RunRecord& run,
                         bool omit_timing);
std::string summary_row_json(const SummaryRow& row);
std::string run_record_json(const RunRecord& run);

void write_toy_artifacts(const std::string& dir, const ToyResult& r,
                         bool omit_timing);
void write_student_t_artifacts(const std::string& dir, const StudentTResult& r,
                               bool omit_timing);
void write_scaling_artifacts(const std::string& dir, const ScalingResult& r);

}  // namespace l1nc
