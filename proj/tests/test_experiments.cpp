#include "l1nc/experiments.hpp"
#include "l1nc/trace_io.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

using namespace l1nc;

namespace {

Vector toy_start() {
  Vector x(3);
  x << 2.0, -2.0, 0.0;
  return x;
}

}  // namespace

TEST(Strings, SolverAndModeRoundTrip) {
  for (SolverKind s : {SolverKind::Hpgncm, SolverKind::Pgn2cm, SolverKind::Fpgncm,
                       SolverKind::Fpgn2cm})
    EXPECT_EQ(solver_from_string(to_string(s)), s);
  for (Fpgn2cmMode m : {Fpgn2cmMode::Nonconvex, Fpgn2cmMode::Convex})
    EXPECT_EQ(fpgn2cm_mode_from_string(to_string(m)), m);
  EXPECT_THROW(solver_from_string("ista"), ConfigError);
}

TEST(Presets, ValidAndAsDocumented) {
  for (SolverKind s : {SolverKind::Hpgncm, SolverKind::Pgn2cm, SolverKind::Fpgncm,
                       SolverKind::Fpgn2cm}) {
    EXPECT_NO_THROW(toy_config(s).validate());
    EXPECT_NO_THROW(student_t_config(s).validate());
  }
  const SolverConfig h = toy_config(SolverKind::Hpgncm);
  EXPECT_EQ(h.beta, 2.0);
  EXPECT_EQ(h.eta_bar, 1.0);
  EXPECT_EQ(h.eta_nc, 1e-4);
  EXPECT_EQ(h.theta_nc, 0.25);
  const SolverConfig p = toy_config(SolverKind::Pgn2cm);
  EXPECT_EQ(p.theta_sol, 0.7);
  EXPECT_EQ(p.zeta, 0.999);
  EXPECT_EQ(p.delta, 1.0);
  const SolverConfig st = student_t_config(SolverKind::Pgn2cm);
  EXPECT_EQ(st.eps_g, 1e-4);
  EXPECT_EQ(st.eps_h_value(), 1e-2);
  EXPECT_EQ(st.beta, 2.75);
  EXPECT_EQ(st.theta_sol, 0.75);
  EXPECT_EQ(st.theta_nc, 0.3);
  EXPECT_EQ(student_t_config(SolverKind::Hpgncm).theta_nc, 0.25);
  EXPECT_NEAR(effective_config(SolverKind::Fpgn2cm, toy_config(SolverKind::Fpgn2cm)).eps_h_value(),
              std::sqrt(1e-5), 1e-18);
}

TEST(Config, JsonRoundTripAndOverrides) {
  SolverConfig c = student_t_config(SolverKind::Pgn2cm);
  c.rng_seed = 1234567890123ULL;
  const SolverConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.rng_seed, c.rng_seed);
  EXPECT_THROW(config_from_json(R"({"no_such_field": 1})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"beta": "two"})"), ConfigError);

  ConfigOverrides o;
  o.json = R"({"beta": 3.0, "eps_g": 0.01})";
  o.eps_g = 1e-3;
  o.max_iters = 7;
  const SolverConfig applied = o.apply(toy_config(SolverKind::Hpgncm));
  EXPECT_EQ(applied.beta, 3.0);
  EXPECT_EQ(applied.eps_g, 1e-3);
  EXPECT_EQ(applied.max_iters, 7);
  ConfigOverrides bad;
  bad.eps_g = 2.0;
  EXPECT_THROW(bad.apply(toy_config(SolverKind::Hpgncm)), ConfigError);
}

TEST(TraceCsv, RoundTripIsExact) {
  const RunRecord r = execute("t", SolverKind::Pgn2cm, make_toy_problem(), toy_start(),
                              toy_config(SolverKind::Pgn2cm));
  std::stringstream ss;
  write_trace_csv(ss, r.report.trace);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), trace_csv_header());
  const Trace back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), r.report.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].fval, r.report.trace[i].fval);
    EXPECT_EQ(back[i].step_size, r.report.trace[i].step_size);
    EXPECT_EQ(back[i].norm_d, r.report.trace[i].norm_d);
    EXPECT_EQ(back[i].step_kind, r.report.trace[i].step_kind);
    EXPECT_EQ(back[i].lambda_min.has_value(), r.report.trace[i].lambda_min.has_value());
  }
  EXPECT_TRUE(validate_trace(back, r.config).ok);
}

TEST(TraceCsv, OmitTimingIsByteReproducible) {
  auto render = [] {
    const RunRecord r = execute("t", SolverKind::Hpgncm, make_toy_problem(), toy_start(),
                                toy_config(SolverKind::Hpgncm));
    std::stringstream ss;
    write_trace_csv(ss, r.report.trace, true);
    return ss.str();
  };
  EXPECT_EQ(render(), render());
}

TEST(Validator, AcceptsGenuineRunsAndRejectsTampering) {
  const RunRecord r = execute("t", SolverKind::Hpgncm, make_toy_problem(), toy_start(),
                              toy_config(SolverKind::Hpgncm));
  ASSERT_TRUE(r.validation.ok);
  ASSERT_GE(r.report.trace.size(), 2u);
  EXPECT_EQ(r.validation.checked_steps, static_cast<std::int64_t>(r.report.trace.size()) - 1);

  Trace t = r.report.trace;
  t[1].fval = t[0].fval;
  EXPECT_FALSE(validate_trace(t, r.config).ok);

  t = r.report.trace;
  t[0].norm_d *= 1e6;
  t[0].norm_Gt *= 1e6;
  EXPECT_FALSE(validate_trace(t, r.config).ok);

  t = r.report.trace;
  t[0].ls_j += 1;
  EXPECT_FALSE(validate_trace(t, r.config).ok);

  t = r.report.trace;
  t.pop_back();
  EXPECT_FALSE(validate_trace(t, r.config).ok);

  t = r.report.trace;
  t.back().iter += 1;
  EXPECT_FALSE(validate_trace(t, r.config).ok);
}

TEST(FitLoglog, ExactPowerLaw) {
  std::vector<double> x, y;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
    x.push_back(e);
    y.push_back(5.0 * std::pow(e, -1.5));
  }
  const SlopeFit f = fit_loglog(x, y);
  ASSERT_TRUE(f.defined);
  EXPECT_EQ(f.points, 4);
  EXPECT_NEAR(f.slope, -1.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 5.0, 1e-10);
  EXPECT_NEAR(f.ci_low, -1.5, 1e-10);
  EXPECT_NEAR(f.ci_high, -1.5, 1e-10);
}

TEST(FitLoglog, NoisyIntervalCoversSlope) {
  const std::vector<double> x{1, 2, 4, 8, 16};
  const std::vector<double> y{1.0, 2.2, 3.7, 8.5, 15.0};
  const SlopeFit f = fit_loglog(x, y);
  ASSERT_TRUE(f.defined);
  EXPECT_LT(f.ci_low, f.slope);
  EXPECT_GT(f.ci_high, f.slope);
  EXPECT_GT(f.std_error, 0.0);
}

TEST(FitLoglog, DegenerateInputs) {
  EXPECT_FALSE(fit_loglog({1e-3}, {10.0}).defined);
  EXPECT_FALSE(fit_loglog({1e-3, 1e-3}, {10.0, 12.0}).defined);
  const SlopeFit two = fit_loglog({1e-2, 1e-3}, {10.0, 100.0});
  ASSERT_TRUE(two.defined);
  EXPECT_NEAR(two.slope, -1.0, 1e-12);
  EXPECT_TRUE(std::isnan(two.ci_low));
}

TEST(Summaries, MeansSkipMissingSpectra) {
  RunRecord a, b;
  a.report.iterations = 10;
  b.report.iterations = 20;
  a.fval = 1.0;
  b.fval = 3.0;
  a.wall_ms = 1000.0;
  b.wall_ms = 3000.0;
  a.report.status = SolveStatus::Weak2oPoint;
  b.report.status = SolveStatus::MaxIters;
  a.spectrum.lambda_min_h = 2.0;
  b.spectrum.lambda_min_h = std::nan("");
  a.spectrum.lambda_min_shs = -1.0;
  b.spectrum.lambda_min_shs = std::nan("");
  const SummaryRow s = summarize("PGN2CM", 256, 20.0, {&a, &b});
  EXPECT_EQ(s.trials, 2);
  EXPECT_EQ(s.certified, 1);
  EXPECT_DOUBLE_EQ(s.iter, 15.0);
  EXPECT_DOUBLE_EQ(s.fval, 2.0);
  EXPECT_DOUBLE_EQ(s.time_s, 2.0);
  EXPECT_DOUBLE_EQ(s.lambda_min_h, 2.0);
  EXPECT_DOUBLE_EQ(s.lambda_min_shs, -1.0);
}

TEST(ParallelFor, RunsEveryTaskOnceAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(200);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw EvaluationError("boom");
                            }),
               EvaluationError);
}

TEST(RestrictedSpectrum, ToyPoints) {
  const CompositeProblem toy = make_toy_problem();
  const RestrictedSpectrum s0 = restricted_spectrum(toy, toy_start(), 1e-5);
  EXPECT_EQ(s0.support, 2);
  EXPECT_NEAR(s0.lambda_min_h, -4.0, 1e-12);
  EXPECT_NEAR(s0.lambda_min_shs, -4.0, 1e-12);
  const RestrictedSpectrum empty = restricted_spectrum(toy, Vector::Zero(3), 1e-5);
  EXPECT_EQ(empty.support, 0);
  EXPECT_TRUE(std::isnan(empty.lambda_min_h));
}

TEST(StudentTDriver, ParallelMatchesSerial) {
  StudentTSpec spec;
  spec.trials = 2;
  spec.seed_base = 3;
  spec.overrides.max_iters = 300;
  spec.threads = 1;
  const StudentTResult a = run_student_t(spec);
  spec.threads = 2;
  const StudentTResult b = run_student_t(spec);
  ASSERT_EQ(a.runs.size(), 4u);
  ASSERT_EQ(b.runs.size(), 4u);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].name, b.runs[i].name);
    EXPECT_EQ(a.runs[i].report.final_x, b.runs[i].report.final_x);
    EXPECT_TRUE(a.runs[i].validation.ok);
  }
  EXPECT_EQ(a.runs[0].name, "hpgncm_n256_d20_trial0");
  EXPECT_EQ(a.runs[1].name, "pgn2cm_n256_d20_trial0");
}

TEST(ScalingDriver, RejectsBadGrid) {
  ScalingSpec spec;
  spec.eps_grid = {0.5};
  EXPECT_THROW(run_scaling(spec), ConfigError);
}
