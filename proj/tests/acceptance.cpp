// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion is timed against its runtime budget.

#include "l1nc/capped_cg.hpp"
#include "l1nc/experiments.hpp"
#include "l1nc/meo.hpp"
#include "l1nc/problems.hpp"
#include "l1nc/stationarity.hpp"
#include "l1nc/trace_io.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace l1nc;
namespace lt = l1nc::testing;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id = 0;
  std::string name;
  double budget_s = 0.0;
  Outcome outcome;
  double seconds = 0.0;
  bool pass() const { return outcome.ok && seconds <= budget_s; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Criterion timed(int id, std::string name, double budget, const std::function<Outcome()>& body) {
  Criterion c;
  c.id = id;
  c.name = std::move(name);
  c.budget_s = budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.outcome = body();
  } catch (const std::exception& e) {
    c.outcome = {false, std::string("exception: ") + e.what()};
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "[criterion %d done in %.2f s]\n", id, c.seconds);
  return c;
}

std::uint64_t seed_base() {
  if (const char* env = std::getenv("L1C_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

Vector toy_x0() {
  Vector x(3);
  x << 2.0, -2.0, 0.0;
  return x;
}

// ---- 1 ----------------------------------------------------------------------
Outcome residual_relations() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_lower = -1e300, worst_identity = 0.0;
  int identity_checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = dim(rng);
    const Matrix A = lt::with_spectrum(lt::random_vector(n, rng, 3.0), rng);
    const double lambda = 0.05 + U(rng);
    const CompositeProblem p(std::make_shared<lt::DenseQuadratic>(A, lt::random_vector(n, rng)),
                             lambda);
    Vector x = lt::random_vector(n, rng, 2.0);
    for (Index i = 0; i < n; ++i)
      if (U(rng) < 0.3) x(i) = 0.0;
    const double t = std::pow(10.0, -4.0 + 8.0 * U(rng));
    const Vector g = residual_g(p, x);
    worst_lower = std::max(worst_lower, gradient_mapping(p, x, t).norm() - g.norm());
    const double th = t_hat(p, x);
    const double t_id = std::max(th * (1.0 + 1e-9) * (1.0 + 10.0 * U(rng)), 1e-300);
    if (t_id >= th * (1.0 + 1e-9)) {
      ++identity_checks;
      worst_identity = std::max(worst_identity,
                                (gradient_mapping(p, x, t_id) - g).norm() / (1.0 + g.norm()));
    }
  }
  const bool ok = worst_lower <= 1e-10 && worst_identity <= 1e-10 && identity_checks == 1000;
  return {ok, "max(||G_t||-||g||) = " + fmt("%.3e", worst_lower) +
                  ", max identity gap = " + fmt("%.3e", worst_identity)};
}

// ---- 2 ----------------------------------------------------------------------
Outcome closed_form_mapping() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  std::set<std::pair<int, int>> seen;
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Index n = 8;
    Vector x(n), grad(n);
    for (Index i = 0; i < n; ++i) {
      x(i) = (trial + i) % 4 == 0 ? 0.0 : U(rng);
      grad(i) = U(rng);
    }
    const double lambda = std::abs(U(rng)) + 0.01;
    const double t = std::exp(U(rng));
    std::vector<int> branch;
    const Vector ref = lt::closed_form_gradient_mapping(x, grad, lambda, t, &branch);
    const Vector got = gradient_mapping(x, grad, lambda, t);
    for (Index i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(got(i) - ref(i)) / std::max(1.0, std::abs(ref(i))));
      seen.insert({x(i) > 0 ? 0 : (x(i) < 0 ? 2 : 1), branch[static_cast<std::size_t>(i)]});
    }
  }
  return {worst <= 1e-12 && seen.size() == 9,
          "max deviation " + fmt("%.3e", worst) + ", sign x branch combinations seen " +
              std::to_string(seen.size()) + "/9"};
}

// ---- 3 ----------------------------------------------------------------------
Outcome capped_cg_contracts() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int sol = 0, nc = 0, psd = 0, violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index m = dim(rng);
    CappedCgOptions o;
    o.eps = std::pow(10.0, -3.0 + 2.5 * U(rng));
    o.zeta = 0.1 + 0.8 * U(rng);
    o.delta = U(rng);
    o.tau_bar = trial % 3 == 0 ? 0.0 : 2.0 * U(rng);
    Vector eig(m);
    for (Index i = 0; i < m; ++i) {
      switch (trial % 3) {
        case 0: eig(i) = 0.01 + 10.0 * U(rng); break;
        case 1: eig(i) = -2.0 + 12.0 * U(rng); break;
        default: eig(i) = o.eps + std::pow(10.0, 3.0 * U(rng) - 1.0);
      }
    }
    const Matrix H = lt::with_spectrum(eig, rng);
    const Vector g = lt::random_vector(m, rng, std::pow(10.0, 2.0 * U(rng) - 1.0));
    const CappedCgOutcome out = capped_cg(SymmetricOperator::from_matrix(H), g, o);
    const double shift = o.tau_bar * std::pow(g.norm(), o.delta);
    const Matrix Hbar = H + shift * Matrix::Identity(m, m);
    const Vector& d = out.d;
    bool good;
    if (out.type == DirectionType::SOL) {
      ++sol;
      const Vector r = Hbar * d + g;
      good = d.dot(Hbar * d) >= o.eps * d.squaredNorm() && d.norm() <= 1.1 / o.eps * g.norm() &&
             r.norm() <= 0.5 * o.eps * o.zeta * d.norm();
    } else {
      ++nc;
      good = d.dot(Hbar * d) < o.eps * d.squaredNorm();
    }
    if (lt::dense_lambda_min(Hbar) >= o.eps) {
      ++psd;
      good = good && out.type == DirectionType::SOL;
    }
    if (!good) ++violations;
  }
  return {violations == 0, std::to_string(sol) + " SOL, " + std::to_string(nc) + " NC, " +
                               std::to_string(psd) + " shifted-PD, " +
                               std::to_string(violations) + " violations"};
}

// ---- 4 ----------------------------------------------------------------------
Outcome meo_statistics() {
  const double eps = 0.05, sigma = 0.05;
  const Index m = 60;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int hits = 0, bad_pairs = 0;
  for (int t = 0; t < 400; ++t) {
    Vector eig(m);
    eig(0) = -2.0 * eps * (1.0 + U(rng));
    for (Index i = 1; i < m; ++i) eig(i) = -eps + 10.0 * U(rng);
    const Matrix H = lt::with_spectrum(eig, rng);
    std::mt19937_64 meo_rng(static_cast<std::uint64_t>(t) + 1);
    const MeoOutcome o = meo(SymmetricOperator::from_matrix(H), eps, sigma, std::nullopt, meo_rng);
    if (o.kind != MeoKind::NegativeCurvature) continue;
    ++hits;
    if (std::abs(o.v.norm() - 1.0) > 1e-10 || o.v.dot(H * o.v) > -eps / 2) ++bad_pairs;
  }
  const double rate = hits / 400.0;
  return {rate >= 0.92 && bad_pairs == 0,
          "NegativeCurvature in " + std::to_string(hits) + "/400 (" + fmt("%.1f", 100 * rate) +
              "%), invalid pairs " + std::to_string(bad_pairs)};
}

// ---- 5 ----------------------------------------------------------------------
Outcome toy_analytic() {
  const CompositeProblem toy = make_toy_problem();
  const Vector x0 = toy_x0();
  const Vector g = residual_g(toy, x0);
  const double s = 1e-6 / std::sqrt(3.0);
  const double g_err = std::max({std::abs(g(0) + s), std::abs(g(1) - s), std::abs(g(2))});
  const IndexList J = partition(x0, 1e-5).i_neq0;
  const SymmetricOperator HJ = restricted_operator(toy.oracle().hessian_at(x0), J);
  Matrix M(2, 2);
  M.col(0) = HJ.apply(Vector::Unit(2, 0));
  M.col(1) = HJ.apply(Vector::Unit(2, 1));
  Matrix ref = Matrix::Zero(2, 2);
  ref.diagonal().setConstant(-4.0);
  const double h_err = (M - ref).cwiseAbs().maxCoeff();
  OpCounters k;
  CountedProblem cp(toy, k);
  std::mt19937_64 rng(505);
  const MeoOutcome o = scaled_curvature_oracle(cp, x0, J, scaling(x0, 1e-5), 0.5, {}, rng);
  const double l_err = std::abs(o.lambda_hat + 4.0);
  const bool ok = J == IndexList{0, 1} && g_err <= 1e-12 && h_err <= 1e-12 &&
                  o.kind == MeoKind::NegativeCurvature && l_err <= 1e-8;
  return {ok, "|g - g_ref| = " + fmt("%.1e", g_err) + ", |H_J - diag(-4,-4)| = " +
                  fmt("%.1e", h_err) + ", scaled lambda_min = " + fmt("%.10f", o.lambda_hat)};
}

const RunRecord* find_run(const std::vector<RunRecord>& runs, const std::string& name) {
  for (const auto& r : runs)
    if (r.name == name) return &r;
  return nullptr;
}

// ---- 6 ----------------------------------------------------------------------
Outcome toy_escape(const ToyResult& toy) {
  Vector star(3), bar(3);
  star << 3.0, -3.0, 0.0;
  bar << 1.0, -1.0, 0.0;
  const RunRecord* h = find_run(toy.runs, "toy_hpgncm");
  const RunRecord* p = find_run(toy.runs, "toy_pgn2cm");
  const RunRecord* f = find_run(toy.runs, "toy_fpgn2cm");
  if (!h || !p || !f) return {false, "missing toy run"};
  const double dh = (h->report.final_x - star).norm();
  const double dp = (p->report.final_x - star).norm();
  const double df = (f->report.final_x - bar).norm();
  const bool ok = h->report.status == SolveStatus::StrongStar2oPoint &&
                  p->report.status == SolveStatus::Weak2oPoint && dh <= 1e-2 && dp <= 1e-2 &&
                  df <= 1e-3;
  return {ok, std::string("HPGNCM ") + std::string(to_string(h->report.status)) + " dist " +
                  fmt("%.2e", dh) + "; PGN2CM " + std::string(to_string(p->report.status)) +
                  " dist " + fmt("%.2e", dp) + "; FPGN2CM dist to (1,-1,0) " + fmt("%.2e", df)};
}

// ---- 7 ----------------------------------------------------------------------
// Replays every run through a CSV and JSON round trip, so the check sees only
// what an external reader of the artifacts would see.
Outcome ledger(const std::vector<const RunRecord*>& runs, int scaling_points, int scaling_bad) {
  std::int64_t steps = 0;
  int bad = 0;
  std::string first;
  for (const RunRecord* r : runs) {
    std::stringstream ss;
    write_trace_csv(ss, r->report.trace);
    const Trace back = read_trace_csv(ss);
    const SolverConfig cfg = config_from_json(config_to_json(r->config));
    const TraceValidation v = validate_trace(back, cfg);
    steps += v.checked_steps;
    if (!v.ok) {
      ++bad;
      if (first.empty()) first = r->name + ": " + (v.failures.empty() ? "?" : v.failures.front());
    }
  }
  std::string detail = std::to_string(runs.size()) + " runs, " + std::to_string(steps) +
                       " steps replayed, " + std::to_string(bad) + " invalid; scaling runs " +
                       std::to_string(scaling_points - scaling_bad) + "/" +
                       std::to_string(scaling_points) + " valid";
  if (!first.empty()) detail += "; first failure " + first;
  return {bad == 0 && scaling_bad == 0 && steps > 0, detail};
}

// ---- 8 ----------------------------------------------------------------------
Outcome student_t(const StudentTResult& r, double eps_g, double eps_h) {
  int bad = 0;
  double it_h = 0, it_p = 0;
  int n_h = 0, n_p = 0;
  for (const auto& run : r.runs) {
    if (!run.validation.ok) ++bad;
    if (run.solver == SolverKind::Hpgncm) {
      it_h += static_cast<double>(run.report.iterations);
      ++n_h;
      continue;
    }
    it_p += static_cast<double>(run.report.iterations);
    ++n_p;
    const auto& c = run.report.certificate;
    const bool cert_ok = c.empty_support || (c.lambda_min && *c.lambda_min >= -eps_h);
    if (run.report.status != SolveStatus::Weak2oPoint || run.report.iterations >= 500000 ||
        !(c.norm_g_eps <= eps_g) || !cert_ok)
      ++bad;
  }
  const double mh = it_h / n_h, mp = it_p / n_p;
  std::printf("\n  Student's t, n=256, d=20, %d trials (reference means from the published table"
              " in brackets)\n",
              n_p);
  std::printf("  %-8s %10s %10s %9s %10s %11s %11s %10s %8s\n", "Algs", "Iter", "[Iter]", "Fval",
              "[Fval]", "norm_g", "lmin_SHS", "hvp", "time_s");
  for (const auto& s : r.summary) {
    const bool is_h = s.algorithm == "HPGNCM" || s.algorithm == "hpgncm";
    std::printf("  %-8s %10.1f %10s %9.4f %10s %11.3e %11.3e %10.1f %8.3f\n", s.algorithm.c_str(),
                s.iter, is_h ? "119091" : "26132", s.fval, "2.39", s.norm_g, s.lambda_min_shs,
                s.hvp, s.time_s);
  }
  std::printf("\n");
  return {bad == 0 && n_p > 0 && n_h == n_p && mp < mh,
          "PGN2CM mean iter " + fmt("%.1f", mp) + " < HPGNCM " + fmt("%.1f", mh) + "; " +
              std::to_string(bad) + " runs failing certificate/trace checks"};
}

// ---- 9 ----------------------------------------------------------------------
Outcome rates(const ToyResult& convex, const ToyResult& nonconvex) {
  auto tail = [](const RateSeries& rs, bool& decreasing, double& last) {
    std::string s;
    const std::size_t n = rs.ratios.size();
    decreasing = n >= 5;
    for (std::size_t i = n >= 5 ? n - 5 : 0; i < n; ++i) {
      s += (s.empty() ? "" : ", ") + fmt("%.3e", rs.ratios[i]);
      if (i > n - 5 && !(rs.ratios[i] < rs.ratios[i - 1])) decreasing = false;
    }
    last = n ? rs.ratios.back() : NAN;
    return s;
  };
  const RateSeries* c = nullptr;
  for (const auto& rs : convex.rates)
    if (rs.name == "toy_fpgn2cm") c = &rs;
  const RateSeries* nc = nonconvex.rates.empty() ? nullptr : &nonconvex.rates.front();
  if (!c) return {false, "missing FPGN2CM rate series"};
  bool dec = false, dec_nc = false;
  double last = NAN, last_nc = NAN;
  const std::string sc = tail(*c, dec, last);
  std::string detail = "convex mode last ratios [" + sc + "]";
  if (nc) {
    const std::string sn = tail(*nc, dec_nc, last_nc);
    detail += "; nonconvex mode (reported) [" + sn + "]" +
              (dec_nc ? " decreasing" : " not decreasing");
  }
  return {dec && last < 0.1, detail};
}

// ---- 10 ---------------------------------------------------------------------
SlopeFit fit_of(const ScalingResult& r, SolverKind s) {
  for (const auto& [k, f] : r.fits)
    if (k == s) return f;
  return {};
}

Outcome scaling(const ScalingResult& planted, const ScalingResult& random_family) {
  auto describe = [](const ScalingResult& r) {
    const SlopeFit h = fit_of(r, SolverKind::Hpgncm), p = fit_of(r, SolverKind::Pgn2cm);
    return "HPGNCM slope " + fmt("%.4f", h.slope) + " [" + fmt("%.4f", h.ci_low) + ", " +
           fmt("%.4f", h.ci_high) + "], PGN2CM slope " + fmt("%.4f", p.slope) + " [" +
           fmt("%.4f", p.ci_low) + ", " + fmt("%.4f", p.ci_high) + "]";
  };
  const SlopeFit h = fit_of(planted, SolverKind::Hpgncm), p = fit_of(planted, SolverKind::Pgn2cm);
  const SlopeFit hr = fit_of(random_family, SolverKind::Hpgncm),
                 pr = fit_of(random_family, SolverKind::Pgn2cm);
  const bool ok = h.defined && p.defined && std::abs(p.slope) <= std::abs(h.slope);
  const bool ok_r = hr.defined && pr.defined && std::abs(pr.slope) <= std::abs(hr.slope);
  return {ok, "planted family: " + describe(planted) + "; random-center family (reported): " +
                  describe(random_family) + (ok_r ? " ordering holds" : " ordering fails")};
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(timed(1, "residual relations", 5.0, residual_relations));
  results.push_back(timed(2, "componentwise gradient mapping", 1.0, closed_form_mapping));
  results.push_back(timed(3, "capped CG contracts", 30.0, capped_cg_contracts));
  results.push_back(timed(4, "MEO statistical contract", 30.0, meo_statistics));
  results.push_back(timed(5, "toy analytic values", 1.0, toy_analytic));

  ToyResult toy, toy_nc;
  results.push_back(timed(6, "toy escape", 10.0, [&] {
    toy = run_toy(ToySpec{});
    return toy_escape(toy);
  }));

  StudentTResult st;
  StudentTSpec st_spec;
  st_spec.seed_base = seed_base();
  const SolverConfig st_cfg = student_t_config(SolverKind::Pgn2cm);
  Criterion c8 = timed(8, "Student's t desk scale", 600.0, [&] {
    st = run_student_t(st_spec);
    return student_t(st, st_cfg.eps_g, st_cfg.eps_h_value());
  });

  Criterion c9 = timed(9, "superlinear rate diagnostic", 5.0, [&] {
    ToySpec nc;
    nc.rate_mode = Fpgn2cmMode::Nonconvex;
    nc.solvers = {SolverKind::Fpgn2cm};
    toy_nc = run_toy(nc);
    return rates(toy, toy_nc);
  });

  ScalingResult planted, random_family;
  Criterion c10 = timed(10, "scaling diagnostic", 120.0, [&] {
    ScalingSpec spec;
    spec.seed_base = seed_base();
    planted = run_scaling(spec);
    spec.planted_support = 0;
    random_family = run_scaling(spec);
    return scaling(planted, random_family);
  });

  std::vector<const RunRecord*> all;
  for (const auto* set : {&toy.runs, &toy_nc.runs, &st.runs})
    for (const auto& r : *set) all.push_back(&r);
  int sp = 0, sp_bad = 0;
  for (const auto* set : {&planted.points, &random_family.points})
    for (const auto& p : *set) {
      ++sp;
      if (!p.trace_ok) ++sp_bad;
    }
  Criterion c7 = timed(7, "line-search ledger", 5.0, [&] { return ledger(all, sp, sp_bad); });

  results.push_back(c7);
  results.push_back(c8);
  results.push_back(c9);
  results.push_back(c10);

  bool all_pass = true;
  for (const auto& c : results) {
    std::printf("criterion %2d %s: %s (%.2f s, budget %.0f s) %s\n", c.id,
                c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.seconds, c.budget_s,
                c.outcome.detail.c_str());
    all_pass = all_pass && c.pass();
  }
  return all_pass ? 0 : 1;
}
