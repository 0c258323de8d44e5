#include "l1nc/experiments.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace l1nc {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ojson vec_json(const Vector& v) {
  ojson a = ojson::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ojson opt_json(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
  if (!os) throw ConfigError("write failed: " + path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Hpgncm: return "hpgncm";
    case SolverKind::Pgn2cm: return "pgn2cm";
    case SolverKind::Fpgncm: return "fpgncm";
    case SolverKind::Fpgn2cm: return "fpgn2cm";
  }
  return "hpgncm";
}

SolverKind solver_from_string(std::string_view s) {
  if (s == "hpgncm") return SolverKind::Hpgncm;
  if (s == "pgn2cm") return SolverKind::Pgn2cm;
  if (s == "fpgncm") return SolverKind::Fpgncm;
  if (s == "fpgn2cm") return SolverKind::Fpgn2cm;
  throw ConfigError("unknown solver '" + std::string(s) + "'");
}

std::string_view to_string(Fpgn2cmMode m) {
  return m == Fpgn2cmMode::Convex ? "convex" : "nonconvex";
}

Fpgn2cmMode fpgn2cm_mode_from_string(std::string_view s) {
  if (s == "convex") return Fpgn2cmMode::Convex;
  if (s == "nonconvex") return Fpgn2cmMode::Nonconvex;
  throw ConfigError("unknown fpgn2cm mode '" + std::string(s) + "'");
}

SolverConfig effective_config(SolverKind s, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  if (s == SolverKind::Fpgn2cm) c.eps_h = std::sqrt(cfg.eps_g);
  return c;
}

SolveReport run_solver(SolverKind s, const CompositeProblem& problem,
                       const Vector& x0, const SolverConfig& cfg,
                       Fpgn2cmMode mode) {
  switch (s) {
    case SolverKind::Hpgncm: return hpgncm_solve(problem, x0, cfg);
    case SolverKind::Pgn2cm: return pgn2cm_solve(problem, x0, cfg);
    case SolverKind::Fpgncm: return fpgncm_solve(problem, x0, cfg);
    case SolverKind::Fpgn2cm: return fpgn2cm_solve(problem, x0, cfg, mode);
  }
  throw ConfigError("unknown solver");
}

SolverConfig toy_config(SolverKind s) {
  SolverConfig c;
  c.eps_g = 1e-5;
  c.beta = 2.0;
  c.eta_bar = s == SolverKind::Hpgncm ? 1.0 : 0.7;
  c.eta_nc = 1e-4;
  c.theta_nc = 0.25;
  c.eta_sol = 1e-4;
  c.theta_sol = 0.7;
  c.zeta = 0.999;
  c.delta = 1.0;
  return c;
}

SolverConfig student_t_config(SolverKind s) {
  SolverConfig c;
  c.eps_g = 1e-4;
  c.eps_h = 1e-2;
  c.beta = 2.75;
  c.eta_bar = 0.7;
  c.eta_nc = 1e-4;
  c.eta_sol = 1e-4;
  c.zeta = 0.999;
  c.delta = 1.0;
  c.theta_sol = 0.75;
  c.theta_nc = (s == SolverKind::Pgn2cm || s == SolverKind::Fpgn2cm) ? 0.3 : 0.25;
  c.max_iters = 500000;
  return c;
}

SolverConfig ConfigOverrides::apply(SolverConfig preset) const {
  SolverConfig c = json.empty() ? preset : config_from_json(json, preset);
  if (eps_g) c.eps_g = *eps_g;
  if (eps_h) c.eps_h = *eps_h;
  if (max_iters) c.max_iters = *max_iters;
  c.validate();
  return c;
}

RestrictedSpectrum restricted_spectrum(const CompositeProblem& problem,
                                       const Vector& x, double eps_g) {
  RestrictedSpectrum out;
  const IndexList J = partition(x, eps_g).i_neq0;
  out.support = static_cast<Index>(J.size());
  if (J.empty()) {
    out.lambda_min_h = out.lambda_min_shs = kNaN;
    return out;
  }
  const Index m = out.support;
  Matrix HJ(m, m);
  const SmoothOracle& f = problem.oracle();
  if (auto H = f.has_dense_hessian() ? f.dense_hessian(x) : std::nullopt) {
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) HJ(a, b) = (*H)(J[a], J[b]);
  } else {
    const SymmetricOperator op = f.hessian_at(x);
    for (Index b = 0; b < m; ++b) {
      Vector e = Vector::Zero(x.size());
      e(J[b]) = 1.0;
      HJ.col(b) = gather(op.apply(e), J);
    }
  }
  HJ = 0.5 * (HJ + HJ.transpose()).eval();
  const Vector sJ = gather(scaling(x, eps_g), J);
  const Matrix SHS = sJ.asDiagonal() * HJ * sJ.asDiagonal();
  out.lambda_min_h = Eigen::SelfAdjointEigenSolver<Matrix>(HJ, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .minCoeff();
  out.lambda_min_shs = Eigen::SelfAdjointEigenSolver<Matrix>(SHS, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
  return out;
}

RunRecord execute(const std::string& name, SolverKind s,
                  const CompositeProblem& problem, const Vector& x0,
                  const SolverConfig& cfg, Fpgn2cmMode mode) {
  RunRecord r;
  r.name = name;
  r.solver = s;
  r.mode = mode;
  r.config = effective_config(s, cfg);
  const detail::Stopwatch clock;
  r.report = run_solver(s, problem, x0, cfg, mode);
  r.wall_ms = clock.ms();
  r.fval = problem.phi(r.report.final_x);
  r.spectrum = restricted_spectrum(problem, r.report.final_x, r.config.eps_g);
  if (r.config.record_trace) r.validation = validate_trace(r.report.trace, r.config);
  return r;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& task) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---- toy -----------------------------------------------------------------

void fill_rates(RateSeries& rs, const std::vector<Vector>& iterates,
                const Vector& xbar, double floor) {
  rs.err.clear();
  rs.ratios.clear();
  for (const Vector& x : iterates) rs.err.push_back((x - xbar).norm());
  for (std::size_t k = 0; k + 1 < rs.err.size(); ++k)
    if (rs.err[k] > floor && rs.err[k + 1] > floor)
      rs.ratios.push_back(rs.err[k + 1] / rs.err[k]);
}

ToyResult run_toy(const ToySpec& spec) {
  const CompositeProblem problem = make_toy_problem();
  ToyResult out;
  auto config = [&](SolverKind s) {
    SolverConfig c = spec.overrides.apply(toy_config(s));
    c.record_iterates = true;
    return c;
  };

  auto wanted = [&](SolverKind s) {
    return std::find(spec.solvers.begin(), spec.solvers.end(), s) != spec.solvers.end();
  };

  Vector x0(3);
  x0 << 2.0, -2.0, 0.0;
  for (SolverKind s : {SolverKind::Hpgncm, SolverKind::Pgn2cm})
    if (wanted(s))
      out.runs.push_back(execute(std::string("toy_") + std::string(to_string(s)),
                                 s, problem, x0, config(s)));

  if (wanted(SolverKind::Fpgncm) || wanted(SolverKind::Fpgn2cm)) {
    const Vector start = toy_rate_start();
    SolverConfig ref = config(SolverKind::Fpgn2cm);
    ref.max_iters = std::max<std::int64_t>(ref.max_iters, 1000);
    ref.record_trace = false;
    ref.record_iterates = false;
    out.xbar = fpgn2cm_solve(problem, start, ref, spec.rate_mode).final_x;
    const double floor = 1e-13 * std::max(1.0, out.xbar.norm());

    for (SolverKind s : {SolverKind::Fpgncm, SolverKind::Fpgn2cm}) {
      if (!wanted(s)) continue;
      RunRecord r = execute(std::string("toy_") + std::string(to_string(s)), s,
                            problem, start, config(s), spec.rate_mode);
      RateSeries rs;
      rs.name = r.name;
      for (const auto& row : r.report.trace) {
        rs.norm_g.push_back(row.norm_g);
        rs.norm_Gt.push_back(row.norm_Gt);
        rs.norm_g_eps.push_back(row.norm_g_eps);
      }
      fill_rates(rs, r.report.iterates, out.xbar, floor);
      out.rates.push_back(std::move(rs));
      out.runs.push_back(std::move(r));
    }
  }
  return out;
}

// ---- Student's t -------------------------------------------------------------

SummaryRow summarize(const std::string& algorithm, Index n, double d,
                     const std::vector<const RunRecord*>& runs) {
  SummaryRow row;
  row.algorithm = algorithm;
  row.n = n;
  row.d = d;
  row.trials = static_cast<int>(runs.size());
  int h_count = 0, shs_count = 0;
  for (const RunRecord* r : runs) {
    if (is_certified(r->report.status)) ++row.certified;
    row.iter += static_cast<double>(r->report.iterations);
    row.fval += r->fval;
    row.time_s += r->wall_ms / 1000.0;
    row.norm_g += r->report.certificate.norm_g;
    row.hvp += static_cast<double>(r->report.counters.hvp_count);
    row.grad += static_cast<double>(r->report.counters.grad_evals);
    if (!std::isnan(r->spectrum.lambda_min_h)) {
      row.lambda_min_h += r->spectrum.lambda_min_h;
      ++h_count;
    }
    if (!std::isnan(r->spectrum.lambda_min_shs)) {
      row.lambda_min_shs += r->spectrum.lambda_min_shs;
      ++shs_count;
    }
  }
  const double k = runs.empty() ? kNaN : static_cast<double>(runs.size());
  row.iter /= k;
  row.fval /= k;
  row.time_s /= k;
  row.norm_g /= k;
  row.hvp /= k;
  row.grad /= k;
  row.lambda_min_h = h_count ? row.lambda_min_h / h_count : kNaN;
  row.lambda_min_shs = shs_count ? row.lambda_min_shs / shs_count : kNaN;
  return row;
}

StudentTResult run_student_t(const StudentTSpec& spec) {
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  if (spec.solvers.empty()) throw ConfigError("no solvers selected");
  StudentTResult out;
  out.instances.resize(static_cast<std::size_t>(spec.trials));
  parallel_for(out.instances.size(), spec.threads, [&](std::size_t i) {
    SignalSpec sig;
    sig.n = spec.n;
    sig.d_db = spec.d_db;
    sig.seed = spec.seed_base + i;
    out.instances[i] = build_student_t(sig);
  });

  const std::size_t ns = spec.solvers.size();
  std::vector<SolverConfig> configs;
  for (SolverKind s : spec.solvers)
    configs.push_back(spec.overrides.apply(student_t_config(s)));
  out.runs.resize(out.instances.size() * ns);
  parallel_for(out.runs.size(), spec.threads, [&](std::size_t task) {
    const std::size_t trial = task / ns, which = task % ns;
    const StudentTInstance& inst = out.instances[trial];
    const SolverKind s = spec.solvers[which];
    SolverConfig cfg = configs[which];
    cfg.rng_seed = inst.seed;
    const std::string name = std::string(to_string(s)) + "_n" +
                             std::to_string(spec.n) + "_d" +
                             fmt(spec.d_db) + "_trial" + std::to_string(trial);
    RunRecord r = execute(name, s, *inst.problem, Vector::Zero(spec.n), cfg);
    r.trial = static_cast<std::int64_t>(trial);
    r.seed = inst.seed;
    out.runs[task] = std::move(r);
  });

  for (std::size_t w = 0; w < ns; ++w) {
    std::vector<const RunRecord*> mine;
    for (std::size_t t = 0; t < out.instances.size(); ++t)
      mine.push_back(&out.runs[t * ns + w]);
    out.summary.push_back(summarize(std::string(to_string(spec.solvers[w])),
                                    spec.n, spec.d_db, mine));
  }
  return out;
}

// ---- eps scaling ---------------------------------------------------------

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  const std::size_t n = std::min(x.size(), y.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points = static_cast<int>(lx.size());
  if (lx.size() < 2) return fit;
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  fit.defined = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (lx.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
      sse += e * e;
    }
    fit.std_error = std::sqrt(sse / (k - 2.0) / sxx);
    const boost::math::students_t dist(k - 2.0);
    const double q = boost::math::quantile(dist, 0.975);
    fit.ci_low = fit.slope - q * fit.std_error;
    fit.ci_high = fit.slope + q * fit.std_error;
  } else {
    fit.std_error = kNaN;
    fit.ci_low = fit.ci_high = kNaN;
  }
  return fit;
}

ScalingResult run_scaling(const ScalingSpec& spec) {
  for (double e : spec.eps_grid)
    if (!(e > 1e-6 && e < 1e-1))
      throw ConfigError("scaling eps grid must lie in (1e-6, 1e-1)");
  if (spec.instances < 1) throw ConfigError("instances must be >= 1");
  if (spec.n < 1 || spec.n > 64) throw ConfigError("scaling n must lie in [1, 64]");
  if (!(spec.condition >= 1.0)) throw ConfigError("condition must be >= 1");

  Vector eigs(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    const double u = spec.n == 1 ? 0.0 : static_cast<double>(i) / (spec.n - 1);
    eigs(i) = std::pow(spec.condition, u);
  }
  std::vector<CompositeProblem> problems;
  for (int i = 0; i < spec.instances; ++i) {
    const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(i);
    problems.push_back(
        spec.planted_support > 0
            ? planted_l1_quadratic(eigs, spec.lambda, spec.planted_support, seed).problem
            : random_l1_quadratic(eigs, spec.lambda, seed));
  }

  ScalingResult out;
  for (SolverKind s : spec.solvers)
    for (double e : spec.eps_grid)
      for (int i = 0; i < spec.instances; ++i) {
        ScalingPoint p;
        p.solver = s;
        p.eps = e;
        p.instance = i;
        out.points.push_back(p);
      }

  parallel_for(out.points.size(), spec.threads, [&](std::size_t task) {
    ScalingPoint& p = out.points[task];
    SolverConfig base = toy_config(p.solver);
    base.eta_bar = 0.7;
    SolverConfig cfg = spec.overrides.apply(base);
    cfg.eps_g = p.eps;
    cfg.eps_h.reset();
    cfg.rng_seed = spec.seed_base + static_cast<std::uint64_t>(p.instance);
    const CompositeProblem& prob = problems[static_cast<std::size_t>(p.instance)];
    const SolveReport rep =
        run_solver(p.solver, prob, Vector::Zero(spec.n), cfg);
    p.iterations = rep.iterations;
    p.hvp = rep.counters.hvp_count;
    p.grad = rep.counters.grad_evals;
    p.status = rep.status;
    p.trace_ok = validate_trace(rep.trace, effective_config(p.solver, cfg)).ok;
  });

  for (SolverKind s : spec.solvers) {
    std::vector<double> xs, ys;
    for (double e : spec.eps_grid) {
      double sum = 0.0;
      int count = 0;
      for (const auto& p : out.points)
        if (p.solver == s && p.eps == e) {
          sum += static_cast<double>(p.iterations);
          ++count;
        }
      xs.push_back(e);
      ys.push_back(sum / count);
    }
    out.fits.emplace_back(s, fit_loglog(xs, ys));
  }
  return out;
}

// ---- artifacts -------------------------------------------------------------

void write_run_artifacts(const std::string& dir, const RunRecord& run,
                         bool omit_timing) {
  const std::filesystem::path base(dir);
  write_trace_file((base / (run.name + ".csv")).string(), run.report.trace,
                   omit_timing);
  write_text(base / (run.name + ".config.json"), config_to_json(run.config) + "\n");
}

namespace {

ojson summary_json(const SummaryRow& r) {
  ojson j;
  j["algorithm"] = r.algorithm;
  j["n"] = r.n;
  j["d"] = r.d;
  j["trials"] = r.trials;
  j["certified"] = r.certified;
  j["Iter"] = r.iter;
  j["Fval"] = r.fval;
  j["time"] = r.time_s;
  j["norm_g"] = r.norm_g;
  j["lambda_min_H"] = r.lambda_min_h;
  j["lambda_min_SHS"] = r.lambda_min_shs;
  j["hvp"] = r.hvp;
  j["grad"] = r.grad;
  return j;
}

ojson record_json(const RunRecord& r) {
  ojson j;
  j["name"] = r.name;
  j["solver"] = std::string(to_string(r.solver));
  if (r.solver == SolverKind::Fpgn2cm) j["mode"] = std::string(to_string(r.mode));
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["status"] = std::string(to_string(r.report.status));
  j["certified"] = is_certified(r.report.status);
  j["iterations"] = r.report.iterations;
  j["fval"] = r.fval;
  j["wall_ms"] = r.wall_ms;
  const SolveCertificate& c = r.report.certificate;
  j["certificate"] = {{"norm_g", c.norm_g},
                      {"norm_g_eps", c.norm_g_eps},
                      {"norm_Gt", c.norm_Gt},
                      {"t", c.t},
                      {"lambda_min", opt_json(c.lambda_min)},
                      {"sigma", c.sigma},
                      {"empty_support", c.empty_support},
                      {"exact_eigensolve", c.exact_eigensolve}};
  j["support"] = r.spectrum.support;
  j["lambda_min_H"] = r.spectrum.lambda_min_h;
  j["lambda_min_SHS"] = r.spectrum.lambda_min_shs;
  const OpCounters& k = r.report.counters;
  j["counters"] = {{"grad_evals", k.grad_evals},
                   {"hvp_count", k.hvp_count},
                   {"prox_count", k.prox_count},
                   {"f_evals", k.f_evals},
                   {"dense_hessian_evals", k.dense_hessian_evals}};
  int contract_failures = 0;
  for (const auto& s : r.report.newton_steps)
    if (!s.contracts_ok()) ++contract_failures;
  j["newton_steps"] = r.report.newton_steps.size();
  j["newton_contract_failures"] = contract_failures;
  j["trace_valid"] = r.validation.ok;
  j["trace_checked_steps"] = r.validation.checked_steps;
  ojson fails = ojson::array();
  for (std::size_t i = 0; i < r.validation.failures.size() && i < 10; ++i)
    fails.push_back(r.validation.failures[i]);
  j["trace_failures"] = fails;
  j["final_x"] = vec_json(r.report.final_x);
  return j;
}

}  // namespace

std::string summary_row_json(const SummaryRow& row) {
  return summary_json(row).dump(2);
}

std::string run_record_json(const RunRecord& run) {
  return record_json(run).dump(2);
}

void write_toy_artifacts(const std::string& dir, const ToyResult& r,
                         bool omit_timing) {
  const std::filesystem::path base(dir);
  ojson summary;
  summary["xbar"] = vec_json(r.xbar);
  summary["runs"] = ojson::array();
  for (const RunRecord& run : r.runs) {
    write_run_artifacts(dir, run, omit_timing);
    std::string it = "iter,x1,x2,x3\n";
    for (std::size_t k = 0; k < run.report.iterates.size(); ++k) {
      const Vector& x = run.report.iterates[k];
      it += std::to_string(k);
      for (Index i = 0; i < x.size(); ++i) it += "," + fmt(x(i));
      it += "\n";
    }
    write_text(base / (run.name + ".iterates.csv"), it);
    summary["runs"].push_back(record_json(run));
  }
  summary["rates"] = ojson::array();
  for (const RateSeries& rs : r.rates) {
    std::string csv = "iter,norm_g,norm_Gt,norm_g_eps,err\n";
    const std::size_t len = std::min(rs.norm_g.size(), rs.err.size());
    for (std::size_t k = 0; k < len; ++k)
      csv += std::to_string(k) + "," + fmt(rs.norm_g[k]) + "," +
             fmt(rs.norm_Gt[k]) + "," + fmt(rs.norm_g_eps[k]) + "," +
             fmt(rs.err[k]) + "\n";
    write_text(base / (rs.name + ".rates.csv"), csv);
    ojson j;
    j["name"] = rs.name;
    j["ratios"] = rs.ratios;
    summary["rates"].push_back(j);
  }
  write_text(base / "toy_summary.json", summary.dump(2) + "\n");
}

void write_student_t_artifacts(const std::string& dir, const StudentTResult& r,
                               bool omit_timing) {
  const std::filesystem::path base(dir);
  ojson summary;
  summary["rows"] = ojson::array();
  std::string table =
      "algorithm,n,d,trials,certified,Iter,Fval,time,norm_g,lambda_min_H,"
      "lambda_min_SHS,hvp,grad\n";
  for (const SummaryRow& row : r.summary) {
    summary["rows"].push_back(summary_json(row));
    table += row.algorithm + "," + std::to_string(row.n) + "," + fmt(row.d) +
             "," + std::to_string(row.trials) + "," +
             std::to_string(row.certified) + "," + fmt(row.iter) + "," +
             fmt(row.fval) + "," + fmt(row.time_s) + "," + fmt(row.norm_g) +
             "," + fmt(row.lambda_min_h) + "," + fmt(row.lambda_min_shs) +
             "," + fmt(row.hvp) + "," + fmt(row.grad) + "\n";
  }
  summary["runs"] = ojson::array();
  for (const RunRecord& run : r.runs) {
    write_run_artifacts(dir, run, omit_timing);
    summary["runs"].push_back(record_json(run));
  }
  for (std::size_t i = 0; i < r.instances.size(); ++i)
    write_text(base / ("instance_trial" + std::to_string(i) + ".json"),
               student_t_to_json(r.instances[i]) + "\n");
  write_text(base / "student_t_summary.json", summary.dump(2) + "\n");
  write_text(base / "student_t_summary.csv", table);
}

void write_scaling_artifacts(const std::string& dir, const ScalingResult& r) {
  const std::filesystem::path base(dir);
  std::string csv = "solver,eps,instance,iterations,hvp_count,grad_evals,status\n";
  for (const ScalingPoint& p : r.points)
    csv += std::string(to_string(p.solver)) + "," + fmt(p.eps) + "," +
           std::to_string(p.instance) + "," + std::to_string(p.iterations) +
           "," + std::to_string(p.hvp) + "," + std::to_string(p.grad) + "," +
           std::string(to_string(p.status)) + "\n";
  write_text(base / "scaling.csv", csv);
  ojson summary;
  summary["fits"] = ojson::array();
  for (const auto& [s, f] : r.fits) {
    ojson j;
    j["solver"] = std::string(to_string(s));
    j["defined"] = f.defined;
    j["points"] = f.points;
    if (f.defined) {
      j["slope"] = f.slope;
      j["intercept"] = f.intercept;
      j["std_error"] = f.std_error;
      j["ci95"] = {f.ci_low, f.ci_high};
    }
    summary["fits"].push_back(j);
  }
  write_text(base / "scaling_summary.json", summary.dump(2) + "\n");
}

}  // namespace l1nc
