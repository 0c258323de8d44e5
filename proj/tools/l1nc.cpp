#include "l1nc/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace l1nc;

namespace {

struct Common {
  std::vector<std::string> solvers;
  std::optional<double> eps_g, eps_h;
  std::optional<std::int64_t> max_iters;
  std::optional<std::uint64_t> seed;
  std::string out = "l1nc_out";
  std::string config;
  int threads = 0;
  bool omit_timing = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--solver", c.solvers, "hpgncm, pgn2cm, fpgncm, fpgn2cm")
      ->delimiter(',');
  app->add_option("--eps-g", c.eps_g, "First-order tolerance");
  app->add_option("--eps-h", c.eps_h, "Second-order tolerance");
  app->add_option("--max-iters", c.max_iters, "Iteration cap per run");
  app->add_option("--seed", c.seed, "Seed base (default: $L1C_SEED or 0)");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--config", c.config, "JSON file overriding SolverConfig fields");
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  app->add_flag("--omit-timing", c.omit_timing,
                "Write wall_ms as 0 so traces are byte-reproducible");
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ConfigOverrides overrides(const Common& c) {
  ConfigOverrides o;
  if (!c.config.empty()) o.json = read_file(c.config);
  o.eps_g = c.eps_g;
  o.eps_h = c.eps_h;
  o.max_iters = c.max_iters;
  return o;
}

std::uint64_t seed_base(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("L1C_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("L1C_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

std::vector<SolverKind> solvers(const Common& c, std::vector<SolverKind> dflt) {
  if (c.solvers.empty()) return dflt;
  std::vector<SolverKind> out;
  for (const auto& s : c.solvers) out.push_back(solver_from_string(s));
  return out;
}

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = fs::path(dir) / ".write_probe";
  std::ofstream os(probe);
  if (ec || !os) throw ConfigError("output directory not writable: " + dir);
  os.close();
  fs::remove(probe, ec);
}

std::string fmt_opt(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

bool report_runs(const std::vector<RunRecord>& runs) {
  bool all = true;
  std::printf("%-28s %-18s %9s %14s %10s %11s %11s %6s\n", "run", "status",
              "iter", "fval", "norm_g", "lmin_H", "lmin_SHS", "trace");
  for (const auto& r : runs) {
    const bool cert = is_certified(r.report.status);
    all = all && cert && r.validation.ok;
    std::printf("%-28s %-18s %9lld %14.8g %10.3e %11s %11s %6s\n",
                r.name.c_str(), std::string(to_string(r.report.status)).c_str(),
                static_cast<long long>(r.report.iterations), r.fval,
                r.report.certificate.norm_g,
                fmt_opt(r.spectrum.lambda_min_h).c_str(),
                fmt_opt(r.spectrum.lambda_min_shs).c_str(),
                r.validation.ok ? "ok" : "FAIL");
    for (const auto& f : r.validation.failures) std::printf("  %s\n", f.c_str());
  }
  return all;
}

int cmd_toy(const Common& c, const std::string& mode) {
  ToySpec spec;
  spec.overrides = overrides(c);
  spec.rate_mode = fpgn2cm_mode_from_string(mode);
  spec.solvers = solvers(c, spec.solvers);
  const ToyResult r = run_toy(spec);
  prepare_out(c.out);
  write_toy_artifacts(c.out, r, c.omit_timing);
  const bool ok = report_runs(r.runs);
  for (const auto& rs : r.rates) {
    std::printf("%s error ratios:", rs.name.c_str());
    const std::size_t from = rs.ratios.size() > 8 ? rs.ratios.size() - 8 : 0;
    for (std::size_t i = from; i < rs.ratios.size(); ++i)
      std::printf(" %.3e", rs.ratios[i]);
    std::printf("\n");
  }
  return ok ? 0 : 1;
}

int cmd_student_t(const Common& c, Index n, double d, int trials) {
  StudentTSpec spec;
  spec.n = n;
  spec.d_db = d;
  spec.trials = trials;
  spec.seed_base = seed_base(c);
  spec.threads = c.threads;
  spec.overrides = overrides(c);
  spec.solvers = solvers(c, spec.solvers);
  prepare_out(c.out);
  const StudentTResult r = run_student_t(spec);
  write_student_t_artifacts(c.out, r, c.omit_timing);
  const bool ok = report_runs(r.runs);
  std::printf("\n%-8s %5s %4s %10s %10s %9s %10s %11s %11s %12s %10s\n", "Algs",
              "n", "d", "Iter", "Fval", "time", "norm_g", "lmin_H", "lmin_SHS",
              "hvp", "grad");
  for (const auto& s : r.summary)
    std::printf("%-8s %5lld %4g %10.1f %10.4f %9.3f %10.3e %11s %11s %12.1f %10.1f\n",
                s.algorithm.c_str(), static_cast<long long>(s.n), s.d, s.iter,
                s.fval, s.time_s, s.norm_g, fmt_opt(s.lambda_min_h).c_str(),
                fmt_opt(s.lambda_min_shs).c_str(), s.hvp, s.grad);
  return ok ? 0 : 1;
}

int cmd_scaling(const Common& c, const std::vector<double>& grid, Index n,
                int instances, Index support) {
  ScalingSpec spec;
  spec.planted_support = support;
  if (!grid.empty()) spec.eps_grid = grid;
  spec.n = n;
  spec.instances = instances;
  spec.seed_base = seed_base(c);
  spec.threads = c.threads;
  spec.overrides = overrides(c);
  spec.solvers = solvers(c, spec.solvers);
  prepare_out(c.out);
  const ScalingResult r = run_scaling(spec);
  write_scaling_artifacts(c.out, r);
  bool ok = true;
  for (const auto& p : r.points) ok = ok && is_certified(p.status) && p.trace_ok;
  for (const auto& [s, f] : r.fits) {
    if (f.defined)
      std::printf("%-8s slope %.4f  95%% CI [%.4f, %.4f]  (%d points)\n",
                  std::string(to_string(s)).c_str(), f.slope, f.ci_low,
                  f.ci_high, f.points);
    else
      std::printf("%-8s slope undefined (%d points)\n",
                  std::string(to_string(s)).c_str(), f.points);
  }
  return ok ? 0 : 1;
}

int cmd_validate(const std::vector<std::string>& traces, const std::string& config) {
  bool ok = true;
  for (const auto& path : traces) {
    std::string cfg_path = config;
    if (cfg_path.empty()) {
      fs::path p(path);
      cfg_path = (p.parent_path() / (p.stem().string() + ".config.json")).string();
    }
    const SolverConfig cfg = config_from_json(read_file(cfg_path));
    const TraceValidation v = validate_trace(read_trace_file(path), cfg);
    std::printf("%s: %s (%lld steps checked)\n", path.c_str(),
                v.ok ? "valid" : "INVALID",
                static_cast<long long>(v.checked_steps));
    for (const auto& f : v.failures) std::printf("  %s\n", f.c_str());
    ok = ok && v.ok;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1-regularized nonconvex solvers: experiment runner"};
  app.require_subcommand(1);

  Common toy_c;
  std::string mode = "convex";
  auto* toy = app.add_subcommand("toy", "Toy escape runs and rate traces");
  add_common(toy, toy_c);
  toy->add_option("--fpgn2cm-mode", mode, "convex | nonconvex")
      ->check(CLI::IsMember({"convex", "nonconvex"}));

  Common st_c;
  Index n = 256;
  double d = 20.0;
  int trials = 5;
  auto* st = app.add_subcommand("student-t", "Student's t regression sweep");
  add_common(st, st_c);
  st->add_option("--n", n, "Signal length")->check(CLI::IsMember({256, 512, 1024}));
  st->add_option("--d", d, "Dynamic range in dB")->check(CLI::IsMember({20.0, 40.0, 60.0, 80.0}));
  st->add_option("--trials", trials, "Independent trials")->check(CLI::PositiveNumber);

  Common sc_c;
  std::vector<double> grid;
  Index sc_n = 30;
  int instances = 3;
  Index support = 10;
  auto* sc = app.add_subcommand("scaling", "Iterations against eps_g on convex quadratics");
  add_common(sc, sc_c);
  sc->add_option("--eps-grid", grid, "Comma-separated eps_g values in (1e-6, 1e-1)")
      ->delimiter(',');
  sc->add_option("--n", sc_n, "Dimension (<= 64)");
  sc->add_option("--trials", instances, "Instances per eps")->check(CLI::PositiveNumber);
  sc->add_option("--support", support,
                 "Planted minimizer nonzeros (0 = random-center family)");

  std::vector<std::string> traces;
  std::string vconfig;
  auto* vt = app.add_subcommand("validate-trace", "Replay line-search tests from trace CSVs");
  vt->add_option("traces", traces, "Trace CSV files")->required();
  vt->add_option("--config", vconfig,
                 "Config JSON (default: <trace>.config.json next to each trace)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*toy) return cmd_toy(toy_c, mode);
    if (*st) return cmd_student_t(st_c, n, d, trials);
    if (*sc) return cmd_scaling(sc_c, grid, sc_n, instances, support);
    if (*vt) return cmd_validate(traces, vconfig);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
