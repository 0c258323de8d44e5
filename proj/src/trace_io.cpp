#include "l1nc/trace_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace l1nc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("trace: bad number in column " + what + ": '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("trace: bad integer in column " + what + ": '" + s + "'");
  }
}

}  // namespace

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "iter",       "phase",   "step_kind", "step_size", "fval",
      "norm_g",     "norm_g_eps", "norm_Gt", "lambda_min", "hvp",
      "grad",       "f_evals", "wall_ms",   "ls_j",      "norm_d"};
  return cols;
}

std::string trace_csv_header() {
  std::string h;
  for (const auto& c : trace_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

void write_trace_csv(std::ostream& os, const Trace& trace, bool omit_timing) {
  os << trace_csv_header() << '\n';
  for (const auto& r : trace) {
    os << r.iter << ',' << to_string(r.phase) << ',' << to_string(r.step_kind)
       << ',' << fmt(r.step_size) << ',' << fmt(r.fval) << ',' << fmt(r.norm_g)
       << ',' << fmt(r.norm_g_eps) << ',' << fmt(r.norm_Gt) << ','
       << (r.lambda_min ? fmt(*r.lambda_min) : std::string()) << ','
       << r.counters.hvp_count << ',' << r.counters.grad_evals << ','
       << r.counters.f_evals << ',' << (omit_timing ? "0" : fmt(r.wall_ms))
       << ',' << r.ls_j << ',' << fmt(r.norm_d) << '\n';
  }
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("trace: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_csv_header())
    throw ConfigError("trace: unexpected header '" + line + "'");
  const auto& cols = trace_columns();
  Trace trace;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != cols.size())
      throw ConfigError("trace: row has " + std::to_string(c.size()) +
                        " cells, expected " + std::to_string(cols.size()));
    IterationTrace r;
    r.iter = to_int(c[0], cols[0]);
    try {
      r.phase = phase_from_string(c[1]);
      r.step_kind = step_kind_from_string(c[2]);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("trace: ") + e.what());
    }
    r.step_size = to_double(c[3], cols[3]);
    r.fval = to_double(c[4], cols[4]);
    r.norm_g = to_double(c[5], cols[5]);
    r.norm_g_eps = to_double(c[6], cols[6]);
    r.norm_Gt = to_double(c[7], cols[7]);
    if (!c[8].empty()) r.lambda_min = to_double(c[8], cols[8]);
    r.counters.hvp_count = to_int(c[9], cols[9]);
    r.counters.grad_evals = to_int(c[10], cols[10]);
    r.counters.f_evals = to_int(c[11], cols[11]);
    r.wall_ms = to_double(c[12], cols[12]);
    r.ls_j = static_cast<int>(to_int(c[13], cols[13]));
    r.norm_d = to_double(c[14], cols[14]);
    trace.push_back(r);
  }
  return trace;
}

void write_trace_file(const std::string& path, const Trace& trace,
                      bool omit_timing) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  write_trace_csv(os, trace, omit_timing);
  if (!os) throw ConfigError("write failed: " + path);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  return read_trace_csv(is);
}

std::string config_to_json(const SolverConfig& c) {
  nlohmann::ordered_json j;
  j["eps_g"] = c.eps_g;
  j["eps_h"] = c.eps_h ? nlohmann::ordered_json(*c.eps_h) : nlohmann::ordered_json();
  j["beta"] = c.beta;
  j["eta_bar"] = c.eta_bar;
  j["eta_nc"] = c.eta_nc;
  j["eta_sol"] = c.eta_sol;
  j["theta_nc"] = c.theta_nc;
  j["theta_sol"] = c.theta_sol;
  j["zeta"] = c.zeta;
  j["delta"] = c.delta;
  j["tau_hat"] = c.tau_hat;
  j["tau_convex"] = c.tau_convex;
  j["sigma"] = c.sigma;
  j["max_iters"] = c.max_iters;
  j["ls_max_backtracks"] = c.ls_max_backtracks;
  j["sign_threshold"] = c.sign_threshold;
  j["rng_seed"] = c.rng_seed;
  j["zero_tol"] = c.zero_tol;
  j["meo_power_iters"] = c.meo_power_iters;
  j["meo_dense_max_dim"] = c.meo_dense_max_dim;
  j["prox_warm_start"] = c.prox_warm_start;
  j["record_trace"] = c.record_trace;
  j["record_iterates"] = c.record_iterates;
  return j.dump(2);
}

SolverConfig config_from_json(const std::string& text, const SolverConfig& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  SolverConfig c = base;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "eps_g") c.eps_g = v.get<double>();
      else if (k == "eps_h") {
        if (v.is_null()) c.eps_h.reset();
        else c.eps_h = v.get<double>();
      }
      else if (k == "beta") c.beta = v.get<double>();
      else if (k == "eta_bar") c.eta_bar = v.get<double>();
      else if (k == "eta_nc") c.eta_nc = v.get<double>();
      else if (k == "eta_sol") c.eta_sol = v.get<double>();
      else if (k == "theta_nc") c.theta_nc = v.get<double>();
      else if (k == "theta_sol") c.theta_sol = v.get<double>();
      else if (k == "zeta") c.zeta = v.get<double>();
      else if (k == "delta") c.delta = v.get<double>();
      else if (k == "tau_hat") c.tau_hat = v.get<double>();
      else if (k == "tau_convex") c.tau_convex = v.get<double>();
      else if (k == "sigma") c.sigma = v.get<double>();
      else if (k == "max_iters") c.max_iters = v.get<std::int64_t>();
      else if (k == "ls_max_backtracks") c.ls_max_backtracks = v.get<int>();
      else if (k == "sign_threshold") c.sign_threshold = v.get<double>();
      else if (k == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
      else if (k == "zero_tol") c.zero_tol = v.get<double>();
      else if (k == "meo_power_iters") c.meo_power_iters = v.get<int>();
      else if (k == "meo_dense_max_dim") c.meo_dense_max_dim = v.get<int>();
      else if (k == "prox_warm_start") c.prox_warm_start = v.get<bool>();
      else if (k == "record_trace") c.record_trace = v.get<bool>();
      else if (k == "record_iterates") c.record_iterates = v.get<bool>();
      else throw ConfigError("config: unknown key '" + k + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: bad value for '" + k + "': " + e.what());
    }
  }
  return c;
}

TraceValidation validate_trace(const Trace& trace, const SolverConfig& cfg) {
  TraceValidation out;
  auto fail = [&](std::int64_t iter, const std::string& msg) {
    out.ok = false;
    out.failures.push_back("iter " + std::to_string(iter) + ": " + msg);
  };
  if (trace.empty()) {
    fail(0, "empty trace");
    return out;
  }
  const double eps_h = cfg.eps_h_value();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const IterationTrace& r = trace[i];
    if (r.iter != trace.front().iter + static_cast<std::int64_t>(i))
      fail(r.iter, "row indices are not consecutive");
    const bool last = i + 1 == trace.size();
    if (r.step_kind == StepKind::Terminated) {
      if (!last) fail(r.iter, "Terminated row before the end of the trace");
      continue;
    }
    if (last) {
      fail(r.iter, "trace does not end with a Terminated row");
      continue;
    }
    const double next = trace[i + 1].fval;
    double rhs = 0.0, expected_step = 0.0;
    switch (r.step_kind) {
      case StepKind::ProxG:
        expected_step = std::pow(cfg.beta, r.ls_j);
        rhs = prox_decrease_rhs(r.fval, cfg.eta_bar, r.step_size, r.norm_Gt);
        break;
      case StepKind::MeoNc:
        expected_step = std::pow(cfg.theta_nc, r.ls_j);
        rhs = cubic_decrease_rhs(r.fval, cfg.eta_nc, r.step_size, r.norm_d);
        break;
      case StepKind::NewtonCgSol:
      case StepKind::NewtonCgNc:
        expected_step = std::pow(cfg.theta_sol, r.ls_j);
        rhs = quadratic_decrease_rhs(r.fval, cfg.eta_sol, r.step_size, eps_h,
                                     r.norm_d);
        break;
      case StepKind::Terminated:
        break;
    }
    ++out.checked_steps;
    if (r.step_size != expected_step)
      fail(r.iter, std::string(to_string(r.step_kind)) + " step size " +
                       fmt(r.step_size) + " does not match j=" +
                       std::to_string(r.ls_j));
    if (!(next < rhs))
      fail(r.iter, std::string(to_string(r.step_kind)) +
                       " sufficient decrease violated: " + fmt(next) +
                       " >= " + fmt(rhs));
    if (!(next < r.fval)) fail(r.iter, "phi not strictly decreasing");
  }
  return out;
}

}  // namespace l1nc
