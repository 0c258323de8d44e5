#pragma once

// CSV traces with a fixed column order, SolverConfig as JSON, and the
// post-run validator that replays every line-search inequality from a trace.

#include "l1nc/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace l1nc {

/// iter,phase,step_kind,step_size,fval,norm_g,norm_g_eps,norm_Gt,lambda_min,
/// hvp,grad,f_evals,wall_ms,ls_j,norm_d
const std::vector<std::string>& trace_columns();
std::string trace_csv_header();

/// Doubles are written with 17 significant digits so a read-back trace
/// reproduces the solver's arithmetic bit for bit. With omit_timing the
/// wall_ms column is written as 0.
void write_trace_csv(std::ostream& os, const Trace& trace,
                     bool omit_timing = false);
Trace read_trace_csv(std::istream& is);

void write_trace_file(const std::string& path, const Trace& trace,
                      bool omit_timing = false);
Trace read_trace_file(const std::string& path);

/// JSON object whose keys are the SolverConfig field names.
std::string config_to_json(const SolverConfig& cfg);
/// Overrides the fields of `base` named in the JSON object. Unknown keys and
/// ill-typed values raise ConfigError.
SolverConfig config_from_json(const std::string& text,
                              const SolverConfig& base = SolverConfig{});

struct TraceValidation {
  bool ok = true;
  std::int64_t checked_steps = 0;
  std::vector<std::string> failures;
};

/// Rebuilds each sufficient-decrease test from (fval, step_size, norm_Gt,
/// norm_d) and the config, checks that phi is strictly decreasing, that row
/// indices are consecutive, and that only the last row is Terminated.
TraceValidation validate_trace(const Trace& trace, const SolverConfig& cfg);

}  // namespace l1nc
