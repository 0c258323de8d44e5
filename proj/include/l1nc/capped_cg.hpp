#pragma once

// Capped conjugate gradient for (H + tau_bar ||g||^delta I) d = -g. Returns an
// approximate solution or a direction along which the regularized operator
// has curvature below eps.

#include "l1nc/core.hpp"

namespace l1nc {

enum class DirectionType { SOL, NC };

std::string_view to_string(DirectionType t);

struct CappedCgOptions {
  double eps = 0.0;
  double zeta = 0.5;
  double delta = 1.0;
  double tau_bar = 0.0;
  /// Initial operator-norm bound; grows on first touch when 0.
  double M_init = 0.0;
};

struct CappedCgOutcome {
  Vector d;
  DirectionType type = DirectionType::SOL;
  int iterations = 0;
  double final_M = 0.0;
  /// (H + shift I) d + g, formed from tracked products; SOL outcomes only.
  Vector residual;
  /// H d tracked through the recurrences (no extra operator applications).
  Vector Hd;
  /// The shift tau_bar ||g||^delta.
  double shift = 0.0;
  int operator_applications = 0;
};

CappedCgOutcome capped_cg(const SymmetricOperator& H, const Vector& g,
                          const CappedCgOptions& opts);

}  // namespace l1nc
