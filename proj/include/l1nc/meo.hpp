#pragma once

// Randomized minimum-eigenvalue oracle: certifies lambda_min(H) >= -eps or
// returns a unit vector with Rayleigh quotient <= -eps/2.

#include "l1nc/core.hpp"

#include <optional>
#include <random>

namespace l1nc {

enum class MeoKind { Certificate, NegativeCurvature };

struct MeoOutcome {
  MeoKind kind = MeoKind::Certificate;
  /// NegativeCurvature: v'Hv. Certificate: smallest Ritz value seen (or the
  /// exact minimum eigenvalue on the dense path).
  double lambda_hat = 0.0;
  Vector v;
  int lanczos_iters = 0;
  int budget = 0;
  double sigma = 0.0;
  double norm_estimate = 0.0;
  bool exact = false;
};

/// Lanczos step budget min{m, 1 + ceil(ln(2.75 m / sigma^2) sqrt(M) / (2 sqrt(eps)))};
/// sigma = 0 gives m.
int meo_budget(Index m, double eps, double sigma, double norm_bound);

/// Power-iteration estimate of ||H||. Costs `iters` applications of H.
double estimate_operator_norm(const SymmetricOperator& H, int iters,
                              std::mt19937_64& rng);

MeoOutcome meo(const SymmetricOperator& H, double eps, double sigma,
               std::optional<double> norm_hint, std::mt19937_64& rng,
               int power_iters = 20);

/// Exact variant for small dense matrices: NegativeCurvature iff
/// lambda_min(H) <= -eps/2.
MeoOutcome meo_dense(const Matrix& H, double eps);

}  // namespace l1nc
