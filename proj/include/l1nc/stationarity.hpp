#pragma once

// Proximal map, first-order residuals, index partitions, scaling vectors,
// restricted Hessian operators and stationarity checkers.

#include "l1nc/core.hpp"
#include "l1nc/meo.hpp"

#include <optional>
#include <random>
#include <utility>

namespace l1nc {

inline constexpr double kSignThreshold = 1e-16;

struct IndexPartition {
  IndexList i_plus, i_zero, i_minus;
  IndexList ie_plus, ie_zero, ie_minus;
  IndexList i_neq0, ie_neq0;
};

/// sign(z_i) * max(|z_i| - a, 0).
Vector soft_threshold(const Vector& z, double a);

/// G_t(x) = t (x - prox_{lambda/t}(x - grad/t)).
Vector gradient_mapping(const Vector& x, const Vector& grad, double lambda,
                        double t);
Vector gradient_mapping(const CompositeProblem& problem, const Vector& x,
                        double t);

/// Minimum-norm element of grad + lambda * subdiff ||x||_1, with signs read
/// through |x_i| > sign_threshold.
Vector residual_g(const Vector& x, const Vector& grad, double lambda,
                  double sign_threshold = kSignThreshold);
Vector residual_g(const CompositeProblem& problem, const Vector& x,
                  double sign_threshold = kSignThreshold);

/// Relaxed residual on the eps-partition; zero-block band lambda + eps_g^{3/4}.
Vector residual_g_eps(const Vector& x, const Vector& grad, double lambda,
                      double eps_g);
Vector residual_g_eps(const CompositeProblem& problem, const Vector& x,
                      double eps_g);

/// Smallest t beyond which G_t(x) = g(x); 0 when no coordinate constrains it.
double t_hat(const Vector& x, const Vector& g,
             double sign_threshold = kSignThreshold);
double t_hat(const CompositeProblem& problem, const Vector& x,
             double sign_threshold = kSignThreshold);

IndexPartition partition(const Vector& x, double eps_g,
                         double sign_threshold = kSignThreshold);

/// s_i = 1 if |x_i| > sqrt(eps_g), else x_i.
Vector scaling(const Vector& x, double eps_g);

Vector gather(const Vector& v, const IndexList& J);
Vector scatter(const Vector& vJ, const IndexList& J, Index n);

/// v -> (S H S)_J v via scatter, scale, one H action, scale, gather.
SymmetricOperator restricted_scaled_operator(const SymmetricOperator& H,
                                             const IndexList& J,
                                             const Vector& s);
SymmetricOperator restricted_scaled_operator(const CompositeProblem& problem,
                                             const Vector& x,
                                             const IndexList& J,
                                             const Vector& s);
/// Unscaled principal-submatrix operator H_J.
SymmetricOperator restricted_operator(const SymmetricOperator& H,
                                      const IndexList& J);

Matrix restricted_scaled_dense(const Matrix& H, const IndexList& J,
                               const Vector& s);

/// Returns (lambda_min(H_sub), min{lambda_min(S H_sub S), 0} / min_i x_i^2);
/// the first never falls below the second when s = x.
std::pair<double, double> scaled_eigenvalue_bound(const Matrix& H_sub,
                                                  const Vector& s_sub,
                                                  const Vector& x_sub);

struct CurvatureOptions {
  double sigma = 0.01;
  std::optional<double> norm_hint;
  int power_iters = 20;
  /// Exact eigensolve when a dense Hessian exists and |J| is at most this.
  int dense_max_dim = 64;
};

/// Eigenvalue oracle on (S H S)_J at x with tolerance eps; J must be nonempty.
MeoOutcome scaled_curvature_oracle(CountedProblem& cp, const Vector& x,
                                   const IndexList& J, const Vector& s,
                                   double eps, const CurvatureOptions& opts,
                                   std::mt19937_64& rng);

struct StationarityCertificate {
  bool holds = false;
  bool first_order = false;
  /// Step size used by the strong check; 0 for weak checks.
  double t = 0.0;
  double residual_norm = 0.0;
  bool second_order_checked = false;
  bool empty_support = false;
  std::optional<double> lambda_min_estimate;
  double sigma = 0.0;
  bool exact_eigensolve = false;
};

/// ||G_t(x)|| <= eps_g at t = max(1, t_hat(x)).
StationarityCertificate is_strong_1o(const CompositeProblem& problem,
                                     const Vector& x, double eps_g,
                                     double sign_threshold = kSignThreshold);
/// ||g^eps(x)|| <= eps_g.
StationarityCertificate is_weak_1o(const CompositeProblem& problem,
                                   const Vector& x, double eps_g);
StationarityCertificate is_strong_star_2o(const CompositeProblem& problem,
                                          const Vector& x, double eps_g,
                                          double eps_h,
                                          const CurvatureOptions& opts = {},
                                          std::uint64_t seed = 0);
StationarityCertificate is_weak_2o(const CompositeProblem& problem,
                                   const Vector& x, double eps_g, double eps_h,
                                   const CurvatureOptions& opts = {},
                                   std::uint64_t seed = 0);

}  // namespace l1nc
