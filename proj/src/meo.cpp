#include "l1nc/meo.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace l1nc {

namespace {

Vector random_unit(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(m);
  do {
    for (Index i = 0; i < m; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

}  // namespace

int meo_budget(Index m, double eps, double sigma, double norm_bound) {
  if (m < 1) throw ContractViolation("eigenvalue oracle needs dimension >= 1");
  if (!(eps > 0.0)) throw ContractViolation("eigenvalue oracle needs eps > 0");
  if (sigma <= 0.0) return static_cast<int>(m);
  const double c = 0.5 * std::log(2.75 * static_cast<double>(m) / (sigma * sigma)) *
                   std::sqrt(std::max(norm_bound, 0.0)) / std::sqrt(eps);
  const double n = 1.0 + std::ceil(c);
  if (!(n < static_cast<double>(m))) return static_cast<int>(m);
  return static_cast<int>(n);
}

double estimate_operator_norm(const SymmetricOperator& H, int iters,
                              std::mt19937_64& rng) {
  Vector v = random_unit(H.dim(), rng);
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector w = H(v);
    est = w.norm();
    if (est == 0.0) break;
    v = w / est;
  }
  return est;
}

MeoOutcome meo(const SymmetricOperator& H, double eps, double sigma,
               std::optional<double> norm_hint, std::mt19937_64& rng,
               int power_iters) {
  const Index m = H.dim();
  if (m < 1) throw ContractViolation("eigenvalue oracle needs dimension >= 1");
  if (!(eps > 0.0)) throw ContractViolation("eigenvalue oracle needs eps > 0");

  MeoOutcome out;
  out.sigma = sigma;
  out.norm_estimate = norm_hint ? *norm_hint
                                : estimate_operator_norm(H, power_iters, rng);
  out.budget = meo_budget(m, eps, sigma, out.norm_estimate);
  const double threshold = -0.5 * eps;

  Matrix Q(m, out.budget);
  std::vector<double> alpha, beta;
  alpha.reserve(out.budget);
  beta.reserve(out.budget);
  double ritz_min = std::numeric_limits<double>::infinity();
  double scale = 0.0;

  Q.col(0) = random_unit(m, rng);
  for (int k = 0; k < out.budget; ++k) {
    Vector w = H(Q.col(k));
    const double a = Q.col(k).dot(w);
    alpha.push_back(a);
    w -= a * Q.col(k);
    if (k > 0) w -= beta[k - 1] * Q.col(k - 1);
    // two passes of classical Gram-Schmidt against the whole basis
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = Q.leftCols(k + 1);
      w -= basis * (basis.transpose() * w);
    }
    const double b = w.norm();
    out.lanczos_iters = k + 1;
    scale = std::max({scale, std::abs(a), k > 0 ? beta[k - 1] : 0.0});

    const Index dim = k + 1;
    Vector diag = Eigen::Map<const Vector>(alpha.data(), dim);
    Vector sub = dim > 1 ? Vector(Eigen::Map<const Vector>(beta.data(), dim - 1))
                         : Vector(0);
    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()(0);
    ritz_min = std::min(ritz_min, theta);

    if (theta <= threshold) {
      Vector v = Q.leftCols(dim) * tri.eigenvectors().col(0);
      v.normalize();
      const double rq = v.dot(H(v));
      if (rq <= threshold) {
        out.kind = MeoKind::NegativeCurvature;
        out.lambda_hat = rq;
        out.v = std::move(v);
        return out;
      }
    }

    if (!std::isfinite(b)) throw EvaluationError("Lanczos recurrence diverged");
    if (b <= 1e-12 * std::max(scale, 1.0)) break;  // invariant subspace
    if (k + 1 < out.budget) {
      beta.push_back(b);
      Q.col(k + 1) = w / b;
    }
  }

  out.kind = MeoKind::Certificate;
  out.lambda_hat = ritz_min;
  return out;
}

MeoOutcome meo_dense(const Matrix& H, double eps) {
  if (H.rows() < 1 || H.rows() != H.cols())
    throw ContractViolation("dense eigenvalue oracle needs a square matrix");
  if (!(eps > 0.0)) throw ContractViolation("eigenvalue oracle needs eps > 0");
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  MeoOutcome out;
  out.exact = true;
  out.budget = static_cast<int>(H.rows());
  out.norm_estimate = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = es.eigenvalues()(0);
  out.kind = MeoKind::Certificate;
  out.lambda_hat = lmin;
  if (lmin <= -0.5 * eps) {
    Vector v = es.eigenvectors().col(0).normalized();
    const double rq = v.dot(H * v);
    if (rq <= -0.5 * eps) {
      out.kind = MeoKind::NegativeCurvature;
      out.lambda_hat = rq;
      out.v = std::move(v);
    }
  }
  return out;
}

}  // namespace l1nc
