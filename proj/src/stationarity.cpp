#include "l1nc/stationarity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace l1nc {

Vector soft_threshold(const Vector& z, double a) {
  if (!(a >= 0.0)) throw ContractViolation("soft-threshold level must be >= 0");
  return z.unaryExpr([a](double zi) {
    const double m = std::abs(zi) - a;
    return m > 0.0 ? std::copysign(m, zi) : 0.0;
  });
}

Vector gradient_mapping(const Vector& x, const Vector& grad, double lambda,
                        double t) {
  if (!(t > 0.0)) throw ContractViolation("gradient mapping needs t > 0");
  if (!grad.allFinite()) throw EvaluationError("gradient is not finite");
  return t * (x - soft_threshold(x - grad / t, lambda / t));
}

Vector gradient_mapping(const CompositeProblem& problem, const Vector& x,
                        double t) {
  return gradient_mapping(x, problem.oracle().gradient(x), problem.lambda(), t);
}

Vector residual_g(const Vector& x, const Vector& grad, double lambda,
                  double sign_threshold) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > sign_threshold)
      g(i) = grad(i) + lambda;
    else if (x(i) < -sign_threshold)
      g(i) = grad(i) - lambda;
    else
      g(i) = grad(i) - std::clamp(grad(i), -lambda, lambda);
  }
  return g;
}

Vector residual_g(const CompositeProblem& problem, const Vector& x,
                  double sign_threshold) {
  return residual_g(x, problem.oracle().gradient(x), problem.lambda(),
                    sign_threshold);
}

Vector residual_g_eps(const Vector& x, const Vector& grad, double lambda,
                      double eps_g) {
  if (!(eps_g > 0.0 && eps_g < 1.0))
    throw ContractViolation("eps_g must lie in (0,1)");
  const double cut = std::sqrt(eps_g);
  const double band = lambda + std::pow(eps_g, 0.75);
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > cut)
      g(i) = grad(i) + lambda;
    else if (x(i) < -cut)
      g(i) = grad(i) - lambda;
    else
      g(i) = grad(i) - std::clamp(grad(i), -band, band);
  }
  return g;
}

Vector residual_g_eps(const CompositeProblem& problem, const Vector& x,
                      double eps_g) {
  return residual_g_eps(x, problem.oracle().gradient(x), problem.lambda(),
                        eps_g);
}

double t_hat(const Vector& x, const Vector& g, double sign_threshold) {
  double t = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const bool plus = x(i) > sign_threshold && g(i) > 0.0;
    const bool minus = x(i) < -sign_threshold && g(i) < 0.0;
    if (plus || minus) t = std::max(t, g(i) / x(i));
  }
  return t;
}

double t_hat(const CompositeProblem& problem, const Vector& x,
             double sign_threshold) {
  return t_hat(x, residual_g(problem, x, sign_threshold), sign_threshold);
}

IndexPartition partition(const Vector& x, double eps_g, double sign_threshold) {
  if (!(eps_g > 0.0 && eps_g < 1.0))
    throw ContractViolation("eps_g must lie in (0,1)");
  const double cut = std::sqrt(eps_g);
  IndexPartition p;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    if (xi > sign_threshold) {
      p.i_plus.push_back(i);
      p.i_neq0.push_back(i);
    } else if (xi < -sign_threshold) {
      p.i_minus.push_back(i);
      p.i_neq0.push_back(i);
    } else {
      p.i_zero.push_back(i);
    }
    if (xi > cut) {
      p.ie_plus.push_back(i);
      p.ie_neq0.push_back(i);
    } else if (xi < -cut) {
      p.ie_minus.push_back(i);
      p.ie_neq0.push_back(i);
    } else {
      p.ie_zero.push_back(i);
    }
  }
  return p;
}

Vector scaling(const Vector& x, double eps_g) {
  const double cut = std::sqrt(eps_g);
  return x.unaryExpr([cut](double xi) { return std::abs(xi) > cut ? 1.0 : xi; });
}

Vector gather(const Vector& v, const IndexList& J) {
  Vector out(static_cast<Index>(J.size()));
  for (std::size_t k = 0; k < J.size(); ++k) out(static_cast<Index>(k)) = v(J[k]);
  return out;
}

Vector scatter(const Vector& vJ, const IndexList& J, Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t k = 0; k < J.size(); ++k) out(J[k]) = vJ(static_cast<Index>(k));
  return out;
}

SymmetricOperator restricted_scaled_operator(const SymmetricOperator& H,
                                             const IndexList& J,
                                             const Vector& s) {
  if (J.empty()) throw ContractViolation("restricted operator needs a nonempty index set");
  if (s.size() != H.dim()) throw ContractViolation("scaling vector has the wrong length");
  const Vector sJ = gather(s, J);
  const Index n = H.dim();
  return SymmetricOperator(
      static_cast<Index>(J.size()),
      [H, J, sJ, n](const Vector& v) -> Vector {
        const Vector hv = H(scatter(sJ.cwiseProduct(v), J, n));
        return sJ.cwiseProduct(gather(hv, J));
      });
}

SymmetricOperator restricted_scaled_operator(const CompositeProblem& problem,
                                             const Vector& x,
                                             const IndexList& J,
                                             const Vector& s) {
  return restricted_scaled_operator(problem.oracle().hessian_at(x), J, s);
}

SymmetricOperator restricted_operator(const SymmetricOperator& H,
                                      const IndexList& J) {
  if (J.empty()) throw ContractViolation("restricted operator needs a nonempty index set");
  const Index n = H.dim();
  return SymmetricOperator(static_cast<Index>(J.size()),
                           [H, J, n](const Vector& v) -> Vector {
                             return gather(H(scatter(v, J, n)), J);
                           });
}

Matrix restricted_scaled_dense(const Matrix& H, const IndexList& J,
                               const Vector& s) {
  const Vector sJ = gather(s, J);
  Matrix sub = H(J, J);
  return sJ.asDiagonal() * sub * sJ.asDiagonal();
}

std::pair<double, double> scaled_eigenvalue_bound(const Matrix& H_sub,
                                                  const Vector& s_sub,
                                                  const Vector& x_sub) {
  if (H_sub.rows() != H_sub.cols() || H_sub.rows() != s_sub.size() ||
      s_sub.size() != x_sub.size() || H_sub.rows() == 0)
    throw ContractViolation("dimension mismatch");
  if ((x_sub.array() == 0.0).any())
    throw ContractViolation("x_sub must have nonzero components");
  Eigen::SelfAdjointEigenSolver<Matrix> eh(H_sub, Eigen::EigenvaluesOnly);
  const Matrix shs = s_sub.asDiagonal() * H_sub * s_sub.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(shs, Eigen::EigenvaluesOnly);
  const double min_x2 = x_sub.array().square().minCoeff();
  return {eh.eigenvalues()(0), std::min(es.eigenvalues()(0), 0.0) / min_x2};
}

MeoOutcome scaled_curvature_oracle(CountedProblem& cp, const Vector& x,
                                   const IndexList& J, const Vector& s,
                                   double eps, const CurvatureOptions& opts,
                                   std::mt19937_64& rng) {
  if (J.empty()) throw ContractViolation("curvature oracle needs a nonempty index set");
  if (cp.has_dense_hessian() &&
      static_cast<Index>(J.size()) <= opts.dense_max_dim) {
    if (auto H = cp.dense_hessian(x)) {
      MeoOutcome out = meo_dense(restricted_scaled_dense(*H, J, s), eps);
      out.sigma = 0.0;
      return out;
    }
  }
  const SymmetricOperator op = restricted_scaled_operator(cp.hessian(x), J, s);
  return meo(op, eps, opts.sigma, opts.norm_hint, rng, opts.power_iters);
}

StationarityCertificate is_strong_1o(const CompositeProblem& problem,
                                     const Vector& x, double eps_g,
                                     double sign_threshold) {
  if (!(eps_g > 0.0 && eps_g < 1.0))
    throw ContractViolation("eps_g must lie in (0,1)");
  const Vector grad = problem.oracle().gradient(x);
  const Vector g = residual_g(x, grad, problem.lambda(), sign_threshold);
  StationarityCertificate c;
  c.t = std::max(1.0, t_hat(x, g, sign_threshold));
  c.residual_norm = gradient_mapping(x, grad, problem.lambda(), c.t).norm();
  c.first_order = c.residual_norm <= eps_g;
  c.holds = c.first_order;
  return c;
}

StationarityCertificate is_weak_1o(const CompositeProblem& problem,
                                   const Vector& x, double eps_g) {
  StationarityCertificate c;
  c.residual_norm = residual_g_eps(problem, x, eps_g).norm();
  c.first_order = c.residual_norm <= eps_g;
  c.holds = c.first_order;
  return c;
}

namespace {

void second_order_check(StationarityCertificate& c,
                        const CompositeProblem& problem, const Vector& x,
                        double eps_g, double eps_h,
                        const CurvatureOptions& opts, std::uint64_t seed) {
  if (!(eps_h > 0.0 && eps_h < 1.0))
    throw ContractViolation("eps_h must lie in (0,1)");
  c.second_order_checked = true;
  const IndexPartition p = partition(x, eps_g);
  if (p.i_neq0.empty()) {
    c.empty_support = true;
    c.holds = c.first_order;
    return;
  }
  OpCounters counters;
  CountedProblem cp(problem, counters);
  std::mt19937_64 rng(seed);
  const MeoOutcome o =
      scaled_curvature_oracle(cp, x, p.i_neq0, scaling(x, eps_g), eps_h, opts, rng);
  c.lambda_min_estimate = o.lambda_hat;
  c.sigma = o.sigma;
  c.exact_eigensolve = o.exact;
  const bool curvature_ok =
      o.exact ? o.lambda_hat >= -eps_h : o.kind == MeoKind::Certificate;
  c.holds = c.first_order && curvature_ok;
}

}  // namespace

StationarityCertificate is_strong_star_2o(const CompositeProblem& problem,
                                          const Vector& x, double eps_g,
                                          double eps_h,
                                          const CurvatureOptions& opts,
                                          std::uint64_t seed) {
  StationarityCertificate c = is_strong_1o(problem, x, eps_g);
  second_order_check(c, problem, x, eps_g, eps_h, opts, seed);
  return c;
}

StationarityCertificate is_weak_2o(const CompositeProblem& problem,
                                   const Vector& x, double eps_g, double eps_h,
                                   const CurvatureOptions& opts,
                                   std::uint64_t seed) {
  StationarityCertificate c = is_weak_1o(problem, x, eps_g);
  second_order_check(c, problem, x, eps_g, eps_h, opts, seed);
  return c;
}

}  // namespace l1nc
