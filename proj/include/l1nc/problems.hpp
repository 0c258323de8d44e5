#pragma once

// Built-in instances: the three-variable toy objective, Student's t
// regression on subsampled DCT measurements, and random quadratics.

#include "l1nc/core.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace l1nc {

/// Separable quartic in R^3 with a strict saddle-like point at (2,-2,0).
class ToyOracle final : public SmoothOracle {
 public:
  static constexpr double kLambda = 1e-4;

  Index dim() const override { return 3; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool has_dense_hessian() const override { return true; }
  std::optional<Matrix> dense_hessian(const Vector& x) const override;

  Vector hessian_diagonal(const Vector& x) const;
};

CompositeProblem make_toy_problem();

struct ToyKnownPoint {
  std::string label;
  std::string role;
  Vector x;
  /// Expected g(x) and the Hessian restricted to the exact-sign support.
  Vector g;
  Matrix restricted_hessian;
  IndexList support;
};

/// x0 = (2,-2,0), xbar = (1,-1,0), xstar = (3,-3,0).
std::vector<ToyKnownPoint> toy_known_points();

/// Random start used for the rate diagnostics.
Vector toy_rate_start();

/// Orthonormal DCT-II: y_k = w_k sum_j x_j cos(pi (2j+1) k / (2n)).
Vector dct2_orthonormal(const Vector& x);
/// Dense n x n orthonormal DCT-II matrix; row k is the k-th basis function.
Matrix dct2_matrix(Index n);

/// f(x) = sum_i log(1 + (Ax - b)_i^2 / nu).
class StudentTOracle final : public SmoothOracle {
 public:
  StudentTOracle(Matrix A, Vector b, double nu);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  SymmetricOperator hessian_at(const Vector& x) const override;

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double nu() const { return nu_; }

  /// Second derivative of log(1 + u^2/nu) at each residual component.
  Vector curvature_weights(const Vector& x) const;

 private:
  Matrix A_;
  Vector b_;
  double nu_;
};

struct SignalSpec {
  Index n = 256;
  /// Dynamic range in dB.
  double d_db = 20.0;
  std::uint64_t seed = 0;
};

struct StudentTInstance {
  std::shared_ptr<const StudentTOracle> oracle;
  std::shared_ptr<const CompositeProblem> problem;
  Index n = 0;
  IndexList rows;
  Vector x_true;
  Vector b;
  double nu = 1e-3;
  double lambda = 0.0;
  double d_db = 0.0;
  std::uint64_t seed = 0;
};

/// Number of nonzeros round(n/40), halves rounded away from zero.
Index signal_sparsity(Index n);

/// k-sparse signal with random signs and magnitudes 10^{d U / 20}.
Vector make_signal(Index n, double d_db, std::mt19937_64& rng);

StudentTInstance build_student_t(const SignalSpec& spec);

/// Rebuilds an instance from explicit data; lambda = 0.1 ||grad f(0)||_inf,
/// and a zero lambda is a ConfigError.
StudentTInstance student_t_from_data(Index n, IndexList rows, Vector x_true,
                                     Vector b, double nu, double d_db,
                                     std::uint64_t seed);

/// JSON fixture with rows (0-based), x_true, b, nu, lambda, d_db, seed.
std::string student_t_to_json(const StudentTInstance& inst);
StudentTInstance student_t_from_json(const std::string& text);

/// f(x) = 1/2 (x - c)' Q (x - c) with a dense Hessian.
class QuadraticOracle final : public SmoothOracle {
 public:
  QuadraticOracle(Matrix Q, Vector c);

  Index dim() const override { return Q_.rows(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool has_dense_hessian() const override { return true; }
  std::optional<Matrix> dense_hessian(const Vector&) const override {
    return Q_;
  }

  const Matrix& Q() const { return Q_; }
  const Vector& c() const { return c_; }

 private:
  Matrix Q_;
  Vector c_;
};

/// Random orthogonal eigenbasis with the given eigenvalues; c ~ N(0, I).
Matrix random_symmetric(const Vector& eigenvalues, std::mt19937_64& rng);

CompositeProblem random_l1_quadratic(const Vector& eigenvalues, double lambda,
                                     std::uint64_t seed);

struct PlantedQuadratic {
  CompositeProblem problem;
  Vector x_star;
};

/// Convex quadratic whose l1 minimizer x_star is planted: `support` entries
/// of magnitude in [0.5, 2] with random signs, and strict complementarity
/// |grad_i f(x_star)| <= lambda / 2 off the support.
PlantedQuadratic planted_l1_quadratic(const Vector& eigenvalues, double lambda,
                                      Index support, std::uint64_t seed);

}  // namespace l1nc
