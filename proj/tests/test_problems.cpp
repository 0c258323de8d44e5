#include "l1nc/capped_cg.hpp"
#include "l1nc/meo.hpp"
#include "l1nc/problems.hpp"
#include "l1nc/stationarity.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace l1nc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Orthonormal DCT-II straight from its defining sum.
Vector dct_by_definition(const Vector& x) {
  const Index n = x.size();
  Vector y(n);
  for (Index k = 0; k < n; ++k) {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      s += x(j) * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
    y(k) = (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n)) * s;
  }
  return y;
}

}  // namespace

TEST(Toy, KnownValues) {
  const CompositeProblem toy = make_toy_problem();
  const auto pts = toy_known_points();
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].x, vec({2, -2, 0}));
  EXPECT_EQ(pts[1].x, vec({1, -1, 0}));
  EXPECT_EQ(pts[2].x, vec({3, -3, 0}));
  const double s = 1e-6 / std::sqrt(3.0);
  for (const auto& p : pts) {
    const Vector g = residual_g(toy, p.x);
    EXPECT_NEAR(g(0), -s, 1e-12) << p.label;
    EXPECT_NEAR(g(1), s, 1e-12) << p.label;
    EXPECT_NEAR(g(2), 0.0, 1e-12) << p.label;
    EXPECT_LE((p.g - g).norm(), 1e-12);
  }
  const Matrix H0 = *toy.oracle().dense_hessian(pts[0].x);
  EXPECT_NEAR(H0(0, 0), -4.0, 1e-12);
  EXPECT_NEAR(H0(1, 1), -4.0, 1e-12);
  EXPECT_NEAR(H0(2, 2), 2.0, 1e-12);
  EXPECT_NEAR(H0(0, 1), 0.0, 0.0);
  EXPECT_LE((pts[0].restricted_hessian - Matrix(Vector::Constant(2, -4.0).asDiagonal())).norm(),
            1e-12);
}

TEST(Toy, HandWrittenDerivatives) {
  const CompositeProblem toy = make_toy_problem();
  const double a = 1e-4 + 1e-6 / std::sqrt(3.0), c = 1e-4 - 1e-6 / std::sqrt(3.0);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector x = l1nc::testing::random_vector(3, rng, 2.0);
    const double x1 = x(0), x2 = x(1), x3 = x(2);
    const double f = std::pow((x1 - 1) * (x1 - 3), 2) - a * x1 + std::pow((x2 + 1) * (x2 + 3), 2) +
                     a * x2 + std::pow(x3 * (x3 - 1), 2) - c * x3;
    EXPECT_NEAR(toy.oracle().value(x), f, 1e-10 * std::max(1.0, std::abs(f)));
    // d/dx (x-1)^2 (x-3)^2 = 2(x-1)(x-3)(2x-4)
    Vector g(3);
    g << 2 * (x1 - 1) * (x1 - 3) * (2 * x1 - 4) - a, 2 * (x2 + 1) * (x2 + 3) * (2 * x2 + 4) + a,
        2 * x3 * (x3 - 1) * (2 * x3 - 1) - c;
    EXPECT_LE((toy.oracle().gradient(x) - g).norm(), 1e-10 * std::max(1.0, g.norm()));
  }
}

TEST(Toy, FiniteDifferences) {
  const CompositeProblem toy = make_toy_problem();
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const OracleCheckReport r =
        check_oracle(toy.oracle(), l1nc::testing::random_vector(3, rng, 2.0), 1e-5);
    EXPECT_TRUE(r.ok);
    EXPECT_LE(r.max_gradient_error, 1e-6);
    EXPECT_LE(r.max_hvp_error, 1e-6);
  }
}

TEST(Dct, UnitVectorExample) {
  const Vector y = dct2_orthonormal(vec({1, 0, 0, 0}));
  const double w2 = std::sqrt(0.5);
  const double pi = std::numbers::pi;
  EXPECT_NEAR(y(0), 0.5, 1e-15);
  EXPECT_NEAR(y(1), w2 * std::cos(pi / 8), 1e-15);
  EXPECT_NEAR(y(2), w2 * std::cos(2 * pi / 8), 1e-15);
  EXPECT_NEAR(y(3), w2 * std::cos(3 * pi / 8), 1e-15);
}

TEST(Dct, ConstantVectorMapsToFirstBasis) {
  for (Index n : {1, 7, 64, 256}) {
    const Vector y = dct2_orthonormal(Vector::Ones(n) / std::sqrt(double(n)));
    EXPECT_NEAR(y(0), 1.0, 1e-12);
    EXPECT_LE(y.tail(n - 1).norm(), 1e-12);
  }
}

TEST(Dct, MatchesDefinitionAndPreservesNorm) {
  std::mt19937_64 rng(3);
  for (Index n : {2, 5, 32, 256}) {
    const Vector x = l1nc::testing::random_vector(n, rng);
    const Vector y = dct2_orthonormal(x);
    EXPECT_LE((y - dct_by_definition(x)).norm(), 1e-12 * std::max(1.0, x.norm()));
    EXPECT_NEAR(y.norm(), x.norm(), 1e-12 * std::max(1.0, x.norm()));
    const Matrix D = dct2_matrix(n);
    EXPECT_LE((D.transpose() * D - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((D * x - y).norm(), 1e-12 * std::max(1.0, x.norm()));
  }
}

TEST(StudentT, InstanceShape) {
  for (Index n : {256, 512, 1024}) {
    for (double d : {20.0, 80.0}) {
      SignalSpec spec;
      spec.n = n;
      spec.d_db = d;
      spec.seed = 17;
      const StudentTInstance inst = build_student_t(spec);
      const Matrix& A = inst.oracle->A();
      EXPECT_EQ(A.rows(), n / 8);
      EXPECT_EQ(A.cols(), n);
      EXPECT_LE((A * A.transpose() - Matrix::Identity(n / 8, n / 8)).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(std::set<Index>(inst.rows.begin(), inst.rows.end()).size(), inst.rows.size());
      const Matrix D = dct2_matrix(n);
      for (std::size_t i = 0; i < inst.rows.size(); ++i)
        EXPECT_LE((A.row(static_cast<Index>(i)) - D.row(inst.rows[i])).norm(), 1e-14);
      Index nnz = 0;
      for (Index i = 0; i < n; ++i) {
        const double m = std::abs(inst.x_true(i));
        if (m == 0.0) continue;
        ++nnz;
        EXPECT_GE(m, 1.0);
        EXPECT_LE(m, std::pow(10.0, d / 20.0));
      }
      EXPECT_EQ(nnz, signal_sparsity(n));
      EXPECT_DOUBLE_EQ(inst.nu, 1e-3);
      EXPECT_NEAR(inst.lambda, 0.1 * inst.oracle->gradient(Vector::Zero(n)).cwiseAbs().maxCoeff(),
                  1e-15 * inst.lambda);
      EXPECT_GT(inst.lambda, 0.0);
    }
  }
  EXPECT_EQ(signal_sparsity(256), 6);
  EXPECT_EQ(signal_sparsity(512), 13);
  EXPECT_EQ(signal_sparsity(1024), 26);
  EXPECT_EQ(signal_sparsity(20), 1);
}

TEST(StudentT, DerivativesMatchFiniteDifferencesAndFormula) {
  SignalSpec spec;
  spec.seed = 4;
  const StudentTInstance inst = build_student_t(spec);
  const OracleCheckReport r0 = check_oracle(*inst.oracle, Vector::Zero(256), 1e-5);
  EXPECT_TRUE(r0.ok);
  EXPECT_LE(r0.max_gradient_error, 1e-5);
  EXPECT_LE(r0.max_hvp_error, 1e-5);

  std::mt19937_64 rng(5);
  const Matrix& A = inst.oracle->A();
  const double nu = inst.nu;
  bool saw_negative = false;
  for (int t = 0; t < 5; ++t) {
    const Vector x = inst.x_true + l1nc::testing::random_vector(256, rng, 0.01);
    const Vector u = A * x - inst.b;
    Vector w(u.size());
    for (Index i = 0; i < u.size(); ++i) {
      w(i) = 2.0 * (nu - u(i) * u(i)) / std::pow(nu + u(i) * u(i), 2);
      saw_negative = saw_negative || w(i) < 0;
    }
    const Vector v = l1nc::testing::random_vector(256, rng);
    const Vector ref = A.transpose() * w.cwiseProduct(A * v);
    EXPECT_LE((inst.oracle->hess_vec(x, v) - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
    Vector gref(u.size());
    for (Index i = 0; i < u.size(); ++i) gref(i) = 2.0 * u(i) / (nu + u(i) * u(i));
    EXPECT_LE((inst.oracle->gradient(x) - A.transpose() * gref).norm(), 1e-10 * std::max(1.0, gref.norm()));
    const SymmetricOperator H = inst.oracle->hessian_at(x);
    EXPECT_LE((H.apply(v) - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
  }
  EXPECT_TRUE(saw_negative);
}

TEST(StudentT, DeterministicPerSeed) {
  SignalSpec spec;
  spec.seed = 99;
  const StudentTInstance a = build_student_t(spec);
  const StudentTInstance b = build_student_t(spec);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.x_true, b.x_true);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.lambda, b.lambda);
  spec.seed = 100;
  EXPECT_NE(build_student_t(spec).b, a.b);
}

TEST(StudentT, JsonRoundTrip) {
  SignalSpec spec;
  spec.seed = 8;
  const StudentTInstance a = build_student_t(spec);
  const StudentTInstance b = student_t_from_json(student_t_to_json(a));
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.x_true, b.x_true);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.nu, b.nu);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.seed, b.seed);
  const Vector x = Vector::LinSpaced(256, -1.0, 1.0);
  EXPECT_EQ(a.problem->phi(x), b.problem->phi(x));
}

TEST(StudentT, ZeroDataIsConfigError) {
  IndexList rows(32);
  for (Index i = 0; i < 32; ++i) rows[static_cast<std::size_t>(i)] = i;
  EXPECT_THROW(student_t_from_data(256, rows, Vector::Zero(256), Vector::Zero(32), 1e-3, 20.0, 0),
               ConfigError);
}

TEST(RandomQuadratic, ScalarSoftThresholdMinimizer) {
  const CompositeProblem p(
      std::make_shared<QuadraticOracle>(Matrix::Identity(1, 1), vec({2})), 1.0);
  EXPECT_NEAR(residual_g(p, vec({1}))(0), 0.0, 1e-15);
  EXPECT_NE(residual_g(p, vec({1.01}))(0), 0.0);
}

TEST(RandomQuadratic, SpectrumAndPlantedNegativeCurvature) {
  Vector eig(6);
  eig << -2.0, 0.5, 1.0, 2.0, 3.0, 4.0;
  const CompositeProblem p = random_l1_quadratic(eig, 0.1, 12);
  const Matrix Q = *p.oracle().dense_hessian(Vector::Zero(6));
  Vector got = Eigen::SelfAdjointEigenSolver<Matrix>(Q).eigenvalues();
  EXPECT_LE((got - eig).norm(), 1e-12);
  EXPECT_LE((Q - Q.transpose()).norm(), 1e-14);

  const MeoOutcome m = meo_dense(Q, 0.1);
  EXPECT_EQ(m.kind, MeoKind::NegativeCurvature);
  std::mt19937_64 rng(0);
  const MeoOutcome ml = meo(SymmetricOperator::from_matrix(Q), 0.1, 0.05, std::nullopt, rng);
  EXPECT_EQ(ml.kind, MeoKind::NegativeCurvature);

  CappedCgOptions o;
  o.eps = 0.1;
  o.zeta = 0.5;
  o.tau_bar = 0.1;
  const Vector g = p.oracle().gradient(Vector::Zero(6));
  EXPECT_EQ(capped_cg(SymmetricOperator::from_matrix(Q), g, o).type, DirectionType::NC);

  EXPECT_THROW(random_l1_quadratic(Vector::Ones(65), 0.1, 1), ConfigError);
  EXPECT_EQ(random_l1_quadratic(Vector::Ones(4), 0.1, 5).oracle().dense_hessian(Vector::Zero(4))
                ->isApprox(Matrix::Identity(4, 4), 1e-12),
            true);
}

TEST(RandomQuadratic, DeterministicPerSeed) {
  const Vector eig = Vector::LinSpaced(5, 1.0, 5.0);
  const CompositeProblem a = random_l1_quadratic(eig, 0.1, 3);
  const CompositeProblem b = random_l1_quadratic(eig, 0.1, 3);
  const Vector x = Vector::LinSpaced(5, -1.0, 2.0);
  EXPECT_EQ(a.phi(x), b.phi(x));
  EXPECT_EQ(a.oracle().gradient(x), b.oracle().gradient(x));
}

TEST(PlantedQuadratic, MinimizerSatisfiesStrictComplementarity) {
  std::mt19937_64 seeds(6);
  for (int t = 0; t < 20; ++t) {
    const Vector eig = Vector::LinSpaced(30, 0.0, 2.0).unaryExpr([](double e) {
      return std::pow(10.0, e);
    });
    const PlantedQuadratic pq = planted_l1_quadratic(eig, 0.3, 10, seeds());
    const Vector grad = pq.problem.oracle().gradient(pq.x_star);
    EXPECT_LE(residual_g(pq.problem, pq.x_star).norm(), 1e-10);
    Index nnz = 0;
    for (Index i = 0; i < 30; ++i) {
      if (pq.x_star(i) != 0.0) {
        ++nnz;
        EXPECT_GE(std::abs(pq.x_star(i)), 0.5);
        EXPECT_LE(std::abs(pq.x_star(i)), 2.0);
      } else {
        EXPECT_LE(std::abs(grad(i)), 0.15 + 1e-10);
      }
    }
    EXPECT_EQ(nnz, 10);
  }
  EXPECT_THROW(planted_l1_quadratic(vec({1, -1}), 0.3, 1, 0), ConfigError);
  EXPECT_THROW(planted_l1_quadratic(vec({1, 1}), 0.0, 1, 0), ConfigError);
}
