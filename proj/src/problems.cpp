#include "l1nc/problems.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace l1nc {

namespace {

const double kShift = 1e-6 / std::sqrt(3.0);
// linear coefficients of the three separable pieces
const double kA = ToyOracle::kLambda + kShift;
const double kB = ToyOracle::kLambda - kShift;

void require_dim(const Vector& x, Index n) {
  if (x.size() != n) throw ContractViolation("vector has the wrong dimension");
}

}  // namespace

double ToyOracle::value(const Vector& x) const {
  require_dim(x, 3);
  const double a = x(0), b = x(1), c = x(2);
  return (a - 1) * (a - 1) * (a - 3) * (a - 3) - kA * a +
         (b + 1) * (b + 1) * (b + 3) * (b + 3) + kA * b +
         c * c * (c - 1) * (c - 1) - kB * c;
}

Vector ToyOracle::gradient(const Vector& x) const {
  require_dim(x, 3);
  const double a = x(0), b = x(1), c = x(2);
  Vector g(3);
  g << 4 * (a - 1) * (a - 2) * (a - 3) - kA,
      4 * (b + 1) * (b + 2) * (b + 3) + kA,
      2 * c * (c - 1) * (2 * c - 1) - kB;
  return g;
}

Vector ToyOracle::hessian_diagonal(const Vector& x) const {
  require_dim(x, 3);
  const double a = x(0), b = x(1), c = x(2);
  Vector h(3);
  h << 4 * (3 * a * a - 12 * a + 11), 4 * (3 * b * b + 12 * b + 11),
      12 * c * c - 12 * c + 2;
  return h;
}

Vector ToyOracle::hess_vec(const Vector& x, const Vector& v) const {
  require_dim(v, 3);
  return hessian_diagonal(x).cwiseProduct(v);
}

std::optional<Matrix> ToyOracle::dense_hessian(const Vector& x) const {
  return Matrix(hessian_diagonal(x).asDiagonal());
}

CompositeProblem make_toy_problem() {
  return CompositeProblem(std::make_shared<ToyOracle>(), ToyOracle::kLambda);
}

std::vector<ToyKnownPoint> toy_known_points() {
  Vector g(3);
  g << -kShift, kShift, 0.0;
  auto point = [&](std::string label, std::string role, double a, double h) {
    ToyKnownPoint p;
    p.label = std::move(label);
    p.role = std::move(role);
    p.x = Vector(3);
    p.x << a, -a, 0.0;
    p.g = g;
    p.restricted_hessian = Matrix::Identity(2, 2) * h;
    p.support = {0, 1};
    return p;
  };
  return {point("x0", "first-order point with negative curvature", 2.0, -4.0),
          point("xbar", "second-order point, not optimal", 1.0, 8.0),
          point("xstar", "optimal solution", 3.0, 8.0)};
}

Vector toy_rate_start() {
  Vector x(3);
  x << -1.245334, -1.054100, -0.318778;
  return x;
}

Matrix dct2_matrix(Index n) {
  if (n < 1) throw ContractViolation("DCT length must be >= 1");
  Matrix D(n, n);
  const double w0 = std::sqrt(1.0 / static_cast<double>(n));
  const double w = std::sqrt(2.0 / static_cast<double>(n));
  const double pi = std::acos(-1.0);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      D(k, j) = (k == 0 ? w0 : w) *
                std::cos(pi * static_cast<double>((2 * j + 1) * k) /
                         (2.0 * static_cast<double>(n)));
    }
  }
  return D;
}

Vector dct2_orthonormal(const Vector& x) { return dct2_matrix(x.size()) * x; }

StudentTOracle::StudentTOracle(Matrix A, Vector b, double nu)
    : A_(std::move(A)), b_(std::move(b)), nu_(nu) {
  if (A_.rows() != b_.size()) throw ConfigError("A and b disagree in size");
  if (!(nu_ > 0.0)) throw ConfigError("nu must be positive");
}

double StudentTOracle::value(const Vector& x) const {
  require_dim(x, dim());
  const Vector u = A_ * x - b_;
  return (u.array().square() / nu_).log1p().sum();
}

Vector StudentTOracle::gradient(const Vector& x) const {
  require_dim(x, dim());
  const Vector u = A_ * x - b_;
  const Vector w = (2.0 * u.array() / (nu_ + u.array().square())).matrix();
  return A_.transpose() * w;
}

Vector StudentTOracle::curvature_weights(const Vector& x) const {
  require_dim(x, dim());
  const Eigen::ArrayXd u2 = (A_ * x - b_).array().square();
  return (2.0 * (nu_ - u2) / (nu_ + u2).square()).matrix();
}

Vector StudentTOracle::hess_vec(const Vector& x, const Vector& v) const {
  require_dim(v, dim());
  return A_.transpose() * curvature_weights(x).cwiseProduct(A_ * v);
}

SymmetricOperator StudentTOracle::hessian_at(const Vector& x) const {
  return SymmetricOperator(
      dim(), [this, w = curvature_weights(x)](const Vector& v) -> Vector {
        return A_.transpose() * w.cwiseProduct(A_ * v);
      });
}

Index signal_sparsity(Index n) {
  return static_cast<Index>(std::lround(static_cast<double>(n) / 40.0));
}

namespace {

/// First k entries of a seeded Fisher-Yates shuffle of 0..n-1, sorted.
IndexList sample_without_replacement(Index n, Index k, std::mt19937_64& rng) {
  IndexList all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(all[static_cast<std::size_t>(i)],
              all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

Vector make_signal(Index n, double d_db, std::mt19937_64& rng) {
  const Index k = signal_sparsity(n);
  const IndexList support = sample_without_replacement(n, k, rng);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x = Vector::Zero(n);
  for (Index i : support) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    x(i) = sign * std::pow(10.0, d_db * unif(rng) / 20.0);
  }
  return x;
}

StudentTInstance student_t_from_data(Index n, IndexList rows, Vector x_true,
                                     Vector b, double nu, double d_db,
                                     std::uint64_t seed) {
  if (rows.empty() || static_cast<Index>(rows.size()) != b.size())
    throw ConfigError("row set and measurement vector disagree");
  if (x_true.size() != n) throw ConfigError("x_true has the wrong length");
  for (Index r : rows)
    if (r < 0 || r >= n) throw ConfigError("row index out of range");

  const Matrix D = dct2_matrix(n);
  Matrix A(static_cast<Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    A.row(static_cast<Index>(i)) = D.row(rows[i]);

  StudentTInstance inst;
  inst.n = n;
  inst.rows = std::move(rows);
  inst.x_true = std::move(x_true);
  inst.b = b;
  inst.nu = nu;
  inst.d_db = d_db;
  inst.seed = seed;
  auto oracle = std::make_shared<StudentTOracle>(std::move(A), std::move(b), nu);
  inst.lambda = 0.1 * oracle->gradient(Vector::Zero(n)).lpNorm<Eigen::Infinity>();
  if (!(inst.lambda > 0.0))
    throw ConfigError("lambda = 0.1 ||grad f(0)||_inf must be positive");
  inst.problem = std::make_shared<CompositeProblem>(oracle, inst.lambda);
  inst.oracle = std::move(oracle);
  return inst;
}

StudentTInstance build_student_t(const SignalSpec& spec) {
  if (spec.n < 8) throw ConfigError("signal length must be >= 8");
  if (!(spec.d_db >= 0.0)) throw ConfigError("dynamic range must be >= 0");
  std::mt19937_64 rng(spec.seed);
  const Index m = spec.n / 8;
  IndexList rows = sample_without_replacement(spec.n, m, rng);
  Vector x_true = make_signal(spec.n, spec.d_db, rng);

  const Vector y = dct2_orthonormal(x_true);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(5.0);
  Vector b(m);
  for (Index i = 0; i < m; ++i) {
    const double z = normal(rng);
    const double v = chi2(rng);
    b(i) = y(rows[static_cast<std::size_t>(i)]) + 0.1 * z / std::sqrt(v / 5.0);
  }
  return student_t_from_data(spec.n, std::move(rows), std::move(x_true),
                             std::move(b), 1e-3, spec.d_db, spec.seed);
}

std::string student_t_to_json(const StudentTInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["rows"] = inst.rows;
  j["x_true"] = std::vector<double>(inst.x_true.data(),
                                    inst.x_true.data() + inst.x_true.size());
  j["b"] = std::vector<double>(inst.b.data(), inst.b.data() + inst.b.size());
  j["nu"] = inst.nu;
  j["lambda"] = inst.lambda;
  j["d_db"] = inst.d_db;
  j["seed"] = inst.seed;
  return j.dump(2);
}

StudentTInstance student_t_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance fixture: ") + e.what());
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  try {
    StudentTInstance inst = student_t_from_data(
        j.at("n").get<Index>(), j.at("rows").get<IndexList>(),
        to_vec(j.at("x_true").get<std::vector<double>>()),
        to_vec(j.at("b").get<std::vector<double>>()), j.at("nu").get<double>(),
        j.at("d_db").get<double>(), j.at("seed").get<std::uint64_t>());
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("incomplete instance fixture: ") + e.what());
  }
}

QuadraticOracle::QuadraticOracle(Matrix Q, Vector c)
    : Q_(std::move(Q)), c_(std::move(c)) {
  if (Q_.rows() != Q_.cols() || Q_.rows() != c_.size() || Q_.rows() < 1)
    throw ConfigError("quadratic data has inconsistent dimensions");
  if (!Q_.isApprox(Q_.transpose(), 1e-12)) throw ConfigError("Q must be symmetric");
}

double QuadraticOracle::value(const Vector& x) const {
  require_dim(x, dim());
  const Vector r = x - c_;
  return 0.5 * r.dot(Q_ * r);
}

Vector QuadraticOracle::gradient(const Vector& x) const {
  require_dim(x, dim());
  return Q_ * (x - c_);
}

Vector QuadraticOracle::hess_vec(const Vector&, const Vector& v) const {
  require_dim(v, dim());
  return Q_ * v;
}

Matrix random_symmetric(const Vector& eigenvalues, std::mt19937_64& rng) {
  const Index n = eigenvalues.size();
  std::normal_distribution<double> normal;
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix U = qr.householderQ();
  Matrix S = U * eigenvalues.asDiagonal() * U.transpose();
  return 0.5 * (S + S.transpose());
}

CompositeProblem random_l1_quadratic(const Vector& eigenvalues, double lambda,
                                     std::uint64_t seed) {
  if (eigenvalues.size() < 1 || eigenvalues.size() > 64)
    throw ConfigError("random quadratic dimension must lie in [1, 64]");
  std::mt19937_64 rng(seed);
  Matrix Q = random_symmetric(eigenvalues, rng);
  std::normal_distribution<double> normal;
  Vector c(eigenvalues.size());
  for (Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
  return CompositeProblem(std::make_shared<QuadraticOracle>(std::move(Q), std::move(c)),
                          lambda);
}

PlantedQuadratic planted_l1_quadratic(const Vector& eigenvalues, double lambda,
                                      Index support, std::uint64_t seed) {
  const Index n = eigenvalues.size();
  if (n < 1 || n > 64)
    throw ConfigError("random quadratic dimension must lie in [1, 64]");
  if (support < 0 || support > n) throw ConfigError("support size out of range");
  if (!(eigenvalues.minCoeff() > 0.0))
    throw ConfigError("planted quadratic needs a positive definite spectrum");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  std::mt19937_64 rng(seed);
  Matrix Q = random_symmetric(eigenvalues, rng);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> mag(0.5, 2.0), slack(-0.5, 0.5);
  std::bernoulli_distribution coin(0.5);
  Vector x_star = Vector::Zero(n), v(n);
  for (Index k = 0; k < n; ++k) {
    const Index i = idx[static_cast<std::size_t>(k)];
    if (k < support) {
      const double sgn = coin(rng) ? 1.0 : -1.0;
      x_star(i) = sgn * mag(rng);
      v(i) = -lambda * sgn;
    } else {
      v(i) = lambda * slack(rng);
    }
  }
  // grad f(x*) = Q (x* - c) = v
  Vector c = x_star - Q.ldlt().solve(v);
  PlantedQuadratic out{
      CompositeProblem(std::make_shared<QuadraticOracle>(std::move(Q), std::move(c)),
                       lambda),
      std::move(x_star)};
  return out;
}

}  // namespace l1nc
