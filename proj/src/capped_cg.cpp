#include "l1nc/capped_cg.hpp"

#include <cmath>
#include <vector>

namespace l1nc {

std::string_view to_string(DirectionType t) {
  return t == DirectionType::SOL ? "SOL" : "NC";
}

namespace {

struct Params {
  double kappa = 0.0, zeta_hat = 0.0, tau = 0.0, T = 0.0;

  void update(double M, double shift, double eps, double zeta) {
    kappa = (M + shift) / eps;
    zeta_hat = zeta / (3.0 * kappa);
    const double sk = std::sqrt(kappa);
    tau = sk / (sk + 1.0);
    const double gap = 1.0 - std::sqrt(tau);
    T = 4.0 * std::pow(kappa, 4) / (gap * gap);
  }
};

void check_finite(const Vector& v) {
  if (!v.allFinite()) throw EvaluationError("non-finite value inside capped CG");
}

}  // namespace

CappedCgOutcome capped_cg(const SymmetricOperator& H, const Vector& g,
                          const CappedCgOptions& opts) {
  const Index m = g.size();
  if (H.dim() != m) throw ContractViolation("operator and right-hand side disagree in size");
  if (!(opts.eps > 0.0)) throw ContractViolation("capped CG needs eps > 0");
  if (!(opts.zeta > 0.0 && opts.zeta < 1.0)) throw ContractViolation("capped CG needs zeta in (0,1)");
  if (!(opts.tau_bar >= 0.0) || !(opts.M_init >= 0.0))
    throw ContractViolation("capped CG needs tau_bar >= 0 and M >= 0");
  check_finite(g);
  const double gnorm = g.norm();
  if (!(gnorm > 0.0)) throw ContractViolation("capped CG needs a nonzero right-hand side");

  CappedCgOutcome out;
  const double eps = opts.eps;
  const double shift = opts.tau_bar * std::pow(gnorm, opts.delta);
  out.shift = shift;
  double M = opts.M_init;
  Params prm;
  prm.update(M, shift, eps, opts.zeta);

  auto apply = [&](const Vector& v) {
    ++out.operator_applications;
    Vector w = H(v);
    check_finite(w);
    return w;
  };
  auto finish = [&](Vector d, Vector Hd, DirectionType type, int iters) {
    out.type = type;
    out.iterations = iters;
    out.final_M = M;
    if (type == DirectionType::SOL) out.residual = Hd + shift * d + g;
    out.d = std::move(d);
    out.Hd = std::move(Hd);
    return out;
  };
  auto grow = [&](const Vector& Hv, const Vector& v) {
    const double nv = v.norm();
    if (Hv.norm() > M * nv) {
      M = Hv.norm() / nv;
      prm.update(M, shift, eps, opts.zeta);
    }
  };

  Vector y = Vector::Zero(m), Hy = Vector::Zero(m);
  Vector r = g;
  Vector p = -g;
  Vector Hp = apply(p);

  if (p.dot(Hp + shift * p) < eps * p.squaredNorm())
    return finish(p, Hp, DirectionType::NC, 0);
  grow(Hp, p);

  Vector Hr = -Hp;
  const double r0norm = gnorm;
  std::vector<Vector> ys{y}, Hys{Hy};
  const int cap = 10 * static_cast<int>(m) + 20;

  for (int j = 0;;) {
    double rr = r.squaredNorm();
    Vector Hbp = Hp + shift * p;
    const double alpha = rr / p.dot(Hbp);
    y += alpha * p;
    Hy += alpha * Hp;
    r += alpha * Hbp;
    const double beta = r.squaredNorm() / rr;
    Vector p_next = -r + beta * p;
    Vector Hp_next = apply(p_next);
    Hr = beta * Hp - Hp_next;
    p = std::move(p_next);
    Hp = std::move(Hp_next);
    ++j;
    check_finite(y);
    check_finite(r);
    check_finite(p);
    ys.push_back(y);
    Hys.push_back(Hy);

    if (p.squaredNorm() > 0.0) grow(Hp, p);
    if (y.squaredNorm() > 0.0) grow(Hy, y);
    if (r.squaredNorm() > 0.0) grow(Hr, r);

    const double rnorm = r.norm();
    if (y.dot(Hy + shift * y) < eps * y.squaredNorm())
      return finish(y, Hy, DirectionType::NC, j);
    if (rnorm <= prm.zeta_hat * r0norm)
      return finish(y, Hy, DirectionType::SOL, j);
    if (p.dot(Hp + shift * p) < eps * p.squaredNorm())
      return finish(p, Hp, DirectionType::NC, j);
    if (rnorm > std::sqrt(prm.T) * std::pow(prm.tau, 0.5 * j) * r0norm) {
      rr = r.squaredNorm();
      const double a = rr / p.dot(Hp + shift * p);
      const Vector y_next = y + a * p;
      const Vector Hy_next = Hy + a * Hp;
      for (int i = 0; i < j; ++i) {
        Vector z = y_next - ys[i];
        const double zz = z.squaredNorm();
        if (zz == 0.0) continue;
        Vector Hz = Hy_next - Hys[i];
        if (z.dot(Hz + shift * z) < eps * zz)
          return finish(std::move(z), std::move(Hz), DirectionType::NC, j);
      }
    }
    if (j > cap) throw InternalError("capped CG exceeded its iteration cap");
  }
}

}  // namespace l1nc
