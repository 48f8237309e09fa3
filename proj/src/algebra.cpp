#include "crossdiff/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crossdiff {

namespace {

void require_interior(const SimplexPoint& u) {
  if (!u.interior()) throw Error(ErrorCode::SingularAtBoundary, "entropy Hessian needs all u_i > 0");
}

void require_interior(const ReducedPoint& r) {
  if (!r.interior()) throw Error(ErrorCode::SingularAtBoundary, "entropy Hessian needs U_i > 0 and v > 0");
}

void require_match(const InteractionMatrix& k, int species) {
  if (k.species() != species) throw Error(ErrorCode::OutOfRange, "state and model have different species counts");
}

// xi^2/u with 0/0 := 0
double weighted_square(double xi, double u) {
  if (xi == 0.0) return 0.0;
  if (u <= 0.0) return std::numeric_limits<double>::infinity();
  return xi * xi / u;
}

}  // namespace

TangentVector TangentVector::from(const Eigen::VectorXd& xi) {
  const double scale = std::max(1.0, xi.lpNorm<1>());
  if (std::abs(xi.sum()) > 1e-12 * scale) throw Error(ErrorCode::OutOfRange, "tangent vector must sum to zero");
  return TangentVector(xi);
}

TangentVector TangentVector::lift(const Eigen::VectorXd& zeta) {
  Eigen::VectorXd xi(zeta.size() + 1);
  xi(0) = -zeta.sum();
  xi.tail(zeta.size()) = zeta;
  return TangentVector(xi);
}

Eigen::MatrixXd diffusion_matrix(const InteractionMatrix& k, const SimplexPoint& u) {
  require_match(k, u.size());
  const Eigen::VectorXd& x = u.values();
  const Eigen::VectorXd ku = k.matrix() * x;
  Eigen::MatrixXd a = -(x.asDiagonal() * k.matrix());
  a.diagonal() += ku;
  return a;
}

namespace {

Eigen::MatrixXd mobility_of(const Eigen::MatrixXd& k, const Eigen::VectorXd& x) {
  const Eigen::VectorXd ku = k * x;
  const auto s = x.size();
  Eigen::MatrixXd m(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index l = 0; l < s; ++l) m(i, l) = -x(i) * k(i, l) * x(l);
    m(i, i) += x(i) * ku(i);
  }
  return m;
}

}  // namespace

Eigen::MatrixXd mobility(const InteractionMatrix& k, const SimplexPoint& u) {
  require_match(k, u.size());
  return mobility_of(k.matrix(), u.values());
}

Eigen::MatrixXd trial_dissipation_matrix(const Eigen::MatrixXd& k, const SimplexPoint& u) {
  if (k.rows() != u.size() || k.cols() != u.size()) throw Error(ErrorCode::NonSquareInput, "table does not match the state");
  const Eigen::MatrixXd h = hessian_entropy(u);
  return h * mobility_of(k, u.values()) * h;
}

Eigen::MatrixXd hessian_entropy(const SimplexPoint& u) {
  require_interior(u);
  return u.values().cwiseInverse().asDiagonal();
}

Eigen::MatrixXd dissipation_matrix(const InteractionMatrix& k, const SimplexPoint& u) {
  const Eigen::MatrixXd h = hessian_entropy(u);
  return h * mobility(k, u) * h;
}

double dissipation_form_matrix(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi) {
  const Eigen::VectorXd& x = xi.values();
  return x.dot(dissipation_matrix(k, u) * x);
}

double dissipation_form_sum(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi) {
  require_match(k, u.size());
  const Eigen::VectorXd& x = xi.values();
  double total = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    for (int j = 0; j < u.size(); ++j) {
      if (i == j || k(i, j) == 0.0) continue;
      // u_i u_j |xi_i/u_i - xi_j/u_j|^2 expanded so that vanishing densities
      // with vanishing directions stay finite.
      const double t = u[j] * weighted_square(x(i), u[i]) + u[i] * weighted_square(x(j), u[j]) - 2.0 * x(i) * x(j);
      total += k(i, j) * t;
    }
  }
  return 0.5 * total;
}

CoercivityBounds coercivity_bounds(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi) {
  require_interior(u);
  const Eigen::VectorXd& x = xi.values();
  const double weighted = (x.array().square() / u.values().array()).sum();
  CoercivityBounds out;
  out.lhs = dissipation_form_sum(k, u, xi);
  for (int a = 0; a < u.size(); ++a) {
    out.bound_pd += kappa_alpha(k, a) * (x(a) * x(a) / u[a] + u[a] * weighted);
  }
  out.bound_ff = kappa(k) * weighted;
  return out;
}

SimplexPoint lift(const ReducedPoint& reduced) {
  Eigen::VectorXd u(reduced.size() + 1);
  u(0) = reduced.vacancy();
  u.tail(reduced.size()) = reduced.values();
  return SimplexPoint::from(u);
}

ReducedPoint project(const SimplexPoint& u) {
  return ReducedPoint::with_vacancy(u.values().tail(u.size() - 1), u[0]);
}

Eigen::MatrixXd reduced_hessian(const ReducedPoint& reduced) {
  require_interior(reduced);
  const int n = reduced.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(n, n, 1.0 / reduced.vacancy());
  h.diagonal() += reduced.values().cwiseInverse();
  return h;
}

Eigen::MatrixXd reduced_diffusion(const InteractionMatrix& k, const ReducedPoint& reduced) {
  require_match(k, reduced.size() + 1);
  const int n = reduced.size();
  const Eigen::VectorXd& x = reduced.values();
  const double v = reduced.vacancy();
  Eigen::MatrixXd a(n, n);
  for (int i = 1; i <= n; ++i) {
    double diag = k(i, 0) * v;
    for (int l = 1; l <= n; ++l) diag += k(i, l) * x(l - 1);
    for (int j = 1; j <= n; ++j) {
      a(i - 1, j - 1) = (i == j ? diag : 0.0) - (k(i, j) - k(i, 0)) * x(i - 1);
    }
  }
  return a;
}

Eigen::MatrixXd reduced_mobility(const InteractionMatrix& k, const ReducedPoint& reduced) {
  const Eigen::MatrixXd m = mobility(k, lift(reduced));
  const int n = reduced.size();
  return m.bottomRightCorner(n, n);
}

Eigen::MatrixXd reduced_dissipation_matrix(const InteractionMatrix& k, const ReducedPoint& reduced) {
  const Eigen::MatrixXd h = reduced_hessian(reduced);
  return h * reduced_mobility(k, reduced) * h;
}

ReducedCoercivity reduced_coercivity(const InteractionMatrix& k, const ReducedPoint& reduced,
                                     const Eigen::VectorXd& zeta) {
  if (zeta.size() != reduced.size()) throw Error(ErrorCode::OutOfRange, "direction has wrong length");
  ReducedCoercivity out;
  out.lhs = zeta.dot(reduced_dissipation_matrix(k, reduced) * zeta);
  const double s = zeta.sum();
  out.bound = kappa(k) * (s * s + (zeta.array().square() / reduced.values().array()).sum());
  return out;
}

ReducedPoint dual_to_primal(const Eigen::VectorXd& w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i))) throw Error(ErrorCode::OutOfRange, "dual variable is not finite");
  }
  const double shift = std::max(0.0, w.size() > 0 ? w.maxCoeff() : 0.0);
  const Eigen::VectorXd e = (w.array() - shift).exp().matrix();
  const double vac = std::exp(-shift);
  const double denom = vac + e.sum();
  return ReducedPoint::with_vacancy(e / denom, vac / denom);
}

Eigen::VectorXd primal_to_dual(const ReducedPoint& reduced) {
  require_interior(reduced);
  return (reduced.values().array().log() - std::log(reduced.vacancy())).matrix();
}

Eigen::MatrixXd dual_jacobian(const SimplexPoint& u) {
  const int n = u.size() - 1;
  const Eigen::VectorXd reduced = u.values().tail(n);
  Eigen::MatrixXd j(n + 1, n);
  j.row(0) = -u[0] * reduced.transpose();
  j.bottomRows(n) = -reduced * reduced.transpose();
  j.bottomRows(n).diagonal() += reduced;
  return j;
}

double log_mean(double p, double q) {
  if (p <= 0.0 || q <= 0.0) return 0.0;
  const double d = (p - q) / (p + q);
  if (d == 0.0) return p;
  return 0.5 * (p + q) * d / std::atanh(d);
}

double face_pair_weight(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int i, int j) {
  return log_mean(right(i) * left(j), left(i) * right(j));
}

Eigen::MatrixXd face_mobility(const InteractionMatrix& k, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  const int s = k.species();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i == j) continue;
      const double c = k(i, j) * face_pair_weight(left, right, i, j);
      full(i, j) = -c;
      full(i, i) += c;
    }
  }
  return full.bottomRightCorner(s - 1, s - 1);
}

}  // namespace crossdiff
