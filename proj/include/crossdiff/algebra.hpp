#pragma once

#include <Eigen/Dense>

#include "crossdiff/model.hpp"

// Closed-form matrices of the size-exclusion system on the full simplex
// (n+1 species) and in reduced coordinates U = (u_1..u_n).

namespace crossdiff {

/// Vector orthogonal to (1,...,1); the tangent space of the simplex.
class TangentVector {
public:
  static TangentVector from(const Eigen::VectorXd& xi);
  /// Full-space image of a reduced direction: (-sum(zeta), zeta_1..zeta_n).
  static TangentVector lift(const Eigen::VectorXd& zeta);

  const Eigen::VectorXd& values() const noexcept { return xi_; }

private:
  explicit TangentVector(Eigen::VectorXd xi) : xi_(std::move(xi)) {}
  Eigen::VectorXd xi_;
};

// Full-space objects.

/// A_ij = delta_ij sum_k K_ik u_k - K_ij u_i
Eigen::MatrixXd diffusion_matrix(const InteractionMatrix& k, const SimplexPoint& u);
/// M_il = u_i (delta_il sum_k K_ik u_k - K_il u_l)
Eigen::MatrixXd mobility(const InteractionMatrix& k, const SimplexPoint& u);
/// diag(1/u_i); throws SingularAtBoundary unless u is interior.
Eigen::MatrixXd hessian_entropy(const SimplexPoint& u);
/// P = D2h M D2h, the dissipation matrix.
Eigen::MatrixXd dissipation_matrix(const InteractionMatrix& k, const SimplexPoint& u);

/// P for an arbitrary square table, including ones with negative entries
/// that validate_hypotheses rejects. For probing when P fails to be
/// semidefinite on the tangent space.
Eigen::MatrixXd trial_dissipation_matrix(const Eigen::MatrixXd& k, const SimplexPoint& u);

/// xi^T P xi by explicit matrix product. Interior u only.
double dissipation_form_matrix(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi);
/// 0.5 sum_ij K_ij u_i u_j |xi_i/u_i - xi_j/u_j|^2. Boundary u allowed: a
/// term with u_i = 0 and xi_i = 0 contributes nothing.
double dissipation_form_sum(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi);

struct CoercivityBounds {
  double lhs = 0.0;
  double bound_pd = 0.0;  // sum_a kappa^(a) (xi_a^2/u_a + u_a sum_j xi_j^2/u_j)
  double bound_ff = 0.0;  // kappa * sum_j xi_j^2/u_j
};
CoercivityBounds coercivity_bounds(const InteractionMatrix& k, const SimplexPoint& u, const TangentVector& xi);

// Reduced-coordinate objects.

SimplexPoint lift(const ReducedPoint& reduced);
ReducedPoint project(const SimplexPoint& u);

/// diag(1/U_i) + (1/v) E
Eigen::MatrixXd reduced_hessian(const ReducedPoint& reduced);
/// Explicit n x n diffusion matrix of the reduced system.
Eigen::MatrixXd reduced_diffusion(const InteractionMatrix& k, const ReducedPoint& reduced);
/// DPhi M(Psi(U)) DPhi^T, i.e. M with row and column 0 removed.
Eigen::MatrixXd reduced_mobility(const InteractionMatrix& k, const ReducedPoint& reduced);
/// D2h_hat M_hat D2h_hat
Eigen::MatrixXd reduced_dissipation_matrix(const InteractionMatrix& k, const ReducedPoint& reduced);

struct ReducedCoercivity {
  double lhs = 0.0;
  double bound = 0.0;  // kappa (|sum zeta|^2 + sum zeta_i^2/U_i)
};
ReducedCoercivity reduced_coercivity(const InteractionMatrix& k, const ReducedPoint& reduced,
                                     const Eigen::VectorXd& zeta);

// Entropy (dual) variables w_i = log(U_i / v).

ReducedPoint dual_to_primal(const Eigen::VectorXd& w);
/// Throws SingularAtBoundary unless U is interior.
Eigen::VectorXd primal_to_dual(const ReducedPoint& reduced);

/// Jacobian d(u_0..u_n)/d(w_1..w_n), an (n+1) x n matrix, at u = lift(dual_to_primal(w)).
Eigen::MatrixXd dual_jacobian(const SimplexPoint& u);

// Face objects of the finite-volume scheme.

/// (p - q) / (log p - log q), with the continuous extension at p == q.
double log_mean(double p, double q);

/// Pairwise face weight Lambda_ij = log_mean(uR_i uL_j, uL_i uR_j), a
/// consistent approximation of u_i u_j at the face.
double face_pair_weight(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int i, int j);

/// Reduced face mobility in dual variables: entry (i,l), i,l in 1..n, is
/// delta_il sum_k K_ik Lambda_ik - K_il Lambda_il. Symmetric positive
/// semidefinite, and satisfies M_face (w_R - w_L) = the primal face flux
/// sum_j K_ij (uL_j uR_i - uL_i uR_j) exactly.
Eigen::MatrixXd face_mobility(const InteractionMatrix& k, const Eigen::VectorXd& left, const Eigen::VectorXd& right);

}  // namespace crossdiff
