#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "crossdiff/error.hpp"

namespace crossdiff {

/// Symmetric, non-negative pairwise exchange rates K_ij between n+1 species.
///
/// Instances are only produced by validate_hypotheses() and regularize(), so a
/// held InteractionMatrix always has a zero diagonal, finite non-negative
/// entries and K_ij == K_ji.
class InteractionMatrix {
public:
  /// Species count minus one; species are indexed 0..n.
  int n() const noexcept { return static_cast<int>(k_.rows()) - 1; }
  int species() const noexcept { return static_cast<int>(k_.rows()); }

  double operator()(int i, int j) const { return k_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return k_; }

  /// Same model with species relabelled: new index a is old index perm[a].
  InteractionMatrix permuted(const std::vector<int>& perm) const;
  InteractionMatrix scaled(double factor) const;

private:
  explicit InteractionMatrix(Eigen::MatrixXd k) : k_(std::move(k)) {}
  Eigen::MatrixXd k_;

  friend struct ValidatedModel validate_hypotheses(const Eigen::MatrixXd& raw);
  friend InteractionMatrix regularize(const InteractionMatrix& k, double eps);
};

struct HypothesisReport {
  bool symmetric = false;      // H1
  bool nonnegative = false;    // H2
  bool full_interaction = false;  // H2*
  bool has_connected_species = false;  // H3
  std::optional<int> witness;  // smallest i0 satisfying H3
};

struct ValidatedModel {
  InteractionMatrix k;
  HypothesisReport report;
};

/// Checks H1/H2 (hard) and H2*/H3 (advisory). Throws NonSquareInput,
/// NonFiniteInput, NonzeroDiagonal, AsymmetricCoefficients or
/// NegativeCoefficient.
ValidatedModel validate_hypotheses(const Eigen::MatrixXd& raw);

/// Convenience for row-major input of (n+1)^2 values.
ValidatedModel validate_hypotheses(const std::vector<double>& row_major);

HypothesisReport check_hypotheses(const InteractionMatrix& k);

struct SpeciesClassification {
  std::vector<int> a;  // coupled to every other species
  std::vector<int> b;  // coupled to no non-A species
  std::vector<int> c;
  int witness = 0;

  bool in_a(int i) const;
};

/// Partition into types A/B/C. Throws HypothesisH3Violated if A is empty.
SpeciesClassification classify_species(const InteractionMatrix& k);

/// K^eps_ij = max(K_ij, eps) off the diagonal. Requires
/// 0 < eps <= smallest positive entry.
InteractionMatrix regularize(const InteractionMatrix& k, double eps);

/// min_{i != j} K_ij
double kappa(const InteractionMatrix& k);
/// 0.5 * min_{l != alpha} K_{alpha l}
double kappa_alpha(const InteractionMatrix& k, int alpha);

inline constexpr double kSimplexTolerance = 1e-12;

/// Densities of all n+1 species; non-negative and summing to one.
class SimplexPoint {
public:
  /// Validates within kSimplexTolerance and renormalizes by the sum.
  static SimplexPoint from(const Eigen::VectorXd& u);

  const Eigen::VectorXd& values() const noexcept { return u_; }
  double operator[](int i) const { return u_(i); }
  int size() const noexcept { return static_cast<int>(u_.size()); }
  bool interior() const noexcept { return u_.minCoeff() > 0.0; }

private:
  explicit SimplexPoint(Eigen::VectorXd u) : u_(std::move(u)) {}
  Eigen::VectorXd u_;
};

/// Densities of species 1..n; the vacancy v = 1 - sum(U) is implied.
class ReducedPoint {
public:
  static ReducedPoint from(const Eigen::VectorXd& reduced);
  /// For callers that computed the vacancy more accurately than 1 - sum(U).
  static ReducedPoint with_vacancy(Eigen::VectorXd reduced, double vacancy);

  const Eigen::VectorXd& values() const noexcept { return u_; }
  double operator[](int i) const { return u_(i); }
  int size() const noexcept { return static_cast<int>(u_.size()); }
  double vacancy() const noexcept { return v_; }
  bool interior() const noexcept { return u_.minCoeff() > 0.0 && v_ > 0.0; }

private:
  ReducedPoint(Eigen::VectorXd u, double v) : u_(std::move(u)), v_(v) {}
  Eigen::VectorXd u_;
  double v_;
};

}  // namespace crossdiff
