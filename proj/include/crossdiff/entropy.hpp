#pragma once

#include <Eigen/Dense>

#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

inline constexpr double kDefaultPositivityThreshold = 1e-10;

/// s log s - s + 1 on [0, 1], with lambda(0) = 1.
double lambda_density(double s);

/// h(u) = sum_i lambda(u_i)
double entropy_density(const SimplexPoint& u);
/// sum_i [u_i log(u_i / ref_i) - u_i + ref_i]; throws ReferenceNotPositive.
double relative_density(const SimplexPoint& u, const SimplexPoint& reference);

double grid_entropy(const Field& field, const Grid1D& grid);
double grid_relative_entropy(const Field& field, const Field& reference, const Grid1D& grid);
/// Relative entropy against a spatially constant state.
double grid_relative_entropy(const Field& field, const SimplexPoint& reference, const Grid1D& grid);
Eigen::VectorXd grid_mass(const Field& field, const Grid1D& grid);
/// Per-species average density |Omega|^-1 int u_i; the equilibrium that
/// conserves mass.
SimplexPoint grid_average(const Field& field, const Grid1D& grid);

/// Discrete entropy dissipation in the square-root form
/// 2 sum_ij K_ij |sqrt(u_j) d sqrt(u_i) - sqrt(u_i) d sqrt(u_j)|^2, one term
/// per interior face, using arithmetic face means of sqrt(u). Faces whose two
/// cells both carry A-mass <= theta are skipped. When no species is of type
/// A, no face is skipped.
double grid_dissipation(const Field& field, const Grid1D& grid, const InteractionMatrix& k,
                        double theta = kDefaultPositivityThreshold);

/// The same functional written as 0.5 sum_ij K_ij ubar_i ubar_j |du_i/ubar_i - du_j/ubar_j|^2
/// with ubar_i = (mean of sqrt u_i)^2. Independent evaluation path used by tests.
double grid_dissipation_log_form(const Field& field, const Grid1D& grid, const InteractionMatrix& k,
                                 double theta = kDefaultPositivityThreshold);

/// Dissipation rate of the implicit scheme at a state:
/// (1/dx) sum_faces sum_{i<j} K_ij (p_ij - q_ij) log(p_ij / q_ij), with
/// p_ij = uR_i uL_j and q_ij = uL_i uR_j. Equals sum_faces dw . G.
double scheme_dissipation(const Field& field, const Grid1D& grid, const InteractionMatrix& k);

struct CsiszarKullbackGap {
  double lhs = 0.0;  // ||u - ref||_{L1}^2
  double rhs = 0.0;  // 2 |Omega| (n+1) H_rel(u, ref)
};
CsiszarKullbackGap csiszar_kullback_gap(const Field& field, const SimplexPoint& reference, const Grid1D& grid);

/// Fraction of cells whose total A-mass is <= theta.
double degenerate_fraction(const Field& field, const std::vector<int>& a_species,
                           double theta = kDefaultPositivityThreshold);

struct EntropyRow {
  double t = 0.0;
  Eigen::VectorXd mass;
  double entropy = 0.0;
  double relative_entropy = 0.0;
  double dissipation = 0.0;
  double degenerate_fraction = 0.0;
  int newton_iterations = 0;
};

struct EntropyReport {
  int species = 0;
  std::vector<EntropyRow> rows;
};

}  // namespace crossdiff
