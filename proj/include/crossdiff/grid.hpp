#pragma once

#include <Eigen/Dense>

#include <functional>

#include "crossdiff/model.hpp"

namespace crossdiff {

/// Uniform cell-centred grid on [0, L].
class Grid1D {
public:
  Grid1D(double length, int cells);

  double length() const noexcept { return length_; }
  int cells() const noexcept { return cells_; }
  double dx() const noexcept { return length_ / cells_; }
  double center(int c) const noexcept { return (c + 0.5) * dx(); }

  bool operator==(const Grid1D&) const = default;

private:
  double length_;
  int cells_;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cell averages, one row per cell, one column per species. Every row lies
/// on the simplex.
class Field {
public:
  /// Validates and renormalizes each row (tolerance kSimplexTolerance).
  static Field from(const RowMatrix& values);
  /// Uniform state in every cell.
  static Field constant(int cells, const SimplexPoint& u);

  int cells() const noexcept { return static_cast<int>(u_.rows()); }
  int species() const noexcept { return static_cast<int>(u_.cols()); }
  const RowMatrix& values() const noexcept { return u_; }
  Eigen::VectorXd cell(int c) const { return u_.row(c).transpose(); }
  double operator()(int c, int i) const { return u_(c, i); }
  double min() const { return u_.minCoeff(); }

  bool operator==(const Field& other) const { return u_ == other.u_; }

private:
  explicit Field(RowMatrix u) : u_(std::move(u)) {}
  RowMatrix u_;

  friend Field field_from_trusted(RowMatrix values);
};

/// For solver output that is on the simplex by construction.
Field field_from_trusted(RowMatrix values);

/// Face fluxes, one row per face (m+1 faces; rows 0 and m are the no-flux
/// boundary and stay zero), one column per species.
struct FaceFluxes {
  RowMatrix values;
};

using Profile = std::function<Eigen::VectorXd(double x)>;

/// Samples the profile at cell centres and renormalizes each cell onto the
/// simplex. Throws NegativeProfile or DegenerateProfile.
Field init_field(const Grid1D& grid, int species, const Profile& profile);

/// F_i = sum_j K_ij (ubar_j du_i - ubar_i du_j) / dx at interior faces, with
/// arithmetic face means and right-minus-left differences.
FaceFluxes assemble_fluxes(const InteractionMatrix& k, const Field& field, const Grid1D& grid);

/// rate_c = (F_{c+1/2} - F_{c-1/2}) / dx, so that du/dt = rate for the
/// orientation used by assemble_fluxes.
RowMatrix apply_divergence(const FaceFluxes& fluxes, const Grid1D& grid);

void require_same_grid(const Field& field, const Grid1D& grid);

}  // namespace crossdiff
