#include "crossdiff/grid.hpp"

#include <cmath>
#include <sstream>

namespace crossdiff {

Grid1D::Grid1D(double length, int cells) : length_(length), cells_(cells) {
  if (!(length > 0.0) || !std::isfinite(length)) throw Error(ErrorCode::InvalidGrid, "domain length must be positive");
  if (cells < 2) throw Error(ErrorCode::InvalidGrid, "need at least two cells");
}

Field Field::from(const RowMatrix& values) {
  if (values.cols() < 2) throw Error(ErrorCode::NotOnSimplex, "need at least two species");
  RowMatrix u = values;
  for (Eigen::Index c = 0; c < u.rows(); ++c) {
    try {
      u.row(c) = SimplexPoint::from(u.row(c).transpose()).values().transpose();
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "cell " << c << ": " << e.what();
      throw Error(ErrorCode::NotOnSimplex, msg.str());
    }
  }
  return Field(std::move(u));
}

Field Field::constant(int cells, const SimplexPoint& u) {
  RowMatrix values(cells, u.size());
  for (int c = 0; c < cells; ++c) values.row(c) = u.values().transpose();
  return Field(std::move(values));
}

Field field_from_trusted(RowMatrix values) { return Field(std::move(values)); }

void require_same_grid(const Field& field, const Grid1D& grid) {
  if (field.cells() != grid.cells()) {
    throw Error(ErrorCode::GridMismatch, "field has " + std::to_string(field.cells()) + " cells, grid has " +
                                             std::to_string(grid.cells()));
  }
}

Field init_field(const Grid1D& grid, int species, const Profile& profile) {
  RowMatrix values(grid.cells(), species);
  for (int c = 0; c < grid.cells(); ++c) {
    const double x = grid.center(c);
    const Eigen::VectorXd u = profile(x);
    if (u.size() != species) throw Error(ErrorCode::NegativeProfile, "profile returned wrong number of species");
    for (int i = 0; i < species; ++i) {
      if (!std::isfinite(u(i)) || u(i) < 0.0) {
        std::ostringstream msg;
        msg << "species " << i << " is " << u(i) << " at x = " << x;
        throw Error(ErrorCode::NegativeProfile, msg.str());
      }
    }
    const double sum = u.sum();
    if (!(sum > 0.0)) {
      std::ostringstream msg;
      msg << "profile sums to " << sum << " at x = " << x;
      throw Error(ErrorCode::DegenerateProfile, msg.str());
    }
    values.row(c) = (u / sum).transpose();
  }
  return field_from_trusted(std::move(values));
}

FaceFluxes assemble_fluxes(const InteractionMatrix& k, const Field& field, const Grid1D& grid) {
  require_same_grid(field, grid);
  if (field.species() != k.species()) throw Error(ErrorCode::GridMismatch, "species count differs from model");
  const int m = grid.cells();
  const int s = k.species();
  FaceFluxes out{RowMatrix::Zero(m + 1, s)};
  const RowMatrix& u = field.values();
  for (int f = 1; f < m; ++f) {
    for (int i = 0; i < s; ++i) {
      double flux = 0.0;
      for (int j = 0; j < s; ++j) {
        if (j == i || k(i, j) == 0.0) continue;
        const double mean_i = 0.5 * (u(f - 1, i) + u(f, i));
        const double mean_j = 0.5 * (u(f - 1, j) + u(f, j));
        const double diff_i = u(f, i) - u(f - 1, i);
        const double diff_j = u(f, j) - u(f - 1, j);
        flux += k(i, j) * (mean_j * diff_i - mean_i * diff_j);
      }
      out.values(f, i) = flux / grid.dx();
    }
  }
  return out;
}

RowMatrix apply_divergence(const FaceFluxes& fluxes, const Grid1D& grid) {
  const int m = grid.cells();
  if (fluxes.values.rows() != m + 1) throw Error(ErrorCode::GridMismatch, "flux table does not match grid");
  RowMatrix rate(m, fluxes.values.cols());
  for (int c = 0; c < m; ++c) rate.row(c) = (fluxes.values.row(c + 1) - fluxes.values.row(c)) / grid.dx();
  return rate;
}

}  // namespace crossdiff
