#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

// Fixed-seed generators for the property tests.

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Flat Dirichlet sample, every entry at least `floor` before renormalizing.
inline Eigen::VectorXd simplex(Rng& rng, int size, double floor = 1e-3) {
  Eigen::VectorXd u(size);
  for (int i = 0; i < size; ++i) u(i) = -std::log(uniform(rng, 1e-12, 1.0)) + floor;
  return u / u.sum();
}

inline crossdiff::SimplexPoint point(Rng& rng, int size, double floor = 1e-3) {
  return crossdiff::SimplexPoint::from(simplex(rng, size, floor));
}

/// Random direction with zero sum.
inline Eigen::VectorXd tangent(Rng& rng, int size) {
  Eigen::VectorXd xi(size);
  for (int i = 0; i < size; ++i) xi(i) = normal(rng);
  xi.array() -= xi.mean();
  return xi;
}

/// Symmetric table with zero diagonal; each off-diagonal pair is zero with
/// probability `zero_prob`, otherwise uniform in (0, scale].
inline Eigen::MatrixXd symmetric_table(Rng& rng, int size, double zero_prob = 0.0, double scale = 3.0) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      const double value = uniform(rng, 0.0, 1.0) < zero_prob ? 0.0 : uniform(rng, 1e-3, scale);
      k(i, j) = k(j, i) = value;
    }
  }
  return k;
}

inline crossdiff::InteractionMatrix model(Rng& rng, int size, double zero_prob = 0.0) {
  return crossdiff::validate_hypotheses(symmetric_table(rng, size, zero_prob)).k;
}

/// Cells drawn independently from the simplex.
inline crossdiff::Field field(Rng& rng, int cells, int species, double floor = 1e-3) {
  crossdiff::RowMatrix values(cells, species);
  for (int c = 0; c < cells; ++c) values.row(c) = simplex(rng, species, floor).transpose();
  return crossdiff::Field::from(values);
}

/// Smooth positive field: a few random cosine modes per species.
inline crossdiff::Field smooth_field(Rng& rng, const crossdiff::Grid1D& grid, int species) {
  std::vector<Eigen::Vector3d> modes;
  for (int i = 0; i < species; ++i) modes.emplace_back(uniform(rng, -0.4, 0.4), integer(rng, 1, 3), uniform(rng, 0, 3));
  return crossdiff::init_field(grid, species, [&](double x) {
    Eigen::VectorXd u(species);
    for (int i = 0; i < species; ++i) {
      const auto& m = modes[static_cast<std::size_t>(i)];
      u(i) = 1.0 + m(0) * std::cos(m(1) * M_PI * x / grid.length() + m(2));
    }
    return u;
  });
}

}  // namespace gen
