#include "crossdiff/entropy.hpp"

#include <cmath>
#include <limits>

#include "crossdiff/algebra.hpp"

namespace crossdiff {

namespace {

// r log r - r + 1, accurate near r = 1.
double bregman_unit(double r) {
  if (r == 0.0) return 1.0;
  const double d = r - 1.0;
  if (std::abs(d) < 1e-2) {
    // (1+d) log(1+d) - d = sum_{k>=2} (-1)^k d^k / (k (k-1))
    double term = d * d;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / (k * (k - 1));
      term *= d;
    }
    return sum;
  }
  return r * std::log(r) - r + 1.0;
}

double cell_relative(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& ref) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) h += ref(i) * bregman_unit(u(i) / ref(i));
  return h;
}

void require_positive_reference(const Eigen::Ref<const RowMatrix>& ref) {
  if (!(ref.minCoeff() > 0.0)) throw Error(ErrorCode::ReferenceNotPositive, "reference must be strictly positive");
}

std::vector<bool> active_faces(const Field& field, const InteractionMatrix& k, double theta) {
  const int m = field.cells();
  std::vector<bool> active(static_cast<std::size_t>(m + 1), true);
  std::vector<int> a;
  for (int i = 0; i < k.species(); ++i) {
    bool full = true;
    for (int j = 0; j < k.species(); ++j) {
      if (i != j && !(k(i, j) > 0.0)) full = false;
    }
    if (full) a.push_back(i);
  }
  if (a.empty()) return active;
  std::vector<double> a_mass(static_cast<std::size_t>(m), 0.0);
  for (int c = 0; c < m; ++c) {
    for (int i : a) a_mass[static_cast<std::size_t>(c)] += field(c, i);
  }
  for (int f = 1; f < m; ++f) {
    if (a_mass[static_cast<std::size_t>(f - 1)] <= theta && a_mass[static_cast<std::size_t>(f)] <= theta) {
      active[static_cast<std::size_t>(f)] = false;
    }
  }
  return active;
}

void require_model_match(const Field& field, const InteractionMatrix& k) {
  if (field.species() != k.species()) throw Error(ErrorCode::GridMismatch, "species count differs from model");
}

}  // namespace

double lambda_density(double s) {
  if (!(s >= 0.0 && s <= 1.0 + kSimplexTolerance)) {
    throw Error(ErrorCode::OutOfRange, "lambda is defined on [0, 1], got " + std::to_string(s));
  }
  return bregman_unit(s);
}

double entropy_density(const SimplexPoint& u) {
  double h = 0.0;
  for (int i = 0; i < u.size(); ++i) h += lambda_density(u[i]);
  return h;
}

double relative_density(const SimplexPoint& u, const SimplexPoint& reference) {
  if (u.size() != reference.size()) throw Error(ErrorCode::GridMismatch, "species count differs");
  if (!reference.interior()) throw Error(ErrorCode::ReferenceNotPositive, "reference must be strictly positive");
  return cell_relative(u.values(), reference.values());
}

double grid_entropy(const Field& field, const Grid1D& grid) {
  require_same_grid(field, grid);
  double total = 0.0;
  for (int c = 0; c < field.cells(); ++c) {
    for (int i = 0; i < field.species(); ++i) total += bregman_unit(field(c, i));
  }
  return total * grid.dx();
}

double grid_relative_entropy(const Field& field, const Field& reference, const Grid1D& grid) {
  require_same_grid(field, grid);
  require_same_grid(reference, grid);
  if (field.species() != reference.species()) throw Error(ErrorCode::GridMismatch, "species count differs");
  require_positive_reference(reference.values());
  double total = 0.0;
  for (int c = 0; c < field.cells(); ++c) {
    total += cell_relative(field.values().row(c).transpose(), reference.values().row(c).transpose());
  }
  return total * grid.dx();
}

double grid_relative_entropy(const Field& field, const SimplexPoint& reference, const Grid1D& grid) {
  require_same_grid(field, grid);
  if (field.species() != reference.size()) throw Error(ErrorCode::GridMismatch, "species count differs");
  if (!reference.interior()) throw Error(ErrorCode::ReferenceNotPositive, "reference must be strictly positive");
  double total = 0.0;
  for (int c = 0; c < field.cells(); ++c) {
    total += cell_relative(field.values().row(c).transpose(), reference.values());
  }
  return total * grid.dx();
}

Eigen::VectorXd grid_mass(const Field& field, const Grid1D& grid) {
  require_same_grid(field, grid);
  return field.values().colwise().sum().transpose() * grid.dx();
}

SimplexPoint grid_average(const Field& field, const Grid1D& grid) {
  return SimplexPoint::from(grid_mass(field, grid) / grid.length());
}

double grid_dissipation(const Field& field, const Grid1D& grid, const InteractionMatrix& k, double theta) {
  require_same_grid(field, grid);
  require_model_match(field, k);
  const auto active = active_faces(field, k, theta);
  const RowMatrix root = field.values().cwiseSqrt();
  const int s = k.species();
  double total = 0.0;
  for (int f = 1; f < field.cells(); ++f) {
    if (!active[static_cast<std::size_t>(f)]) continue;
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        if (i == j || k(i, j) == 0.0) continue;
        const double mean_i = 0.5 * (root(f - 1, i) + root(f, i));
        const double mean_j = 0.5 * (root(f - 1, j) + root(f, j));
        const double t = mean_j * (root(f, i) - root(f - 1, i)) - mean_i * (root(f, j) - root(f - 1, j));
        total += 2.0 * k(i, j) * t * t;
      }
    }
  }
  return total / grid.dx();
}

double grid_dissipation_log_form(const Field& field, const Grid1D& grid, const InteractionMatrix& k, double theta) {
  require_same_grid(field, grid);
  require_model_match(field, k);
  const auto active = active_faces(field, k, theta);
  const RowMatrix& u = field.values();
  const int s = k.species();
  double total = 0.0;
  for (int f = 1; f < field.cells(); ++f) {
    if (!active[static_cast<std::size_t>(f)]) continue;
    Eigen::VectorXd bar(s), du(s);
    for (int i = 0; i < s; ++i) {
      const double r = 0.5 * (std::sqrt(u(f - 1, i)) + std::sqrt(u(f, i)));
      bar(i) = r * r;
      du(i) = u(f, i) - u(f - 1, i);
    }
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        if (i == j || k(i, j) == 0.0) continue;
        const double a = du(i) == 0.0 ? 0.0 : bar(j) * du(i) * du(i) / bar(i);
        const double b = du(j) == 0.0 ? 0.0 : bar(i) * du(j) * du(j) / bar(j);
        total += 0.5 * k(i, j) * (a + b - 2.0 * du(i) * du(j));
      }
    }
  }
  return total / grid.dx();
}

double scheme_dissipation(const Field& field, const Grid1D& grid, const InteractionMatrix& k) {
  require_same_grid(field, grid);
  require_model_match(field, k);
  const RowMatrix& u = field.values();
  const int s = k.species();
  double total = 0.0;
  for (int f = 1; f < field.cells(); ++f) {
    for (int i = 0; i < s; ++i) {
      for (int j = i + 1; j < s; ++j) {
        if (k(i, j) == 0.0) continue;
        const double p = u(f, i) * u(f - 1, j);
        const double q = u(f - 1, i) * u(f, j);
        if (p == q) continue;
        if (p <= 0.0 || q <= 0.0) return std::numeric_limits<double>::infinity();
        total += k(i, j) * (p - q) * std::log(p / q);
      }
    }
  }
  return total / grid.dx();
}

CsiszarKullbackGap csiszar_kullback_gap(const Field& field, const SimplexPoint& reference, const Grid1D& grid) {
  require_same_grid(field, grid);
  CsiszarKullbackGap out;
  double l1 = 0.0;
  for (int c = 0; c < field.cells(); ++c) {
    for (int i = 0; i < field.species(); ++i) l1 += std::abs(field(c, i) - reference[i]);
  }
  l1 *= grid.dx();
  out.lhs = l1 * l1;
  out.rhs = 2.0 * grid.length() * field.species() * grid_relative_entropy(field, reference, grid);
  return out;
}

double degenerate_fraction(const Field& field, const std::vector<int>& a_species, double theta) {
  int count = 0;
  for (int c = 0; c < field.cells(); ++c) {
    double a_mass = 0.0;
    for (int i : a_species) a_mass += field(c, i);
    if (a_mass <= theta) ++count;
  }
  return static_cast<double>(count) / field.cells();
}

}  // namespace crossdiff
