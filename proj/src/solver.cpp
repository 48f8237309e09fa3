#include "crossdiff/solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crossdiff/algebra.hpp"

namespace crossdiff {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) fail("final time must be non-negative");
  if (!(newton_tol > 0.0)) fail("newton_tol must be positive");
  if (newton_max < 1) fail("newton_max must be at least 1");
  if (!(delta_stab >= 0.0)) fail("delta_stab must be non-negative");
  if (eps_model && !(*eps_model > 0.0)) fail("eps_model must be positive when set");
  if (!(theta >= 0.0)) fail("theta must be non-negative");
  if (output_every < 1) fail("output_every must be at least 1");
}

namespace {

// Primal states (m x (n+1)) from dual variables (m x n), with the same
// max-shift as dual_to_primal.
RowMatrix primal_rows(const DualField& w) {
  const Eigen::Index m = w.rows();
  const Eigen::Index n = w.cols();
  RowMatrix u(m, n + 1);
  for (Eigen::Index c = 0; c < m; ++c) {
    double shift = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) shift = std::max(shift, w(c, a));
    const double vac = std::exp(-shift);
    double denom = vac;
    for (Eigen::Index a = 0; a < n; ++a) {
      u(c, a + 1) = std::exp(w(c, a) - shift);
      denom += u(c, a + 1);
    }
    u(c, 0) = vac / denom;
    for (Eigen::Index a = 0; a < n; ++a) u(c, a + 1) /= denom;
  }
  return u;
}

// G_i at interior faces for i = 1..n, stored as rows 0..m (boundary rows zero).
RowMatrix face_flux_rows(const RowMatrix& u, const InteractionMatrix& k, double dx) {
  const Eigen::Index m = u.rows();
  const int s = k.species();
  RowMatrix g = RowMatrix::Zero(m + 1, s - 1);
  for (Eigen::Index f = 1; f < m; ++f) {
    for (int i = 1; i < s; ++i) {
      double flux = 0.0;
      for (int j = 0; j < s; ++j) {
        if (j == i) continue;
        const double kij = k(i, j);
        if (kij == 0.0) continue;
        flux += kij * (u(f - 1, j) * u(f, i) - u(f - 1, i) * u(f, j));
      }
      g(f, i - 1) = flux / dx;
    }
  }
  return g;
}

RowMatrix residual_rows(const DualField& w, const RowMatrix& u, const Field& old, const InteractionMatrix& k,
                        double tau, double dx, double delta_stab) {
  const Eigen::Index m = w.rows();
  const Eigen::Index n = w.cols();
  const RowMatrix g = face_flux_rows(u, k, dx);
  RowMatrix r(m, n);
  const double ratio = tau / dx;
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index a = 0; a < n; ++a) {
      r(c, a) = (u(c, a + 1) - old(static_cast<int>(c), static_cast<int>(a + 1))) -
                ratio * (g(c + 1, a) - g(c, a)) + delta_stab * tau * w(c, a);
    }
  }
  return r;
}

double max_norm(const RowMatrix& r) { return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff(); }

bool all_finite(const RowMatrix& r) { return r.allFinite(); }

// Band storage for LAPACK's general band routines, column major.
class BandMatrix {
public:
  BandMatrix(int size, int half_bandwidth)
      : size_(size), kl_(half_bandwidth), ku_(half_bandwidth), ldab_(2 * kl_ + ku_ + 1),
        ab_(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(size), 0.0),
        pivots_(static_cast<std::size_t>(size)) {}

  void add(int row, int col, double value) {
    ab_[static_cast<std::size_t>(kl_ + ku_ + row - col) + static_cast<std::size_t>(col) * ldab_] += value;
  }

  void factorize() {
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, size_, size_, kl_, ku_, ab_.data(), ldab_, pivots_.data());
    if (info != 0) throw Error(ErrorCode::NewtonDiverged, "singular Newton matrix (dgbtrf info " + std::to_string(info) + ")");
  }

  void solve(std::vector<double>& rhs) const {
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', size_, kl_, ku_, 1, ab_.data(), ldab_,
                                           pivots_.data(), rhs.data(), size_);
    if (info != 0) throw Error(ErrorCode::NewtonDiverged, "band solve failed");
  }

private:
  lapack_int size_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<lapack_int> pivots_;
};

// Calls sink(row, col, value) for every Jacobian entry, row/col flattened cell-major.
template <class Sink>
void analytic_jacobian(const RowMatrix& u, const InteractionMatrix& k, double tau, double dx, double delta_stab,
                       Sink&& sink) {
  const int m = static_cast<int>(u.rows());
  const int s = k.species();
  const int n = s - 1;
  const double ratio = tau / dx;

  std::vector<Eigen::MatrixXd> dudw(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    Eigen::MatrixXd d(s, n);
    const double u0 = u(c, 0);
    for (int b = 0; b < n; ++b) {
      d(0, b) = -u0 * u(c, b + 1);
      for (int a = 0; a < n; ++a) d(a + 1, b) = -u(c, a + 1) * u(c, b + 1);
      d(b + 1, b) += u(c, b + 1);
    }
    dudw[static_cast<std::size_t>(c)] = std::move(d);
  }

  // Own-cell time derivative and stabilization.
  for (int c = 0; c < m; ++c) {
    const Eigen::MatrixXd& d = dudw[static_cast<std::size_t>(c)];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) sink(c * n + a, c * n + b, d(a + 1, b));
      sink(c * n + a, c * n + a, delta_stab * tau);
    }
  }

  Eigen::MatrixXd d_right(n, s), d_left(n, s);
  for (int f = 1; f < m; ++f) {
    const int left = f - 1;
    const int right = f;
    // dG_i/du^R_b and dG_i/du^L_b for i = 1..n, b = 0..n (scaled by 1/dx).
    for (int i = 1; i < s; ++i) {
      double sum_left = 0.0, sum_right = 0.0;
      for (int j = 0; j < s; ++j) {
        sum_left += k(i, j) * u(left, j);
        sum_right += k(i, j) * u(right, j);
      }
      for (int b = 0; b < s; ++b) {
        d_right(i - 1, b) = ((i == b ? sum_left : 0.0) - k(i, b) * u(left, i)) / dx;
        d_left(i - 1, b) = (k(i, b) * u(right, i) - (i == b ? sum_right : 0.0)) / dx;
      }
    }
    const Eigen::MatrixXd g_wr = d_right * dudw[static_cast<std::size_t>(right)];
    const Eigen::MatrixXd g_wl = d_left * dudw[static_cast<std::size_t>(left)];
    // Face f is the right face of cell `left` (enters with -ratio) and the
    // left face of cell `right` (enters with +ratio).
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        sink(left * n + a, left * n + b, -ratio * g_wl(a, b));
        sink(left * n + a, right * n + b, -ratio * g_wr(a, b));
        sink(right * n + a, left * n + b, ratio * g_wl(a, b));
        sink(right * n + a, right * n + b, ratio * g_wr(a, b));
      }
    }
  }
}

// Forward differences with a three-colouring of the cells: residual rows of
// cell c only see cells c-1, c, c+1, so cells three apart can be perturbed
// together.
template <class Sink>
void fd_jacobian(const DualField& w, const Field& old, const InteractionMatrix& k, double tau, double dx,
                 double delta_stab, Sink&& sink) {
  const int m = static_cast<int>(w.rows());
  const int n = static_cast<int>(w.cols());
  const RowMatrix base = residual_rows(w, primal_rows(w), old, k, tau, dx, delta_stab);
  for (int colour = 0; colour < 3; ++colour) {
    for (int b = 0; b < n; ++b) {
      DualField shifted = w;
      std::vector<double> step(static_cast<std::size_t>(m), 0.0);
      for (int c = colour; c < m; c += 3) {
        step[static_cast<std::size_t>(c)] = 1e-7 * std::max(1.0, std::abs(w(c, b)));
        shifted(c, b) += step[static_cast<std::size_t>(c)];
      }
      const RowMatrix r = residual_rows(shifted, primal_rows(shifted), old, k, tau, dx, delta_stab);
      for (int c = colour; c < m; c += 3) {
        const double h = step[static_cast<std::size_t>(c)];
        for (int row_cell = std::max(0, c - 1); row_cell <= std::min(m - 1, c + 1); ++row_cell) {
          for (int a = 0; a < n; ++a) {
            sink(row_cell * n + a, c * n + b, (r(row_cell, a) - base(row_cell, a)) / h);
          }
        }
      }
    }
  }
}

std::vector<double> flatten(const RowMatrix& r) { return std::vector<double>(r.data(), r.data() + r.size()); }

}  // namespace

DualField dual_from_field(const Field& field) {
  const int m = field.cells();
  const int n = field.species() - 1;
  if (!(field.min() > 0.0)) throw Error(ErrorCode::SingularAtBoundary, "dual variables need strictly positive densities");
  DualField w(m, n);
  for (int c = 0; c < m; ++c) {
    const double log_vac = std::log(field(c, 0));
    for (int a = 0; a < n; ++a) w(c, a) = std::log(field(c, a + 1)) - log_vac;
  }
  return w;
}

Field field_from_dual(const DualField& w) {
  if (!w.allFinite()) throw Error(ErrorCode::OutOfRange, "dual variables must be finite");
  return field_from_trusted(primal_rows(w));
}

Field project_inward(const Field& field, double sigma) {
  if (field.min() > 0.0) return field;
  const RowMatrix shifted =
      ((1.0 - sigma) * field.values().array() + sigma / field.species()).matrix();
  return field_from_trusted(shifted);
}

RowMatrix step_residual(const DualField& w, const Field& old, const InteractionMatrix& k, double tau,
                        const Grid1D& grid, double delta_stab) {
  require_same_grid(old, grid);
  if (w.rows() != grid.cells() || w.cols() != k.n() || old.species() != k.species()) {
    throw Error(ErrorCode::GridMismatch, "dual field, old field and model disagree in shape");
  }
  const RowMatrix r = residual_rows(w, primal_rows(w), old, k, tau, grid.dx(), delta_stab);
  if (!all_finite(r)) throw Error(ErrorCode::NonFiniteResidual, "residual has non-finite entries");
  return r;
}

RowMatrix dual_face_fluxes(const Field& u, const InteractionMatrix& k, const Grid1D& grid) {
  require_same_grid(u, grid);
  return face_flux_rows(u.values(), k, grid.dx());
}

Eigen::MatrixXd step_jacobian(const DualField& w, const InteractionMatrix& k, double tau, const Grid1D& grid,
                              double delta_stab, JacobianKind kind) {
  const int size = static_cast<int>(w.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(size, size);
  auto sink = [&](int row, int col, double value) { j(row, col) += value; };
  if (kind == JacobianKind::Analytic) {
    analytic_jacobian(primal_rows(w), k, tau, grid.dx(), delta_stab, sink);
  } else {
    // The Jacobian does not depend on the old state.
    fd_jacobian(w, field_from_dual(w), k, tau, grid.dx(), delta_stab, sink);
  }
  return j;
}

StepResult newton_advance(const Field& old, const InteractionMatrix& k, const SolverConfig& config,
                          const Grid1D& grid) {
  require_same_grid(old, grid);
  if (old.species() != k.species()) throw Error(ErrorCode::GridMismatch, "species count differs from model");
  const int m = grid.cells();
  const int n = k.n();
  const double dx = grid.dx();
  const double tau = config.tau;

  DualField w = dual_from_field(old);
  RowMatrix u = primal_rows(w);
  RowMatrix r = residual_rows(w, u, old, k, tau, dx, config.delta_stab);
  if (!all_finite(r)) throw Error(ErrorCode::NonFiniteResidual, "initial residual is not finite");
  double norm = max_norm(r);
  std::vector<double> history{norm};
  DualField best = w;
  int iterations = 0;

  std::optional<BandMatrix> factors;
  while (norm >= config.newton_tol) {
    if (iterations >= config.newton_max) {
      std::ostringstream msg;
      msg << "no convergence after " << iterations << " iterations (residual " << norm
          << "); try a smaller tau or delta_stab > 0";
      throw NewtonDiverged(msg.str(), best, history);
    }
    factors.emplace(m * n, 2 * n - 1);
    auto sink = [&](int row, int col, double value) { factors->add(row, col, value); };
    if (config.jacobian == JacobianKind::Analytic) {
      analytic_jacobian(u, k, tau, dx, config.delta_stab, sink);
    } else {
      fd_jacobian(w, old, k, tau, dx, config.delta_stab, sink);
    }
    try {
      factors->factorize();
    } catch (const Error& e) {
      throw NewtonDiverged(e.what(), best, history);
    }
    std::vector<double> delta = flatten(r);
    factors->solve(delta);
    const Eigen::Map<const RowMatrix> step(delta.data(), m, n);

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving, lambda *= 0.5) {
      const DualField trial = w - lambda * step;
      if (!trial.allFinite()) continue;
      const RowMatrix u_trial = primal_rows(trial);
      const RowMatrix r_trial = residual_rows(trial, u_trial, old, k, tau, dx, config.delta_stab);
      if (!all_finite(r_trial)) continue;
      const double trial_norm = max_norm(r_trial);
      if (trial_norm < norm) {
        w = trial;
        u = u_trial;
        r = r_trial;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    ++iterations;
    history.push_back(norm);
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at iteration " << iterations << " (residual " << norm
          << "); try a smaller tau or delta_stab > 0";
      throw NewtonDiverged(msg.str(), best, history);
    }
    best = w;
  }

  // One chord step with the last factorization pushes the residual, and with
  // it the per-step mass defect, well below the stopping tolerance.
  if (factors && norm > 0.0) {
    std::vector<double> delta = flatten(r);
    factors->solve(delta);
    const Eigen::Map<const RowMatrix> step(delta.data(), m, n);
    const DualField trial = w - step;
    if (trial.allFinite()) {
      const RowMatrix u_trial = primal_rows(trial);
      const RowMatrix r_trial = residual_rows(trial, u_trial, old, k, tau, dx, config.delta_stab);
      if (all_finite(r_trial) && max_norm(r_trial) < norm) {
        w = trial;
        u = u_trial;
        norm = max_norm(r_trial);
      }
    }
  }

  StepResult out{field_from_trusted(u), iterations, norm, grid_entropy(old, grid), 0.0, 0.0};
  out.entropy_after = grid_entropy(out.field, grid);
  out.dissipation = scheme_dissipation(out.field, grid, k);
  return out;
}

RunResult run(const Field& initial, const InteractionMatrix& k_in, const SolverConfig& config, const Grid1D& grid,
              const RunOptions& options) {
  config.validate();
  require_same_grid(initial, grid);
  if (initial.species() != k_in.species()) throw Error(ErrorCode::GridMismatch, "species count differs from model");
  const InteractionMatrix k = config.eps_model ? regularize(k_in, *config.eps_model) : k_in;

  RunResult result;
  result.report.species = k.species();
  Field state = project_inward(initial);
  result.diagnostics.projected_initial = !(initial.min() > 0.0);
  const SimplexPoint reference = options.reference ? *options.reference : grid_average(state, grid);

  std::vector<int> a_species;
  try {
    a_species = classify_species(k).a;
  } catch (const Error&) {
    for (int i = 0; i < k.species(); ++i) a_species.push_back(i);
  }

  const Eigen::VectorXd mass0 = grid_mass(state, grid);
  auto make_row = [&](double t, const Field& f, int iters) {
    EntropyRow row;
    row.t = t;
    row.mass = grid_mass(f, grid);
    row.entropy = grid_entropy(f, grid);
    row.relative_entropy = grid_relative_entropy(f, reference, grid);
    row.dissipation = scheme_dissipation(f, grid, k);
    row.degenerate_fraction = degenerate_fraction(f, a_species, config.theta);
    row.newton_iterations = iters;
    return row;
  };

  result.report.rows.push_back(make_row(0.0, state, 0));
  result.trajectory.times.push_back(0.0);
  result.trajectory.fields.push_back(state);
  result.diagnostics.min_density = state.min();
  result.diagnostics.max_entropy_increase = -std::numeric_limits<double>::infinity();
  if (options.observer) options.observer(0.0, state);

  const long steps = static_cast<long>(std::floor(config.final_time / config.tau + 1e-9));
  for (long step = 1; step <= steps; ++step) {
    const double t = static_cast<double>(step) * config.tau;
    StepResult sr = [&] {
      try {
        return newton_advance(state, k, config, grid);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "step " << step << " (t = " << t << "): " << e.what();
        throw RunAborted(msg.str(), result);
      }
    }();
    state = std::move(sr.field);
    auto& diag = result.diagnostics;
    diag.steps = static_cast<int>(step);
    diag.newton_iterations += sr.newton_iterations;
    const double increase = sr.entropy_after - sr.entropy_before;
    diag.max_entropy_increase = std::max(diag.max_entropy_increase, increase);
    if (increase > 10.0 * config.newton_tol) ++diag.entropy_violations;
    diag.min_density = std::min(diag.min_density, state.min());
    result.report.rows.push_back(make_row(t, state, sr.newton_iterations));
    diag.max_mass_drift = std::max(diag.max_mass_drift, (result.report.rows.back().mass - mass0).cwiseAbs().maxCoeff());
    if (step % config.output_every == 0 || step == steps) {
      result.trajectory.times.push_back(t);
      result.trajectory.fields.push_back(state);
    }
    if (options.observer) options.observer(t, state);
  }
  if (steps == 0) result.diagnostics.max_entropy_increase = 0.0;
  return result;
}

}  // namespace crossdiff
