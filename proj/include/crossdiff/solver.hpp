#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "crossdiff/entropy.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

// Backward-Euler time stepping of the reduced system in entropy variables
// w_i = log(u_i / u_0). Every iterate maps back to a strictly positive state
// on the simplex, whatever the Newton step does to w.

namespace crossdiff {

enum class JacobianKind { Analytic, FiniteDifference };

struct SolverConfig {
  double tau = 1e-3;
  double final_time = 1.0;
  double newton_tol = 1e-10;
  int newton_max = 50;
  double delta_stab = 0.0;
  std::optional<double> eps_model;
  double theta = kDefaultPositivityThreshold;
  int output_every = 1;
  JacobianKind jacobian = JacobianKind::Analytic;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Dual variables, one row per cell, n columns.
using DualField = RowMatrix;

DualField dual_from_field(const Field& field);
Field field_from_dual(const DualField& w);

/// Inward shift u <- (1 - sigma) u + sigma / (n+1) applied when some density
/// is not strictly positive; identity otherwise.
Field project_inward(const Field& field, double sigma = 1e-8);

/// Backward-Euler residual in dual variables:
/// (U(W)_c - U_old,c) - (tau/dx)(G_{c+1/2} - G_{c-1/2}) + delta_stab tau W_c,
/// where G at a face is M_face (W_R - W_L)/dx, evaluated through the
/// equivalent bilinear form sum_j K_ij (uL_j uR_i - uL_i uR_j)/dx.
/// Throws NonFiniteResidual.
RowMatrix step_residual(const DualField& w, const Field& old, const InteractionMatrix& k, double tau,
                        const Grid1D& grid, double delta_stab = 0.0);

/// Per-face dual flux G (rows are faces 0..m, boundary rows zero) at primal state u.
RowMatrix dual_face_fluxes(const Field& u, const InteractionMatrix& k, const Grid1D& grid);

/// Dense Jacobian of step_residual with respect to W, flattened cell-major
/// (index c*n + a). Test and diagnostic use; the solver works with band storage.
Eigen::MatrixXd step_jacobian(const DualField& w, const InteractionMatrix& k, double tau, const Grid1D& grid,
                              double delta_stab, JacobianKind kind);

struct StepResult {
  Field field;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  double dissipation = 0.0;
};

class NewtonDiverged : public Error {
public:
  NewtonDiverged(const std::string& what, DualField best, std::vector<double> history)
      : Error(ErrorCode::NewtonDiverged, what), best_iterate(std::move(best)), residual_history(std::move(history)) {}

  DualField best_iterate;
  std::vector<double> residual_history;
};

/// One implicit step by damped Newton. The old field must be strictly
/// positive (see project_inward).
StepResult newton_advance(const Field& old, const InteractionMatrix& k, const SolverConfig& config,
                          const Grid1D& grid);

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;
};

struct RunDiagnostics {
  int steps = 0;
  int newton_iterations = 0;
  double max_mass_drift = 0.0;        // max over steps and species of |mass_i(t) - mass_i(0)|
  double max_entropy_increase = 0.0;  // max over steps of H_new - H_old (<= 0 when decreasing)
  double min_density = 0.0;
  int entropy_violations = 0;         // steps with H_new > H_old + 10 newton_tol
  bool projected_initial = false;
};

struct RunResult {
  Trajectory trajectory;
  EntropyReport report;
  RunDiagnostics diagnostics;
};

struct RunOptions {
  /// Reference for the H_rel column; defaults to the mass-conserving constant state.
  std::optional<SimplexPoint> reference;
  /// Called after every accepted step (and once for the initial state).
  std::function<void(double t, const Field&)> observer;
};

class RunAborted : public Error {
public:
  RunAborted(const std::string& what, RunResult prefix)
      : Error(ErrorCode::NewtonDiverged, what), partial(std::move(prefix)) {}
  RunResult partial;
};

/// floor(T/tau) backward-Euler steps. Regularizes K first when eps_model is
/// set. Throws RunAborted carrying the completed prefix.
RunResult run(const Field& initial, const InteractionMatrix& k, const SolverConfig& config, const Grid1D& grid,
              const RunOptions& options = {});

}  // namespace crossdiff
