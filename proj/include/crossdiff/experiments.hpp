#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/profile.hpp"
#include "crossdiff/solver.hpp"

// Scripted numerical studies. Each returns its fitted numbers and a list of
// verdicts, and optionally writes a directory with the config, per-run CSVs
// and summary.json.

namespace crossdiff {

struct Verdict {
  int criterion = 0;  // acceptance criterion number
  std::string check;
  bool passed = false;
  std::string detail;
};

struct StudyResult {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  std::map<std::string, double> fitted;
  nlohmann::json tables = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;

  bool passed() const;
  nlohmann::json to_json() const;
};

struct StudyOutput {
  std::optional<std::filesystem::path> dir;
  std::string config_text;  // copied verbatim to config.json when non-empty
};

/// Mass drift, per-step entropy increase and interior-state checks on a set
/// of runs. Mass is not checked when delta_stab > 0.
void add_structure_verdicts(StudyResult& result, const std::vector<RunDiagnostics>& runs, double delta_stab);

/// -slope of the least-squares line through (t, log value) over the final
/// `fraction` of the time span, ignoring values below `floor`. NaN with fewer
/// than two usable samples.
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& values, double fraction = 0.5,
                      double floor = 1e-13);

/// sqrt of the trapezoidal time integral of sum_c sum_i (a - b)^2 dx over
/// matching snapshot lists.
double space_time_l2(const std::vector<double>& times, const std::vector<Field>& a, const std::vector<Field>& b,
                     const Grid1D& grid);

/// sum_i int |u_i - ref_i| dx
double l1_distance(const Field& field, const SimplexPoint& reference, const Grid1D& grid);

struct HeatStudyParams {
  Grid1D grid{1.0, 200};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 1e-4;
    s.final_time = 0.1;
    return s;
  }();
  double base = 0.5;
  double amplitude = 0.1;
  bool refine = true;
  int refined_cells = 0;     // 0 means 2m
  double refined_tau = 0.0;  // 0 means tau/10
  double tolerance = 1e-3;
  double min_ratio = 3.0;
};

/// n = 1 against base + amplitude exp(-K pi^2 t / L^2) cos(pi x / L).
StudyResult heat_equivalence_study(const InteractionMatrix& k, const HeatStudyParams& params,
                                   const StudyOutput& output = {});

/// Exact solution of the n = 1 problem at cell centres (species 1).
Eigen::VectorXd heat_exact(const Grid1D& grid, double k, double base, double amplitude, double t);

struct BalanceStudyParams {
  Grid1D grid{1.0, 64};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 4e-3;  // the coarsest step; each halving runs again
    s.final_time = 0.1;
    return s;
  }();
  ProfileSpec initial;
  int halvings = 3;
  double min_factor = 1.5;
  double max_factor = 3.0;
};

/// Defect |H(0) - H(T) - sum_steps tau Pi| of the discrete entropy balance,
/// with Pi the scheme dissipation at the new state, for tau, tau/2, ... The
/// defect is first order in tau, so each halving should shrink it by about 2.
StudyResult dissipation_balance_study(const InteractionMatrix& k, const BalanceStudyParams& params,
                                      const StudyOutput& output = {});

struct DecayStudyParams {
  Grid1D grid{1.0, 100};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 5e-4;
    s.final_time = 0.5;
    return s;
  }();
  double amplitude = 0.01;
  double fit_fraction = 0.5;
  double rate_tolerance = 0.10;
  bool scale_check = true;
  double scale_tolerance = 0.15;
};

/// Uniform state plus amplitude cos(pi x / L) on species 1, compensated on
/// species 0. Requires full interaction.
StudyResult decay_study(const InteractionMatrix& k, const DecayStudyParams& params, const StudyOutput& output = {});

enum class StabilityReference { SameGrid, Refined };

struct StabilityStudyParams {
  Grid1D grid{1.0, 64};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 1e-3;
    s.final_time = 0.5;
    return s;
  }();
  ProfileSpec initial;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  StabilityReference reference = StabilityReference::SameGrid;
  int refine_factor = 4;
  double bump_center = 0.3;
  double bump_width = 0.1;
  double ratio_limit = 2.0;
  bool parallel = true;
};

/// Perturbs species 1 by +delta exp(-((x-c)/w)^2) and species 0 by the
/// negative of that, then tracks R(t) = H_rel(u, u_ref)(t) / H_rel(0).
/// Throws DegenerateBaseline if some H_rel(0) < 1e-14.
StudyResult stability_study(const InteractionMatrix& k, const StabilityStudyParams& params,
                            const StudyOutput& output = {});

struct EpsilonStudyParams {
  Grid1D grid{1.0, 64};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 1e-3;
    s.final_time = 0.2;
    return s;
  }();
  ProfileSpec initial;
  std::vector<double> epsilons{0.1, 0.05, 0.025, 0.0125};
  bool direct_run = true;
  bool parallel = true;
};

/// Runs identical data under max(K, eps) for each eps and compares
/// consecutive trajectories.
StudyResult epsilon_study(const InteractionMatrix& k, const EpsilonStudyParams& params,
                          const StudyOutput& output = {});

struct EquilibrationStudyParams {
  Grid1D grid{1.0, 128};
  SolverConfig solver = [] {
    SolverConfig s;
    s.tau = 1e-3;
    s.final_time = 5.0;
    s.output_every = 100;
    return s;
  }();
  ProfileSpec initial;
  double transient = 0.1;  // fraction of T excluded from the monotonicity check
  double l1_tolerance = 1e-2;
  double fit_fraction = 0.5;
};

/// Long run towards the constant state with the initial masses. Requires H3
/// and positive average A-mass (InvalidConfig otherwise).
StudyResult equilibration_study(const InteractionMatrix& k, const EquilibrationStudyParams& params,
                                const StudyOutput& output = {});

struct SimulateParams {
  Grid1D grid{1.0, 64};
  SolverConfig solver;
  ProfileSpec initial;
};

/// Plain run: every snapshot at the output cadence, the report CSV and
/// structure verdicts.
StudyResult simulate(const InteractionMatrix& k, const SimulateParams& params, const StudyOutput& output = {});

}  // namespace crossdiff
