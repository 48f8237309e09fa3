#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crossdiff/experiments.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/profile.hpp"
#include "crossdiff/solver.hpp"

// Run configuration. The file is JSON (comments allowed) with a required
// "schema": 1 key; see README for the full schema.

namespace crossdiff {

/// Study knobs; unset fields fall back to each study's defaults.
struct StudySettings {
  std::optional<double> amplitude;
  std::optional<double> base;
  std::optional<std::vector<double>> deltas;
  std::optional<StabilityReference> reference;
  std::optional<int> refine_factor;
  std::optional<double> bump_center;
  std::optional<double> bump_width;
  std::optional<double> ratio_limit;
  std::optional<std::vector<double>> epsilons;
  std::optional<bool> direct_run;
  std::optional<double> transient;
  std::optional<double> l1_tolerance;
  std::optional<double> fit_fraction;
  std::optional<double> rate_tolerance;
  std::optional<bool> scale_check;
  std::optional<double> scale_tolerance;
  std::optional<bool> refine;
  std::optional<int> refined_cells;
  std::optional<double> refined_tau;
  std::optional<double> tolerance;
  std::optional<double> min_ratio;
  std::optional<bool> parallel;
};

/// Keys present in the "solver" section, applied over a study's defaults.
struct SolverSettings {
  std::optional<double> tau;
  std::optional<double> final_time;
  std::optional<double> newton_tol;
  std::optional<int> newton_max;
  std::optional<double> delta_stab;
  std::optional<double> theta;
  std::optional<int> output_every;
  std::optional<JacobianKind> jacobian;

  SolverConfig over(SolverConfig defaults) const;
};

struct GridSettings {
  std::optional<double> length;
  std::optional<int> cells;

  Grid1D over(const Grid1D& defaults) const;
};

struct RunConfig {
  ValidatedModel model;
  std::optional<double> epsilon;  // model regularization, forwarded to the solver
  GridSettings grid;
  SolverSettings solver;
  std::optional<ProfileSpec> initial;
  std::optional<std::filesystem::path> output;
  StudySettings study;
  std::string source;  // the text that was parsed
};

/// Throws ParseError (syntax with line:col, unknown keys and wrong types with
/// the key path) or ValidationError (model hypotheses, out-of-range values).
RunConfig parse_config(const std::string& text);

/// parse_config on a file; a relative CSV path in "initial" is resolved
/// against the file's directory.
RunConfig load_config(const std::filesystem::path& path);

enum class StudyKind { Heat, Decay, Stability, Epsilon, Equilibration, Simulate };

std::optional<StudyKind> study_kind_from_name(const std::string& name);
const char* study_name(StudyKind kind);

/// Builds the study parameters from the config and runs it, writing into
/// config.output when set.
StudyResult run_configured(const RunConfig& config, StudyKind kind);

}  // namespace crossdiff
