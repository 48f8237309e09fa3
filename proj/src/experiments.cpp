#include "crossdiff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>

#include "crossdiff/entropy.hpp"
#include "crossdiff/io.hpp"

namespace crossdiff {

namespace {

constexpr double kStructureTolerance = 1e-9;
constexpr double kBaselineFloor = 1e-14;

std::string fmt(const char* format, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string fmt(const char* format, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

nlohmann::json grid_json(const Grid1D& grid) { return {{"L", grid.length()}, {"m", grid.cells()}}; }

nlohmann::json solver_json(const SolverConfig& s) {
  nlohmann::json j = {{"tau", s.tau},
                      {"T", s.final_time},
                      {"newton_tol", s.newton_tol},
                      {"newton_max", s.newton_max},
                      {"delta_stab", s.delta_stab},
                      {"theta", s.theta},
                      {"output_every", s.output_every},
                      {"jacobian", s.jacobian == JacobianKind::Analytic ? "analytic" : "fd"}};
  j["epsilon"] = s.eps_model ? nlohmann::json(*s.eps_model) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json matrix_json(const InteractionMatrix& k) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < k.species(); ++i) {
    std::vector<double> row;
    for (int j = 0; j < k.species(); ++j) row.push_back(k(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Writes files into the study directory (when one was requested) and keeps
// the artifact list in step.
class ArtifactSink {
public:
  ArtifactSink(const StudyOutput& output, StudyResult& result) : output_(output), result_(result) {}

  bool enabled() const { return output_.dir.has_value(); }

  void text(const std::string& name, const std::string& body) {
    if (!enabled()) return;
    write_text_file(*output_.dir / name, body);
    result_.artifacts.push_back(name);
  }

  void report(const std::string& name, const EntropyReport& report) { text(name, report_csv(report)); }
  void snapshot(const std::string& name, const Field& field, const Grid1D& grid) { text(name, snapshot_csv(field, grid)); }

  void finish() {
    if (!enabled()) return;
    write_text_file(*output_.dir / "config.json",
                    output_.config_text.empty() ? result_.parameters.dump(2) + "\n" : output_.config_text);
    result_.artifacts.insert(result_.artifacts.begin(), "config.json");
    result_.artifacts.push_back("summary.json");
    write_text_file(*output_.dir / "summary.json", result_.to_json().dump(2) + "\n");
  }

private:
  const StudyOutput& output_;
  StudyResult& result_;
};

std::string indexed(const std::string& stem, std::size_t i, const char* ext = ".csv") {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return stem + "_" + buf + ext;
}

template <class F>
auto launch(bool parallel, F&& f) {
  return std::async(parallel ? std::launch::async : std::launch::deferred, std::forward<F>(f));
}

std::vector<double> column(const EntropyReport& report, double EntropyRow::*member) {
  std::vector<double> out;
  out.reserve(report.rows.size());
  for (const auto& row : report.rows) out.push_back(row.*member);
  return out;
}

SolverConfig every_step(SolverConfig s) {
  s.output_every = 1;
  return s;
}

double max_abs_diff(const RowMatrix& a, const RowMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

double space_time_l2_raw(const std::vector<double>& times, const std::vector<RowMatrix>& a,
                         const std::vector<RowMatrix>& b, const Grid1D& grid) {
  if (a.size() != times.size() || b.size() != times.size()) {
    throw Error(ErrorCode::GridMismatch, "snapshot lists differ in length");
  }
  double integral = 0.0;
  double previous = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double value = (a[k] - b[k]).squaredNorm() * grid.dx();
    if (k > 0) integral += 0.5 * (times[k] - times[k - 1]) * (value + previous);
    previous = value;
  }
  return std::sqrt(integral);
}

std::vector<RowMatrix> raw(const std::vector<Field>& fields) {
  std::vector<RowMatrix> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f.values());
  return out;
}

std::string matrix_csv(const Grid1D& grid, const RowMatrix& values) {
  std::string out = "x";
  for (Eigen::Index i = 0; i < values.cols(); ++i) out += ",u_" + std::to_string(i);
  out += '\n';
  for (int c = 0; c < grid.cells(); ++c) {
    out += format_double(grid.center(c));
    for (Eigen::Index i = 0; i < values.cols(); ++i) out += ',' + format_double(values(c, i));
    out += '\n';
  }
  return out;
}

}  // namespace

bool StudyResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

nlohmann::json StudyResult::to_json() const {
  nlohmann::json j;
  j["study"] = name;
  j["passed"] = passed();
  j["parameters"] = parameters;
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [key, value] : fitted) f[key] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
  j["fitted"] = f;
  j["tables"] = tables;
  nlohmann::json v = nlohmann::json::array();
  for (const auto& verdict : verdicts) {
    v.push_back({{"criterion", verdict.criterion},
                 {"check", verdict.check},
                 {"passed", verdict.passed},
                 {"detail", verdict.detail}});
  }
  j["verdicts"] = v;
  j["artifacts"] = artifacts;
  return j;
}

void add_structure_verdicts(StudyResult& result, const std::vector<RunDiagnostics>& runs, double delta_stab) {
  double drift = 0.0;
  double increase = -std::numeric_limits<double>::infinity();
  double min_density = std::numeric_limits<double>::infinity();
  int steps = 0;
  for (const auto& d : runs) {
    drift = std::max(drift, d.max_mass_drift);
    if (d.steps > 0) increase = std::max(increase, d.max_entropy_increase);
    min_density = std::min(min_density, d.min_density);
    steps += d.steps;
  }
  if (steps == 0) increase = 0.0;
  result.fitted["max_mass_drift"] = drift;
  result.fitted["max_entropy_increase"] = increase;
  result.fitted["min_density"] = min_density;
  if (delta_stab > 0.0) {
    result.verdicts.push_back({5, "mass drift", true, "not checked: delta_stab > 0 breaks conservation"});
  } else {
    result.verdicts.push_back({5, "mass drift <= 1e-9", drift <= kStructureTolerance, fmt("max drift %.3e", drift)});
  }
  result.verdicts.push_back({5, "per-step entropy increase <= 1e-9", increase <= kStructureTolerance,
                             fmt("max increase %.3e", increase)});
  result.verdicts.push_back({5, "states strictly interior", min_density > 0.0, fmt("min density %.3e", min_density)});
}

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& values, double fraction, double floor) {
  if (t.size() != values.size() || t.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double start = t.back() - fraction * (t.back() - t.front());
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < start - 1e-12 || !(values[i] >= floor)) continue;
    const double y = std::log(values[i]);
    n += 1;
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sxy - sx * sy) / denom;
}

double space_time_l2(const std::vector<double>& times, const std::vector<Field>& a, const std::vector<Field>& b,
                     const Grid1D& grid) {
  return space_time_l2_raw(times, raw(a), raw(b), grid);
}

double l1_distance(const Field& field, const SimplexPoint& reference, const Grid1D& grid) {
  require_same_grid(field, grid);
  if (reference.size() != field.species()) throw Error(ErrorCode::GridMismatch, "reference has wrong species count");
  double total = 0.0;
  for (int c = 0; c < field.cells(); ++c) {
    for (int i = 0; i < field.species(); ++i) total += std::abs(field(c, i) - reference[i]);
  }
  return total * grid.dx();
}

// ---------------------------------------------------------------------------

Eigen::VectorXd heat_exact(const Grid1D& grid, double k, double base, double amplitude, double t) {
  const double pi = std::numbers::pi;
  const double length = grid.length();
  const double decay = std::exp(-k * pi * pi * t / (length * length));
  Eigen::VectorXd u(grid.cells());
  for (int c = 0; c < grid.cells(); ++c) u(c) = base + amplitude * decay * std::cos(pi * grid.center(c) / length);
  return u;
}

StudyResult heat_equivalence_study(const InteractionMatrix& k, const HeatStudyParams& params,
                                   const StudyOutput& output) {
  if (k.n() != 1) throw Error(ErrorCode::InvalidConfig, "heat study needs n = 1");
  const double rate = k(0, 1);
  StudyResult result;
  result.name = "heat_equivalence";
  ArtifactSink sink(output, result);

  auto initial_for = [&](const Grid1D& g) {
    const double pi = std::numbers::pi;
    return init_field(g, 2, [&](double x) {
      const double u1 = params.base + params.amplitude * std::cos(pi * x / g.length());
      return Eigen::Vector2d(1.0 - u1, u1).eval();
    });
  };
  struct Outcome {
    double error0 = 0.0;
    double error = 0.0;
    double t = 0.0;
    RunResult run;
  };
  auto simulate_on = [&](const Grid1D& g, const SolverConfig& s) {
    Outcome out;
    const Field initial = initial_for(g);
    out.error0 = (initial.values().col(1) - heat_exact(g, rate, params.base, params.amplitude, 0.0)).cwiseAbs().maxCoeff();
    out.run = run(initial, k, s, g);
    out.t = out.run.report.rows.back().t;
    const Field& last = out.run.trajectory.fields.back();
    out.error = (last.values().col(1) - heat_exact(g, rate, params.base, params.amplitude, out.t)).cwiseAbs().maxCoeff();
    return out;
  };

  const int fine_cells = params.refined_cells > 0 ? params.refined_cells : 2 * params.grid.cells();
  const Grid1D fine_grid(params.grid.length(), fine_cells);
  SolverConfig fine_solver = params.solver;
  fine_solver.tau = params.refined_tau > 0.0 ? params.refined_tau : params.solver.tau / 10.0;
  fine_solver.output_every = std::numeric_limits<int>::max();

  result.parameters = {{"K", rate},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"base", params.base},
                       {"amplitude", params.amplitude},
                       {"refine", params.refine},
                       {"refined_grid", grid_json(fine_grid)},
                       {"refined_tau", fine_solver.tau},
                       {"tolerance", params.tolerance},
                       {"min_ratio", params.min_ratio}};

  SolverConfig coarse_solver = params.solver;
  coarse_solver.output_every = std::numeric_limits<int>::max();
  const Outcome coarse = simulate_on(params.grid, coarse_solver);
  std::vector<RunDiagnostics> diagnostics{coarse.run.diagnostics};
  result.fitted["final_time"] = coarse.t;
  result.fitted["max_error"] = coarse.error;
  result.fitted["initial_error"] = coarse.error0;
  result.verdicts.push_back({1, "initial error is zero to roundoff", coarse.error0 <= 1e-15,
                             fmt("max error at t=0: %.3e", coarse.error0)});
  result.verdicts.push_back({1, "max error <= tolerance", coarse.error <= params.tolerance,
                             fmt("max error %.3e at T = %g", coarse.error, coarse.t)});
  sink.report("report.csv", coarse.run.report);
  sink.snapshot("final.csv", coarse.run.trajectory.fields.back(), params.grid);

  if (params.refine) {
    const Outcome fine = simulate_on(fine_grid, fine_solver);
    diagnostics.push_back(fine.run.diagnostics);
    const double ratio = coarse.error / fine.error;
    result.fitted["refined_max_error"] = fine.error;
    result.fitted["error_ratio"] = ratio;
    result.verdicts.push_back({1, "refinement error ratio >= min_ratio", ratio >= params.min_ratio,
                               fmt("ratio %.3f (refined error %.3e)", ratio, fine.error)});
    sink.report("refined_report.csv", fine.run.report);
    sink.snapshot("refined_final.csv", fine.run.trajectory.fields.back(), fine_grid);
  }
  add_structure_verdicts(result, diagnostics, params.solver.delta_stab);
  sink.finish();
  return result;
}

// ---------------------------------------------------------------------------

StudyResult decay_study(const InteractionMatrix& k, const DecayStudyParams& params, const StudyOutput& output) {
  if (!check_hypotheses(k).full_interaction) {
    throw Error(ErrorCode::InvalidConfig, "decay study needs every off-diagonal K_ij > 0");
  }
  StudyResult result;
  result.name = "decay";
  ArtifactSink sink(output, result);
  const int species = k.species();
  const double length = params.grid.length();
  result.parameters = {{"K", matrix_json(k)},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"amplitude", params.amplitude},
                       {"fit_fraction", params.fit_fraction},
                       {"rate_tolerance", params.rate_tolerance},
                       {"scale_check", params.scale_check},
                       {"scale_tolerance", params.scale_tolerance}};

  const Field initial = init_field(params.grid, species, [&](double x) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(species, 1.0 / species);
    const double bump = params.amplitude * std::cos(std::numbers::pi * x / length);
    u(1) += bump;
    u(0) -= bump;
    return u;
  });
  SolverConfig solver = params.solver;
  solver.output_every = std::numeric_limits<int>::max();

  auto fitted_run = [&](const InteractionMatrix& kk) {
    RunResult r = run(initial, kk, solver, params.grid);
    const double rate = fit_decay_rate(column(r.report, &EntropyRow::t), column(r.report, &EntropyRow::relative_entropy),
                                       params.fit_fraction);
    return std::make_pair(std::move(r), rate);
  };
  auto base_future = launch(true, [&] { return fitted_run(k); });
  const InteractionMatrix doubled = k.scaled(2.0);
  auto scaled_future = launch(params.scale_check && params.amplitude != 0.0, [&] { return fitted_run(doubled); });
  auto [base, rate] = base_future.get();
  std::vector<RunDiagnostics> diagnostics{base.diagnostics};
  sink.report("report.csv", base.report);

  const auto h_rel = column(base.report, &EntropyRow::relative_entropy);
  result.fitted["rate"] = rate;
  result.fitted["initial_relative_entropy"] = h_rel.front();
  result.fitted["final_relative_entropy"] = h_rel.back();

  if (params.amplitude == 0.0) {
    const double worst = *std::max_element(h_rel.begin(), h_rel.end());
    result.verdicts.push_back({2, "zero amplitude keeps H_rel identically zero", worst <= 1e-20,
                               fmt("max H_rel %.3e", worst)});
  } else {
    int failures = 0;
    std::size_t checked = 0;
    for (std::size_t i = 1; i < h_rel.size(); ++i) {
      if (h_rel[i - 1] < 1e-13) continue;
      ++checked;
      if (!(h_rel[i] < h_rel[i - 1])) ++failures;
    }
    result.verdicts.push_back({2, "H_rel strictly decreasing at every sample", failures == 0,
                               fmt("%g of %g samples not decreasing", failures, static_cast<double>(checked))});
    result.verdicts.push_back({2, "fitted rate is finite and positive", std::isfinite(rate) && rate > 0.0,
                               fmt("rate %.6g", rate)});
    if (k.n() == 1) {
      const double expected = 2.0 * k(0, 1) * std::numbers::pi * std::numbers::pi / (length * length);
      result.fitted["expected_rate"] = expected;
      const double rel = std::abs(rate / expected - 1.0);
      result.verdicts.push_back({2, "rate within tolerance of 2 K pi^2 / L^2", rel <= params.rate_tolerance,
                                 fmt("rate %.6g vs %.6g", rate, expected)});
    }
    if (params.scale_check) {
      auto [scaled, scaled_rate] = scaled_future.get();
      diagnostics.push_back(scaled.diagnostics);
      sink.report("report_scaled.csv", scaled.report);
      result.fitted["scaled_rate"] = scaled_rate;
      result.fitted["scale_ratio"] = scaled_rate / rate;
      result.verdicts.push_back({2, "rate nondecreasing when K is doubled", scaled_rate >= rate,
                                 fmt("rate %.6g -> %.6g", rate, scaled_rate)});
      if (k.n() == 1) {
        const double ratio = scaled_rate / rate;
        result.verdicts.push_back({2, "doubling K doubles the rate", std::abs(ratio / 2.0 - 1.0) <= params.scale_tolerance,
                                   fmt("ratio %.4f", ratio)});
      }
    }
  }
  add_structure_verdicts(result, diagnostics, params.solver.delta_stab);
  sink.finish();
  return result;
}

// ---------------------------------------------------------------------------

namespace {

Field perturbed(const Field& base, const Grid1D& grid, double delta, double center, double width) {
  RowMatrix values = base.values();
  for (int c = 0; c < grid.cells(); ++c) {
    const double z = (grid.center(c) - center) / width;
    const double bump = delta * std::exp(-z * z);
    values(c, 1) += bump;
    values(c, 0) -= bump;
  }
  return Field::from(values);
}

Field cell_average(const Field& fine, int factor) {
  const int cells = fine.cells() / factor;
  RowMatrix values = RowMatrix::Zero(cells, fine.species());
  for (int c = 0; c < cells; ++c) {
    for (int f = 0; f < factor; ++f) values.row(c) += fine.values().row(c * factor + f);
    values.row(c) /= factor;
  }
  return Field::from(values);
}

struct ReferenceTrack {
  std::vector<double> times;
  std::vector<Field> fields;
  RunDiagnostics diagnostics;
};

}  // namespace

StudyResult stability_study(const InteractionMatrix& k, const StabilityStudyParams& params,
                            const StudyOutput& output) {
  if (params.deltas.empty()) throw Error(ErrorCode::InvalidConfig, "stability study needs at least one delta");
  StudyResult result;
  result.name = "stability";
  ArtifactSink sink(output, result);
  const bool refined = params.reference == StabilityReference::Refined;
  result.parameters = {{"K", matrix_json(k)},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"deltas", params.deltas},
                       {"reference", refined ? "refined" : "same-grid"},
                       {"refine_factor", params.refine_factor},
                       {"bump_center", params.bump_center},
                       {"bump_width", params.bump_width},
                       {"ratio_limit", params.ratio_limit}};

  const int species = k.species();
  const SolverConfig solver = every_step(params.solver);

  // Reference initial data and trajectory on the study grid.
  Field reference0 = make_initial(params.initial, params.grid, species);
  std::future<ReferenceTrack> reference_future;
  if (refined) {
    const int factor = params.refine_factor;
    if (factor < 1) throw Error(ErrorCode::InvalidConfig, "refine_factor must be >= 1");
    const Grid1D fine_grid(params.grid.length(), params.grid.cells() * factor);
    const Field fine0 = make_initial(params.initial, fine_grid, species);
    reference0 = cell_average(fine0, factor);
    reference_future = launch(params.parallel, [&, fine_grid, fine0, factor] {
      SolverConfig fine_solver = solver;
      fine_solver.tau = solver.tau / factor;
      fine_solver.final_time = solver.final_time;
      fine_solver.output_every = factor;
      RunResult r = run(fine0, k, fine_solver, fine_grid);
      ReferenceTrack track;
      track.diagnostics = r.diagnostics;
      track.times = r.trajectory.times;
      for (const auto& f : r.trajectory.fields) track.fields.push_back(cell_average(f, factor));
      return track;
    });
  } else {
    reference_future = launch(params.parallel, [&] {
      RunResult r = run(reference0, k, solver, params.grid);
      return ReferenceTrack{r.trajectory.times, r.trajectory.fields, r.diagnostics};
    });
  }
  // Uniqueness shadow: a second, independent run from the same data.
  auto twin_a = launch(params.parallel, [&] { return run(reference0, k, solver, params.grid); });
  auto twin_b = launch(params.parallel, [&] { return run(reference0, k, solver, params.grid); });

  std::vector<Field> starts;
  std::vector<double> baselines;
  for (double delta : params.deltas) {
    starts.push_back(perturbed(reference0, params.grid, delta, params.bump_center, params.bump_width));
    baselines.push_back(grid_relative_entropy(starts.back(), reference0, params.grid));
  }
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    if (!(baselines[i] >= kBaselineFloor)) {
      // Drain the running futures before unwinding.
      reference_future.wait();
      twin_a.wait();
      twin_b.wait();
      throw Error(ErrorCode::DegenerateBaseline, "H_rel(0) = " + fmt("%.3e", baselines[i]) + " for delta = " +
                                                     fmt("%g", params.deltas[i]));
    }
  }
  std::vector<std::future<RunResult>> perturbed_runs;
  for (const auto& start : starts) {
    perturbed_runs.push_back(launch(params.parallel, [&, start] { return run(start, k, solver, params.grid); }));
  }

  const ReferenceTrack reference = reference_future.get();
  std::vector<RunDiagnostics> diagnostics{reference.diagnostics};
  nlohmann::json table = nlohmann::json::array();
  std::vector<double> growth;
  for (std::size_t d = 0; d < starts.size(); ++d) {
    const RunResult r = perturbed_runs[d].get();
    diagnostics.push_back(r.diagnostics);
    if (r.trajectory.fields.size() != reference.fields.size()) {
      throw Error(ErrorCode::GridMismatch, "reference and perturbed runs sampled at different times");
    }
    double c_fit = -std::numeric_limits<double>::infinity();
    std::string csv = "t,H_rel,R\n";
    for (std::size_t s = 0; s < reference.fields.size(); ++s) {
      const double t = r.trajectory.times[s];
      const double h = grid_relative_entropy(r.trajectory.fields[s], reference.fields[s], params.grid);
      const double ratio = h / baselines[d];
      csv += format_double(t) + ',' + format_double(h) + ',' + format_double(ratio) + '\n';
      if (t > 0.0) c_fit = std::max(c_fit, std::log(ratio) / t);
    }
    growth.push_back(c_fit);
    table.push_back({{"delta", params.deltas[d]}, {"H_rel0", baselines[d]}, {"C_fit", c_fit}});
    sink.text(indexed("delta", d), csv);
  }
  result.tables["runs"] = table;

  bool finite = std::all_of(growth.begin(), growth.end(), [](double c) { return std::isfinite(c); });
  result.verdicts.push_back({7, "C_fit finite for every delta", finite, finite ? "" : "non-finite growth constant"});
  if (finite) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double c : growth) {
      lo = std::min(lo, std::abs(c));
      hi = std::max(hi, std::abs(c));
    }
    const double spread = hi / lo;
    const double c_max = *std::max_element(growth.begin(), growth.end());
    const double c_min = *std::min_element(growth.begin(), growth.end());
    const bool one_sign = c_min > 0.0 || c_max < 0.0;
    result.fitted["C_fit_max"] = c_max;
    result.fitted["C_fit_min"] = c_min;
    result.fitted["C_fit_spread"] = spread;
    result.verdicts.push_back({7, "C_fit of one sign and max|C_fit| / min|C_fit| <= ratio limit",
                               one_sign && spread <= params.ratio_limit,
                               fmt("spread %.4f (limit %g)", spread, params.ratio_limit) +
                                   (one_sign ? "" : ", C_fit changes sign")});
  }

  const RunResult a = twin_a.get();
  const RunResult b = twin_b.get();
  diagnostics.push_back(a.diagnostics);
  bool identical = a.trajectory.fields.size() == b.trajectory.fields.size();
  for (std::size_t s = 0; identical && s < a.trajectory.fields.size(); ++s) {
    identical = a.trajectory.fields[s] == b.trajectory.fields[s];
  }
  double twin_h = 0.0;
  for (std::size_t s = 0; s < a.trajectory.fields.size() && s < b.trajectory.fields.size(); ++s) {
    twin_h = std::max(twin_h, grid_relative_entropy(a.trajectory.fields[s], b.trajectory.fields[s], params.grid));
  }
  result.fitted["twin_max_relative_entropy"] = twin_h;
  result.verdicts.push_back({7, "identical data gives bitwise-identical trajectories", identical,
                             fmt("max H_rel between twins %.3e", twin_h)});

  add_structure_verdicts(result, diagnostics, params.solver.delta_stab);
  sink.finish();
  return result;
}

// ---------------------------------------------------------------------------

StudyResult epsilon_study(const InteractionMatrix& k, const EpsilonStudyParams& params, const StudyOutput& output) {
  const HypothesisReport hyp = check_hypotheses(k);
  if (!hyp.has_connected_species) throw Error(ErrorCode::HypothesisH3Violated, "epsilon study needs H3");
  if (params.epsilons.empty()) throw Error(ErrorCode::InvalidConfig, "epsilon list is empty");
  for (std::size_t i = 1; i < params.epsilons.size(); ++i) {
    if (!(params.epsilons[i] < params.epsilons[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "epsilon list must be strictly descending");
    }
  }
  StudyResult result;
  result.name = "epsilon";
  ArtifactSink sink(output, result);
  result.parameters = {{"K", matrix_json(k)},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"epsilons", params.epsilons},
                       {"direct_run", params.direct_run}};

  const Field initial = make_initial(params.initial, params.grid, k.species());
  const SolverConfig solver = every_step(params.solver);
  std::vector<InteractionMatrix> models;
  for (double eps : params.epsilons) models.push_back(regularize(k, eps));

  std::vector<std::future<RunResult>> futures;
  for (const auto& model : models) {
    futures.push_back(launch(params.parallel, [&] { return run(initial, model, solver, params.grid); }));
  }
  std::future<RunResult> direct_future;
  if (params.direct_run) direct_future = launch(params.parallel, [&] { return run(initial, k, solver, params.grid); });

  std::vector<RunResult> runs;
  for (auto& f : futures) runs.push_back(f.get());
  std::vector<RunDiagnostics> diagnostics;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    diagnostics.push_back(runs[i].diagnostics);
    sink.report(indexed("report_eps", i), runs[i].report);
  }

  const auto& times = runs.front().trajectory.times;
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    d.push_back(space_time_l2(times, runs[i].trajectory.fields, runs[i + 1].trajectory.fields, params.grid));
  }
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    table.push_back({{"eps_a", params.epsilons[i]}, {"eps_b", params.epsilons[i + 1]}, {"d", d[i]}});
  }
  result.tables["differences"] = table;

  if (hyp.full_interaction) {
    const bool zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
    result.verdicts.push_back({8, "full interaction gives d_k = 0", zero,
                               d.empty() ? "no differences" : fmt("max d_k %.3e", *std::max_element(d.begin(), d.end()))});
  } else {
    bool decreasing = true;
    for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i] < d[i - 1];
    std::string detail = d.size() < 2 ? "fewer than two differences" : "";
    for (std::size_t i = 0; i < d.size(); ++i) detail += (i ? ", " : "d = ") + fmt("%.4e", d[i]);
    result.verdicts.push_back({8, "d_k strictly decreasing", decreasing, detail});
  }
  for (std::size_t i = 1; i < d.size(); ++i) result.fitted["contraction_" + std::to_string(i)] = d[i] / d[i - 1];

  // Linear-in-eps extrapolation from the last two runs.
  if (runs.size() >= 2) {
    const std::size_t last = runs.size() - 1;
    const double r = params.epsilons[last - 1] / params.epsilons[last];
    std::vector<RowMatrix> extrapolated;
    for (std::size_t s = 0; s < times.size(); ++s) {
      extrapolated.push_back((r * runs[last].trajectory.fields[s].values() - runs[last - 1].trajectory.fields[s].values()) /
                             (r - 1.0));
    }
    sink.text("extrapolated_final.csv", matrix_csv(params.grid, extrapolated.back()));
    if (params.direct_run) {
      try {
        RunResult direct = direct_future.get();
        diagnostics.push_back(direct.diagnostics);
        sink.report("report_direct.csv", direct.report);
        const auto direct_raw = raw(direct.trajectory.fields);
        result.fitted["distance_extrapolated_direct"] = space_time_l2_raw(times, extrapolated, direct_raw, params.grid);
        result.fitted["distance_last_direct"] =
            space_time_l2_raw(times, raw(runs[last].trajectory.fields), direct_raw, params.grid);
        result.fitted["final_max_diff_extrapolated_direct"] = max_abs_diff(extrapolated.back(), direct_raw.back());
      } catch (const Error& e) {
        result.tables["direct_run_error"] = e.what();
      }
    }
  } else if (params.direct_run) {
    direct_future.wait();
  }
  add_structure_verdicts(result, diagnostics, params.solver.delta_stab);
  sink.finish();
  return result;
}

// ---------------------------------------------------------------------------

StudyResult equilibration_study(const InteractionMatrix& k, const EquilibrationStudyParams& params,
                                const StudyOutput& output) {
  const SpeciesClassification cls = classify_species(k);
  StudyResult result;
  result.name = "equilibration";
  ArtifactSink sink(output, result);
  result.parameters = {{"K", matrix_json(k)},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"transient", params.transient},
                       {"l1_tolerance", params.l1_tolerance},
                       {"fit_fraction", params.fit_fraction},
                       {"classification", {{"A", cls.a}, {"B", cls.b}, {"C", cls.c}}}};

  const Field initial = make_initial(params.initial, params.grid, k.species());
  const SimplexPoint mean = grid_average(initial, params.grid);
  double a_mass = 0.0;
  for (int a : cls.a) a_mass += mean[a];
  result.fitted["average_A_mass"] = a_mass;
  if (!(a_mass > 0.0)) throw Error(ErrorCode::InvalidConfig, "initial data carries no A-species mass");

  const RunResult r = run(initial, k, params.solver, params.grid, RunOptions{mean, {}});
  sink.report("report.csv", r.report);
  sink.snapshot("final.csv", r.trajectory.fields.back(), params.grid);

  const double l1 = l1_distance(r.trajectory.fields.back(), mean, params.grid);
  result.fitted["final_l1_distance"] = l1;
  result.verdicts.push_back({9, "||u(T) - ubar||_L1 <= tolerance", l1 <= params.l1_tolerance,
                             fmt("L1 distance %.3e at T = %g", l1, r.report.rows.back().t)});

  // H_rel may rise only within the degenerate-set allowance after the transient.
  const double t_start = params.transient * params.solver.final_time;
  const double slack = 10.0 * params.solver.newton_tol;
  int violations = 0, flagged = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < r.report.rows.size(); ++i) {
    const auto& prev = r.report.rows[i - 1];
    const auto& row = r.report.rows[i];
    if (prev.t < t_start) continue;
    const double increase = row.relative_entropy - prev.relative_entropy;
    worst = std::max(worst, increase);
    if (increase > slack) ++flagged;
    if (increase > slack + row.degenerate_fraction * prev.relative_entropy) ++violations;
  }
  result.fitted["max_relative_entropy_increase"] = worst;
  result.fitted["flagged_increases"] = flagged;
  result.verdicts.push_back({9, "H_rel non-increasing within degenerate allowance", violations == 0,
                             fmt("%g violations, %g flagged increases", violations, flagged)});

  result.fitted["empirical_rate"] = fit_decay_rate(column(r.report, &EntropyRow::t),
                                                   column(r.report, &EntropyRow::relative_entropy), params.fit_fraction);
  result.fitted["final_relative_entropy"] = r.report.rows.back().relative_entropy;
  add_structure_verdicts(result, {r.diagnostics}, params.solver.delta_stab);
  sink.finish();
  return result;
}

// ---------------------------------------------------------------------------

StudyResult dissipation_balance_study(const InteractionMatrix& k, const BalanceStudyParams& params,
                                      const StudyOutput& output) {
  if (params.halvings < 1) throw Error(ErrorCode::InvalidConfig, "balance study needs at least one halving");
  StudyResult result;
  result.name = "dissipation-balance";
  ArtifactSink sink(output, result);
  result.parameters = {{"K", matrix_json(k)},
                       {"grid", grid_json(params.grid)},
                       {"solver", solver_json(params.solver)},
                       {"halvings", params.halvings},
                       {"min_factor", params.min_factor},
                       {"max_factor", params.max_factor}};
  const Field initial = make_initial(params.initial, params.grid, k.species());

  std::vector<std::future<RunResult>> futures;
  std::vector<SolverConfig> configs;
  for (int h = 0; h <= params.halvings; ++h) {
    SolverConfig s = params.solver;
    s.tau = params.solver.tau / std::ldexp(1.0, h);
    s.output_every = std::numeric_limits<int>::max();
    configs.push_back(s);
  }
  for (const auto& s : configs) futures.push_back(launch(true, [&, s] { return run(initial, k, s, params.grid); }));

  std::vector<double> defects;
  std::vector<RunDiagnostics> diagnostics;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t h = 0; h < futures.size(); ++h) {
    const RunResult r = futures[h].get();
    diagnostics.push_back(r.diagnostics);
    const auto& rows = r.report.rows;
    double dissipated = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) dissipated += configs[h].tau * rows[i].dissipation;
    const double defect = std::abs(rows.front().entropy - rows.back().entropy - dissipated);
    defects.push_back(defect);
    table.push_back({{"tau", configs[h].tau}, {"steps", r.diagnostics.steps}, {"dissipated", dissipated}, {"defect", defect}});
    sink.report(indexed("report_tau", h), r.report);
  }
  result.tables["defects"] = table;

  bool in_band = true;
  std::string detail;
  for (std::size_t h = 1; h < defects.size(); ++h) {
    const double factor = defects[h - 1] / defects[h];
    result.fitted["factor_" + std::to_string(h)] = factor;
    in_band = in_band && factor >= params.min_factor && factor <= params.max_factor;
    detail += (h > 1 ? ", " : "factors ") + fmt("%.4f", factor);
  }
  result.fitted["coarsest_defect"] = defects.front();
  result.fitted["finest_defect"] = defects.back();
  result.verdicts.push_back({6, fmt("halving tau shrinks the defect by a factor in [%g, %g]", params.min_factor,
                                    params.max_factor),
                             in_band, detail});
  add_structure_verdicts(result, diagnostics, params.solver.delta_stab);
  sink.finish();
  return result;
}

StudyResult simulate(const InteractionMatrix& k, const SimulateParams& params, const StudyOutput& output) {
  StudyResult result;
  result.name = "simulate";
  ArtifactSink sink(output, result);
  result.parameters = {{"K", matrix_json(k)}, {"grid", grid_json(params.grid)}, {"solver", solver_json(params.solver)}};
  const Field initial = make_initial(params.initial, params.grid, k.species());
  const RunResult r = run(initial, k, params.solver, params.grid);
  for (std::size_t s = 0; s < r.trajectory.fields.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", s);
    sink.snapshot(name, r.trajectory.fields[s], params.grid);
  }
  sink.report("report.csv", r.report);
  nlohmann::json times = r.trajectory.times;
  result.tables["snapshot_times"] = times;
  result.fitted["steps"] = r.diagnostics.steps;
  result.fitted["newton_iterations"] = r.diagnostics.newton_iterations;
  result.fitted["initial_entropy"] = r.report.rows.front().entropy;
  result.fitted["final_entropy"] = r.report.rows.back().entropy;
  result.fitted["final_relative_entropy"] = r.report.rows.back().relative_entropy;
  result.fitted["projected_initial"] = r.diagnostics.projected_initial ? 1.0 : 0.0;
  add_structure_verdicts(result, {r.diagnostics}, params.solver.delta_stab);
  sink.finish();
  return result;
}

}  // namespace crossdiff
