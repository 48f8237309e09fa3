#include "crossdiff/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include <json.hpp>

#include "crossdiff/io.hpp"

namespace crossdiff {

namespace {

using json = nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// A JSON object whose keys must all be known.
class Section {
public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) parse_fail(path_.empty() ? "<root>" : path_, "expected an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& item : j_.items()) {
      if (!known.count(item.key())) parse_fail(join(path_, item.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return join(path_, key); }

  std::optional<double> number(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (!v.is_number()) parse_fail(path(key), "expected a number");
    return v.get<double>();
  }

  std::optional<int> integer(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (!v.is_number_integer()) parse_fail(path(key), "expected an integer");
    return v.get<int>();
  }

  std::optional<bool> boolean(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (!v.is_boolean()) parse_fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::optional<std::string> string(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (!v.is_string()) parse_fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number_list(at(key), path(key));
  }

  static std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) parse_fail(where, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) parse_fail(where + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

private:
  const json& j_;
  std::string path_;
};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

template <class T>
void positive(const std::optional<T>& v, const std::string& where) {
  if (v && !(*v > 0)) invalid(where, "must be positive");
}

ValidatedModel parse_model(const Section& model) {
  const auto n = model.integer("n");
  if (!n) parse_fail(model.path("n"), "missing");
  if (*n < 1) invalid(model.path("n"), "must be >= 1");
  if (!model.has("K")) parse_fail(model.path("K"), "missing");
  const json& raw = model.at("K");
  std::vector<double> flat;
  if (raw.is_array() && !raw.empty() && raw[0].is_array()) {
    for (std::size_t r = 0; r < raw.size(); ++r) {
      const auto row = Section::number_list(raw[r], model.path("K") + "[" + std::to_string(r) + "]");
      if (static_cast<int>(row.size()) != *n + 1) invalid(model.path("K"), "each row needs n+1 entries");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  } else {
    flat = Section::number_list(raw, model.path("K"));
  }
  const std::size_t species = static_cast<std::size_t>(*n) + 1;
  if (flat.size() != species * species) {
    invalid(model.path("K"), "expected " + std::to_string(species * species) + " entries for n = " + std::to_string(*n) +
                                 ", got " + std::to_string(flat.size()));
  }
  try {
    return validate_hypotheses(flat);
  } catch (const Error& e) {
    invalid(model.path("K"), e.what());
  }
}

SolverSettings parse_solver(const Section& s) {
  SolverSettings out;
  out.tau = s.number("tau");
  out.final_time = s.number("T");
  out.newton_tol = s.number("newton_tol");
  out.newton_max = s.integer("newton_max");
  out.delta_stab = s.number("delta_stab");
  out.theta = s.number("theta");
  out.output_every = s.integer("output_every");
  if (const auto j = s.string("jacobian")) {
    if (*j == "analytic") {
      out.jacobian = JacobianKind::Analytic;
    } else if (*j == "fd") {
      out.jacobian = JacobianKind::FiniteDifference;
    } else {
      invalid(s.path("jacobian"), "expected \"analytic\" or \"fd\"");
    }
  }
  positive(out.tau, s.path("tau"));
  if (out.final_time && !(*out.final_time >= 0)) invalid(s.path("T"), "must be non-negative");
  positive(out.newton_tol, s.path("newton_tol"));
  positive(out.newton_max, s.path("newton_max"));
  if (out.delta_stab && !(*out.delta_stab >= 0)) invalid(s.path("delta_stab"), "must be non-negative");
  positive(out.theta, s.path("theta"));
  positive(out.output_every, s.path("output_every"));
  return out;
}

ProfileSpec parse_initial(const json& j) {
  if (!j.is_object()) parse_fail("initial", "expected an object");
  if (!j.contains("profile") || !j.at("profile").is_string()) parse_fail("initial.profile", "missing profile name");
  const std::string name = j.at("profile").get<std::string>();
  ProfileSpec spec;
  using Kind = ProfileSpec::Kind;
  auto vec = [](const Section& s, const char* key) { return s.numbers(key).value_or(std::vector<double>{}); };
  auto remainder = [](const Section& s, ProfileSpec& p) {
    if (const auto r = s.integer("remainder")) {
      if (*r < 0) invalid(s.path("remainder"), "must be a species index");
      p.remainder = *r;
    }
  };
  if (name == "constant") {
    Section s(j, "initial", {"profile", "base", "remainder"});
    spec.kind = Kind::Constant;
    spec.base = vec(s, "base");
    remainder(s, spec);
  } else if (name == "cosine") {
    Section s(j, "initial", {"profile", "base", "amplitude", "mode", "phase", "remainder"});
    spec.kind = Kind::Cosine;
    spec.base = vec(s, "base");
    spec.amplitude = vec(s, "amplitude");
    spec.mode = vec(s, "mode");
    spec.phase = vec(s, "phase");
    remainder(s, spec);
  } else if (name == "gaussian") {
    Section s(j, "initial", {"profile", "base", "amplitude", "center", "width", "remainder"});
    spec.kind = Kind::Gaussian;
    spec.base = vec(s, "base");
    spec.amplitude = vec(s, "amplitude");
    spec.center = s.number("center").value_or(spec.center);
    spec.width = s.number("width").value_or(spec.width);
    positive(std::optional<double>(spec.width), s.path("width"));
    remainder(s, spec);
  } else if (name == "step") {
    Section s(j, "initial", {"profile", "left", "right", "split", "remainder"});
    spec.kind = Kind::Step;
    spec.left = vec(s, "left");
    spec.right = vec(s, "right");
    spec.split = s.number("split").value_or(spec.split);
    remainder(s, spec);
  } else if (name == "csv") {
    Section s(j, "initial", {"profile", "path"});
    spec.kind = Kind::Csv;
    const auto path = s.string("path");
    if (!path) parse_fail(s.path("path"), "missing");
    spec.path = *path;
  } else {
    invalid("initial.profile", "unknown profile '" + name + "' (constant, cosine, gaussian, step, csv)");
  }
  return spec;
}

StudySettings parse_study(const Section& s) {
  StudySettings out;
  out.amplitude = s.number("amplitude");
  out.base = s.number("base");
  out.deltas = s.numbers("deltas");
  if (const auto r = s.string("reference")) {
    if (*r == "same-grid") {
      out.reference = StabilityReference::SameGrid;
    } else if (*r == "refined") {
      out.reference = StabilityReference::Refined;
    } else {
      invalid(s.path("reference"), "expected \"same-grid\" or \"refined\"");
    }
  }
  out.refine_factor = s.integer("refine_factor");
  out.bump_center = s.number("bump_center");
  out.bump_width = s.number("bump_width");
  out.ratio_limit = s.number("ratio_limit");
  out.epsilons = s.numbers("epsilons");
  out.direct_run = s.boolean("direct_run");
  out.transient = s.number("transient");
  out.l1_tolerance = s.number("l1_tolerance");
  out.fit_fraction = s.number("fit_fraction");
  out.rate_tolerance = s.number("rate_tolerance");
  out.scale_check = s.boolean("scale_check");
  out.scale_tolerance = s.number("scale_tolerance");
  out.refine = s.boolean("refine");
  out.refined_cells = s.integer("refined_cells");
  out.refined_tau = s.number("refined_tau");
  out.tolerance = s.number("tolerance");
  out.min_ratio = s.number("min_ratio");
  out.parallel = s.boolean("parallel");
  positive(out.refine_factor, s.path("refine_factor"));
  positive(out.bump_width, s.path("bump_width"));
  positive(out.refined_cells, s.path("refined_cells"));
  positive(out.refined_tau, s.path("refined_tau"));
  if (out.fit_fraction && !(*out.fit_fraction > 0 && *out.fit_fraction <= 1)) invalid(s.path("fit_fraction"), "must be in (0, 1]");
  if (out.transient && !(*out.transient >= 0 && *out.transient < 1)) invalid(s.path("transient"), "must be in [0, 1)");
  if (out.deltas) {
    for (double d : *out.deltas) {
      if (!(d > 0)) invalid(s.path("deltas"), "entries must be positive");
    }
  }
  if (out.epsilons) {
    for (double e : *out.epsilons) {
      if (!(e > 0)) invalid(s.path("epsilons"), "entries must be positive");
    }
  }
  return out;
}

template <class T>
void set_if(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

const ProfileSpec& require_initial(const RunConfig& config, StudyKind kind) {
  if (!config.initial) invalid("initial", std::string("section required for ") + study_name(kind));
  return *config.initial;
}

SolverConfig checked(SolverConfig s, const RunConfig& config) {
  if (config.epsilon) s.eps_model = config.epsilon;
  try {
    s.validate();
  } catch (const Error& e) {
    invalid("solver", e.what());
  }
  return s;
}

}  // namespace

SolverConfig SolverSettings::over(SolverConfig d) const {
  set_if(d.tau, tau);
  set_if(d.final_time, final_time);
  set_if(d.newton_tol, newton_tol);
  set_if(d.newton_max, newton_max);
  set_if(d.delta_stab, delta_stab);
  set_if(d.theta, theta);
  set_if(d.output_every, output_every);
  set_if(d.jacobian, jacobian);
  return d;
}

Grid1D GridSettings::over(const Grid1D& defaults) const {
  return Grid1D(length.value_or(defaults.length()), cells.value_or(defaults.cells()));
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw Error(ErrorCode::ParseError, "line " + line_col(text, e.byte) + ": " + what);
  }
  const Section top(root, "", {"schema", "model", "grid", "solver", "initial", "output", "study"});
  const auto schema = top.integer("schema");
  if (!schema) parse_fail("schema", "missing (expected \"schema\": 1)");
  if (*schema != 1) invalid("schema", "unsupported version " + std::to_string(*schema));
  if (!top.has("model")) parse_fail("model", "missing");

  const Section model(top.at("model"), "model", {"n", "K", "epsilon"});
  ValidatedModel validated = parse_model(model);
  RunConfig config{std::move(validated), {}, {}, {}, {}, {}, {}, text};
  config.epsilon = model.number("epsilon");
  if (config.epsilon) {
    try {
      (void)regularize(config.model.k, *config.epsilon);
    } catch (const Error& e) {
      invalid("model.epsilon", e.what());
    }
  }

  if (top.has("grid")) {
    const Section grid(top.at("grid"), "grid", {"L", "m"});
    config.grid.length = grid.number("L");
    config.grid.cells = grid.integer("m");
    positive(config.grid.length, "grid.L");
    if (config.grid.cells && *config.grid.cells < 2) invalid("grid.m", "must be >= 2");
  }
  if (top.has("solver")) {
    config.solver = parse_solver(Section(top.at("solver"), "solver",
                                         {"tau", "T", "newton_tol", "newton_max", "delta_stab", "theta", "output_every",
                                          "jacobian"}));
  }
  if (top.has("initial")) config.initial = parse_initial(top.at("initial"));
  if (const auto out = top.string("output")) config.output = *out;
  if (top.has("study")) {
    config.study = parse_study(Section(
        top.at("study"), "study",
        {"amplitude", "base", "deltas", "reference", "refine_factor", "bump_center", "bump_width", "ratio_limit",
         "epsilons", "direct_run", "transient", "l1_tolerance", "fit_fraction", "rate_tolerance", "scale_check",
         "scale_tolerance", "refine", "refined_cells", "refined_tau", "tolerance", "min_ratio", "parallel"}));
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig config = parse_config(read_text_file(path));
  if (config.initial && config.initial->kind == ProfileSpec::Kind::Csv) {
    const std::filesystem::path csv(config.initial->path);
    if (csv.is_relative()) config.initial->path = (path.parent_path() / csv).string();
  }
  return config;
}

std::optional<StudyKind> study_kind_from_name(const std::string& name) {
  for (StudyKind k : {StudyKind::Heat, StudyKind::Decay, StudyKind::Stability, StudyKind::Epsilon,
                      StudyKind::Equilibration, StudyKind::Simulate}) {
    if (name == study_name(k)) return k;
  }
  return std::nullopt;
}

const char* study_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::Heat: return "heat-check";
    case StudyKind::Decay: return "decay-study";
    case StudyKind::Stability: return "stability-study";
    case StudyKind::Epsilon: return "epsilon-study";
    case StudyKind::Equilibration: return "equilibration-study";
    case StudyKind::Simulate: return "simulate";
  }
  return "unknown";
}

StudyResult run_configured(const RunConfig& config, StudyKind kind) {
  const InteractionMatrix& k = config.model.k;
  const StudySettings& st = config.study;
  StudyOutput output{config.output, config.source};
  switch (kind) {
    case StudyKind::Heat: {
      HeatStudyParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      set_if(p.base, st.base);
      set_if(p.amplitude, st.amplitude);
      set_if(p.refine, st.refine);
      set_if(p.refined_cells, st.refined_cells);
      set_if(p.refined_tau, st.refined_tau);
      set_if(p.tolerance, st.tolerance);
      set_if(p.min_ratio, st.min_ratio);
      return heat_equivalence_study(k, p, output);
    }
    case StudyKind::Decay: {
      DecayStudyParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      set_if(p.amplitude, st.amplitude);
      set_if(p.fit_fraction, st.fit_fraction);
      set_if(p.rate_tolerance, st.rate_tolerance);
      set_if(p.scale_check, st.scale_check);
      set_if(p.scale_tolerance, st.scale_tolerance);
      return decay_study(k, p, output);
    }
    case StudyKind::Stability: {
      StabilityStudyParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      p.initial = require_initial(config, kind);
      set_if(p.deltas, st.deltas);
      set_if(p.reference, st.reference);
      set_if(p.refine_factor, st.refine_factor);
      set_if(p.bump_center, st.bump_center);
      set_if(p.bump_width, st.bump_width);
      set_if(p.ratio_limit, st.ratio_limit);
      set_if(p.parallel, st.parallel);
      return stability_study(k, p, output);
    }
    case StudyKind::Epsilon: {
      EpsilonStudyParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      p.solver.eps_model.reset();  // the study applies each epsilon itself
      p.initial = require_initial(config, kind);
      set_if(p.epsilons, st.epsilons);
      set_if(p.direct_run, st.direct_run);
      set_if(p.parallel, st.parallel);
      return epsilon_study(k, p, output);
    }
    case StudyKind::Equilibration: {
      EquilibrationStudyParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      p.initial = require_initial(config, kind);
      set_if(p.transient, st.transient);
      set_if(p.l1_tolerance, st.l1_tolerance);
      set_if(p.fit_fraction, st.fit_fraction);
      return equilibration_study(k, p, output);
    }
    case StudyKind::Simulate: {
      SimulateParams p;
      p.grid = config.grid.over(p.grid);
      p.solver = checked(config.solver.over(p.solver), config);
      p.initial = require_initial(config, kind);
      return simulate(k, p, output);
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown study");
}

}  // namespace crossdiff
