#include "crossdiff/crossdiff.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "crossdiff/config.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/io.hpp"

using namespace crossdiff;

struct cd_model {
  InteractionMatrix k;
};

struct cd_config {
  RunConfig config;
};

struct cd_study {
  StudyResult result;
};

struct cd_solver {
  InteractionMatrix k;
  Grid1D grid;
  SolverConfig solver;
  Field field;
  long steps = 0;
};

namespace {

thread_local std::string last_error;

static_assert(static_cast<int>(ErrorCode::IoError) + 1 == CD_ERR_IO, "status codes mirror ErrorCode");

cd_status status_of(ErrorCode code) { return static_cast<cd_status>(static_cast<int>(code) + 1); }

cd_status fail(cd_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
cd_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CD_ERR_INTERNAL, "unknown failure");
  }
}

cd_status copy_text(const std::string& text, char* buf, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf || capacity < text.size() + 1) {
    return fail(CD_ERR_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(text.size() + 1) + " bytes");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return CD_OK;
}

#define CD_REQUIRE(cond, what) \
  if (!(cond)) return fail(CD_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* cd_version(void) { return "1.0.0"; }

const char* cd_status_name(cd_status status) {
  switch (status) {
    case CD_OK: return "Ok";
    case CD_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case CD_ERR_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case CD_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code >= 0 && code <= static_cast<int>(ErrorCode::IoError)) return to_string(static_cast<ErrorCode>(code));
  return "Unknown";
}

const char* cd_last_error(void) { return last_error.c_str(); }

cd_status cd_model_create(const double* k_row_major, int species, cd_model** out) {
  CD_REQUIRE(out, "out is null");
  *out = nullptr;
  CD_REQUIRE(k_row_major || species == 0, "matrix pointer is null");
  CD_REQUIRE(species >= 0, "species must be non-negative");
  return guarded([&] {
    const std::size_t n = static_cast<std::size_t>(species);
    std::vector<double> values(k_row_major, k_row_major + n * n);
    *out = new cd_model{validate_hypotheses(values).k};
    return CD_OK;
  });
}

void cd_model_destroy(cd_model* model) { delete model; }

int cd_model_species(const cd_model* model) { return model ? model->k.species() : 0; }

cd_status cd_model_summary_json(const cd_model* model, char* buf, size_t capacity, size_t* needed) {
  CD_REQUIRE(model, "model is null");
  return guarded([&] { return copy_text(model_summary_json(model->k).dump(), buf, capacity, needed); });
}

cd_status cd_model_regularize(const cd_model* model, double epsilon, cd_model** out) {
  CD_REQUIRE(model && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cd_model{regularize(model->k, epsilon)};
    return CD_OK;
  });
}

cd_status cd_model_kappa(const cd_model* model, double* out) {
  CD_REQUIRE(model && out, "null argument");
  return guarded([&] {
    *out = kappa(model->k);
    return CD_OK;
  });
}

cd_status cd_config_parse(const char* text, cd_config** out) {
  CD_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cd_config{parse_config(text)};
    return CD_OK;
  });
}

cd_status cd_config_load(const char* path, cd_config** out) {
  CD_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cd_config{load_config(path)};
    return CD_OK;
  });
}

void cd_config_destroy(cd_config* config) { delete config; }

cd_status cd_config_set_output(cd_config* config, const char* directory) {
  CD_REQUIRE(config, "config is null");
  if (!directory || !*directory) {
    config->config.output.reset();
  } else {
    config->config.output = directory;
  }
  return CD_OK;
}

cd_status cd_config_model(const cd_config* config, cd_model** out) {
  CD_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cd_model{config->config.model.k};
    return CD_OK;
  });
}

cd_status cd_study_kind_from_name(const char* name, cd_study_kind* out) {
  CD_REQUIRE(name && out, "null argument");
  const auto kind = study_kind_from_name(name);
  if (!kind) return fail(CD_ERR_INVALID_ARGUMENT, std::string("unknown study '") + name + "'");
  *out = static_cast<cd_study_kind>(static_cast<int>(*kind));
  return CD_OK;
}

cd_status cd_run_study(const cd_config* config, cd_study_kind kind, cd_study** out) {
  CD_REQUIRE(config && out, "null argument");
  *out = nullptr;
  CD_REQUIRE(kind >= CD_STUDY_HEAT && kind <= CD_STUDY_SIMULATE, "unknown study kind");
  return guarded([&] {
    *out = new cd_study{run_configured(config->config, static_cast<StudyKind>(static_cast<int>(kind)))};
    return CD_OK;
  });
}

void cd_study_destroy(cd_study* study) { delete study; }

int cd_study_passed(const cd_study* study) { return study && study->result.passed() ? 1 : 0; }

size_t cd_study_verdict_count(const cd_study* study) { return study ? study->result.verdicts.size() : 0; }

cd_status cd_study_verdict(const cd_study* study, size_t index, int* criterion, int* passed, const char** check,
                           const char** detail) {
  CD_REQUIRE(study, "study is null");
  CD_REQUIRE(index < study->result.verdicts.size(), "verdict index out of range");
  const Verdict& v = study->result.verdicts[index];
  if (criterion) *criterion = v.criterion;
  if (passed) *passed = v.passed ? 1 : 0;
  if (check) *check = v.check.c_str();
  if (detail) *detail = v.detail.c_str();
  return CD_OK;
}

double cd_study_fitted(const cd_study* study, const char* name) {
  if (!study || !name) return std::numeric_limits<double>::quiet_NaN();
  const auto it = study->result.fitted.find(name);
  return it == study->result.fitted.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

cd_status cd_study_summary_json(const cd_study* study, char* buf, size_t capacity, size_t* needed) {
  CD_REQUIRE(study, "study is null");
  return guarded([&] { return copy_text(study->result.to_json().dump(), buf, capacity, needed); });
}

cd_status cd_solver_create(const cd_config* config, cd_solver** out) {
  CD_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const RunConfig& rc = config->config;
    if (!rc.initial) throw Error(ErrorCode::ValidationError, "initial: section required for stepping");
    const Grid1D grid = rc.grid.over(Grid1D(1.0, 64));
    SolverConfig solver = rc.solver.over(SolverConfig{});
    solver.final_time = std::max(solver.final_time, solver.tau);
    solver.validate();
    const InteractionMatrix k = rc.epsilon ? regularize(rc.model.k, *rc.epsilon) : rc.model.k;
    const Field initial = project_inward(make_initial(*rc.initial, grid, k.species()));
    *out = new cd_solver{k, grid, solver, initial, 0};
    return CD_OK;
  });
}

void cd_solver_destroy(cd_solver* solver) { delete solver; }

cd_status cd_solver_step(cd_solver* solver, int* newton_iterations) {
  CD_REQUIRE(solver, "solver is null");
  return guarded([&] {
    StepResult r = newton_advance(solver->field, solver->k, solver->solver, solver->grid);
    solver->field = std::move(r.field);
    ++solver->steps;
    if (newton_iterations) *newton_iterations = r.newton_iterations;
    return CD_OK;
  });
}

double cd_solver_time(const cd_solver* solver) {
  return solver ? static_cast<double>(solver->steps) * solver->solver.tau : std::nan("");
}

cd_status cd_solver_shape(const cd_solver* solver, int* cells, int* species) {
  CD_REQUIRE(solver, "solver is null");
  if (cells) *cells = solver->field.cells();
  if (species) *species = solver->field.species();
  return CD_OK;
}

cd_status cd_solver_field(const cd_solver* solver, double* out, size_t capacity) {
  CD_REQUIRE(solver && out, "null argument");
  const RowMatrix& v = solver->field.values();
  const size_t size = static_cast<size_t>(v.size());
  if (capacity < size) return fail(CD_ERR_BUFFER_TOO_SMALL, "field needs " + std::to_string(size) + " doubles");
  std::memcpy(out, v.data(), size * sizeof(double));
  return CD_OK;
}

cd_status cd_solver_entropy(const cd_solver* solver, double* out) {
  CD_REQUIRE(solver && out, "null argument");
  return guarded([&] {
    *out = grid_entropy(solver->field, solver->grid);
    return CD_OK;
  });
}

cd_status cd_solver_mass(const cd_solver* solver, double* out, size_t capacity) {
  CD_REQUIRE(solver && out, "null argument");
  const size_t species = static_cast<size_t>(solver->field.species());
  if (capacity < species) return fail(CD_ERR_BUFFER_TOO_SMALL, "mass needs one double per species");
  return guarded([&] {
    const Eigen::VectorXd mass = grid_mass(solver->field, solver->grid);
    for (size_t i = 0; i < species; ++i) out[i] = mass(static_cast<Eigen::Index>(i));
    return CD_OK;
  });
}

}  // extern "C"
