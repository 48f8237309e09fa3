#ifndef CROSSDIFF_H
#define CROSSDIFF_H

/* C interface to the crossdiff library. Every handle is opaque and owned by
 * the caller once returned; release it with the matching _destroy call.
 * Functions return CD_OK or an error status; cd_last_error() gives the
 * message of the most recent failure on the calling thread. */

#include <stddef.h>

#if defined(_WIN32)
#define CD_API __declspec(dllexport)
#else
#define CD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cd_status {
  CD_OK = 0,
  CD_ERR_NON_SQUARE = 1,
  CD_ERR_NON_FINITE = 2,
  CD_ERR_NONZERO_DIAGONAL = 3,
  CD_ERR_ASYMMETRIC = 4,
  CD_ERR_NEGATIVE_COEFFICIENT = 5,
  CD_ERR_H3_VIOLATED = 6,
  CD_ERR_EPSILON_TOO_LARGE = 7,
  CD_ERR_NOT_ON_SIMPLEX = 8,
  CD_ERR_SINGULAR_AT_BOUNDARY = 9,
  CD_ERR_OUT_OF_RANGE = 10,
  CD_ERR_REFERENCE_NOT_POSITIVE = 11,
  CD_ERR_GRID_MISMATCH = 12,
  CD_ERR_INVALID_GRID = 13,
  CD_ERR_NEGATIVE_PROFILE = 14,
  CD_ERR_DEGENERATE_PROFILE = 15,
  CD_ERR_NON_FINITE_RESIDUAL = 16,
  CD_ERR_NEWTON_DIVERGED = 17,
  CD_ERR_INVALID_CONFIG = 18,
  CD_ERR_PARSE = 19,
  CD_ERR_VALIDATION = 20,
  CD_ERR_DEGENERATE_BASELINE = 21,
  CD_ERR_IO = 22,
  CD_ERR_INVALID_ARGUMENT = 100,
  CD_ERR_BUFFER_TOO_SMALL = 101,
  CD_ERR_INTERNAL = 102
} cd_status;

typedef enum cd_study_kind {
  CD_STUDY_HEAT = 0,
  CD_STUDY_DECAY = 1,
  CD_STUDY_STABILITY = 2,
  CD_STUDY_EPSILON = 3,
  CD_STUDY_EQUILIBRATION = 4,
  CD_STUDY_SIMULATE = 5
} cd_study_kind;

typedef struct cd_model cd_model;
typedef struct cd_config cd_config;
typedef struct cd_study cd_study;
typedef struct cd_solver cd_solver;

CD_API const char* cd_version(void);
CD_API const char* cd_status_name(cd_status status);
/* Message of the last failure on this thread; empty when none. */
CD_API const char* cd_last_error(void);

/* Text results are copied into buf (NUL-terminated) when capacity suffices;
 * *needed always receives the full length including the terminator. */

/* Interaction matrix, (n+1)^2 row-major entries. */
CD_API cd_status cd_model_create(const double* k_row_major, int species, cd_model** out);
CD_API void cd_model_destroy(cd_model* model);
CD_API int cd_model_species(const cd_model* model);
/* Hypotheses, kappa and species classification as JSON. */
CD_API cd_status cd_model_summary_json(const cd_model* model, char* buf, size_t capacity, size_t* needed);
CD_API cd_status cd_model_regularize(const cd_model* model, double epsilon, cd_model** out);
CD_API cd_status cd_model_kappa(const cd_model* model, double* out);

CD_API cd_status cd_config_parse(const char* text, cd_config** out);
CD_API cd_status cd_config_load(const char* path, cd_config** out);
CD_API void cd_config_destroy(cd_config* config);
/* NULL or "" clears the output directory. */
CD_API cd_status cd_config_set_output(cd_config* config, const char* directory);
CD_API cd_status cd_config_model(const cd_config* config, cd_model** out);

CD_API cd_status cd_study_kind_from_name(const char* name, cd_study_kind* out);
CD_API cd_status cd_run_study(const cd_config* config, cd_study_kind kind, cd_study** out);
CD_API void cd_study_destroy(cd_study* study);
CD_API int cd_study_passed(const cd_study* study);
CD_API size_t cd_study_verdict_count(const cd_study* study);
/* Borrowed strings stay valid until the study is destroyed. */
CD_API cd_status cd_study_verdict(const cd_study* study, size_t index, int* criterion, int* passed,
                                  const char** check, const char** detail);
/* NaN when the study did not produce the named quantity. */
CD_API double cd_study_fitted(const cd_study* study, const char* name);
CD_API cd_status cd_study_summary_json(const cd_study* study, char* buf, size_t capacity, size_t* needed);

/* Step-by-step integration from the config's initial data. */
CD_API cd_status cd_solver_create(const cd_config* config, cd_solver** out);
CD_API void cd_solver_destroy(cd_solver* solver);
CD_API cd_status cd_solver_step(cd_solver* solver, int* newton_iterations);
CD_API double cd_solver_time(const cd_solver* solver);
CD_API cd_status cd_solver_shape(const cd_solver* solver, int* cells, int* species);
/* Cell-major copy of the current densities: out[c * species + i]. */
CD_API cd_status cd_solver_field(const cd_solver* solver, double* out, size_t capacity);
CD_API cd_status cd_solver_entropy(const cd_solver* solver, double* out);
CD_API cd_status cd_solver_mass(const cd_solver* solver, double* out, size_t capacity);

#ifdef __cplusplus
}
#endif

#endif
