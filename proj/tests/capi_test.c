/* Exercises the C interface through the shared library only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "crossdiff/crossdiff.h"

static int failures = 0;

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

static void model_roundtrip(void) {
  const double k[9] = {0, 1, 1, 1, 0, 0, 1, 0, 0};
  cd_model* model = NULL;
  EXPECT(cd_model_create(k, 3, &model) == CD_OK);
  EXPECT(cd_model_species(model) == 3);

  size_t needed = 0;
  EXPECT(cd_model_summary_json(model, NULL, 0, &needed) == CD_ERR_BUFFER_TOO_SMALL);
  EXPECT(needed > 1);
  char* text = malloc(needed);
  EXPECT(cd_model_summary_json(model, text, needed, &needed) == CD_OK);
  EXPECT(strstr(text, "\"classification\"") != NULL);
  EXPECT(strlen(text) + 1 == needed);
  free(text);

  double kappa = -1;
  EXPECT(cd_model_kappa(model, &kappa) == CD_OK);
  EXPECT(kappa == 0.0);

  cd_model* regular = NULL;
  EXPECT(cd_model_regularize(model, 0.5, &regular) == CD_OK);
  EXPECT(cd_model_kappa(regular, &kappa) == CD_OK);
  EXPECT(kappa == 0.5);
  cd_model_destroy(regular);

  EXPECT(cd_model_regularize(model, 5.0, &regular) == CD_ERR_EPSILON_TOO_LARGE);
  EXPECT(regular == NULL);
  cd_model_destroy(model);
}

static void model_errors(void) {
  const double asym[4] = {0, 1, 2, 0};
  cd_model* model = NULL;
  EXPECT(cd_model_create(asym, 2, &model) == CD_ERR_ASYMMETRIC);
  EXPECT(model == NULL);
  EXPECT(strstr(cd_last_error(), "K(0,1)") != NULL);
  EXPECT(strcmp(cd_status_name(CD_ERR_ASYMMETRIC), "AsymmetricCoefficients") == 0);
  EXPECT(cd_model_create(asym, 2, NULL) == CD_ERR_INVALID_ARGUMENT);
  const double neg[4] = {0, -1, -1, 0};
  EXPECT(cd_model_create(neg, 2, &model) == CD_ERR_NEGATIVE_COEFFICIENT);
  EXPECT(cd_model_species(NULL) == 0);
  cd_model_destroy(NULL);
}

static void config_errors(void) {
  cd_config* config = NULL;
  EXPECT(cd_config_parse("{\"schema\": 1, \"model\": {\"n\": 1, \"K\": [0, 1, 1, 0]}, \"bogus\": 1}", &config) ==
         CD_ERR_PARSE);
  EXPECT(strstr(cd_last_error(), "bogus") != NULL);
  EXPECT(cd_config_parse("{\"schema\": 1, \"model\": {\"n\": 1, \"K\": [0, 1, 2, 0]}}", &config) == CD_ERR_VALIDATION);
  EXPECT(cd_config_load("/nonexistent/config.json", &config) == CD_ERR_IO);
  cd_study_kind kind;
  EXPECT(cd_study_kind_from_name("epsilon-study", &kind) == CD_OK);
  EXPECT(kind == CD_STUDY_EPSILON);
  EXPECT(cd_study_kind_from_name("nonsense", &kind) == CD_ERR_INVALID_ARGUMENT);
}

static const char* kSmall =
    "{\"schema\": 1,"
    " \"model\": {\"n\": 2, \"K\": [[0, 1, 2], [1, 0, 3], [2, 3, 0]]},"
    " \"grid\": {\"L\": 1.0, \"m\": 16},"
    " \"solver\": {\"tau\": 1e-3, \"T\": 0.01},"
    " \"initial\": {\"profile\": \"step\", \"left\": [0.2, 0.6, 0.2], \"right\": [0.5, 0.1, 0.4]}}";

static void study(void) {
  cd_config* config = NULL;
  EXPECT(cd_config_parse(kSmall, &config) == CD_OK);
  cd_study* result = NULL;
  EXPECT(cd_run_study(config, CD_STUDY_SIMULATE, &result) == CD_OK);
  EXPECT(cd_study_passed(result) == 1);
  EXPECT(cd_study_verdict_count(result) >= 3);
  int criterion = 0, passed = 0;
  const char* check = NULL;
  const char* detail = NULL;
  EXPECT(cd_study_verdict(result, 0, &criterion, &passed, &check, &detail) == CD_OK);
  EXPECT(criterion == 5);
  EXPECT(passed == 1);
  EXPECT(check != NULL && detail != NULL);
  EXPECT(cd_study_verdict(result, 1000, &criterion, &passed, &check, &detail) == CD_ERR_INVALID_ARGUMENT);
  EXPECT(cd_study_fitted(result, "steps") == 10.0);
  EXPECT(isnan(cd_study_fitted(result, "not a key")));
  size_t needed = 0;
  cd_study_summary_json(result, NULL, 0, &needed);
  char* text = malloc(needed);
  EXPECT(cd_study_summary_json(result, text, needed, &needed) == CD_OK);
  EXPECT(strstr(text, "\"simulate\"") != NULL);
  free(text);
  cd_study_destroy(result);

  cd_config_destroy(config);

  cd_config* partial = NULL;
  EXPECT(cd_config_parse("{\"schema\": 1, \"model\": {\"n\": 2, \"K\": [0, 1, 1, 1, 0, 0, 1, 0, 0]}}", &partial) ==
         CD_OK);
  EXPECT(cd_run_study(partial, CD_STUDY_DECAY, &result) == CD_ERR_INVALID_CONFIG);
  EXPECT(result == NULL);
  EXPECT(strlen(cd_last_error()) > 0);
  cd_config_destroy(partial);
}

static void solver(void) {
  cd_config* config = NULL;
  EXPECT(cd_config_parse(kSmall, &config) == CD_OK);
  cd_solver* s = NULL;
  EXPECT(cd_solver_create(config, &s) == CD_OK);
  cd_config_destroy(config);

  int cells = 0, species = 0;
  EXPECT(cd_solver_shape(s, &cells, &species) == CD_OK);
  EXPECT(cells == 16 && species == 3);

  double mass0[3], mass[3], h0 = 0, h = 0;
  EXPECT(cd_solver_mass(s, mass0, 3) == CD_OK);
  EXPECT(cd_solver_entropy(s, &h0) == CD_OK);
  EXPECT(cd_solver_mass(s, mass, 2) == CD_ERR_BUFFER_TOO_SMALL);
  for (int i = 0; i < 5; ++i) {
    int iterations = 0;
    EXPECT(cd_solver_step(s, &iterations) == CD_OK);
    EXPECT(iterations >= 1);
  }
  EXPECT(fabs(cd_solver_time(s) - 5e-3) < 1e-15);
  EXPECT(cd_solver_mass(s, mass, 3) == CD_OK);
  for (int i = 0; i < 3; ++i) EXPECT(fabs(mass[i] - mass0[i]) < 1e-12);
  EXPECT(cd_solver_entropy(s, &h) == CD_OK);
  EXPECT(h < h0);

  double field[48];
  EXPECT(cd_solver_field(s, field, 48) == CD_OK);
  for (int c = 0; c < 16; ++c) {
    const double sum = field[3 * c] + field[3 * c + 1] + field[3 * c + 2];
    EXPECT(fabs(sum - 1.0) < 1e-14);
    EXPECT(field[3 * c] > 0 && field[3 * c + 1] > 0 && field[3 * c + 2] > 0);
  }
  EXPECT(cd_solver_field(s, field, 47) == CD_ERR_BUFFER_TOO_SMALL);
  cd_solver_destroy(s);

  cd_config* bare = NULL;
  EXPECT(cd_config_parse("{\"schema\": 1, \"model\": {\"n\": 1, \"K\": [0, 1, 1, 0]}}", &bare) == CD_OK);
  EXPECT(cd_solver_create(bare, &s) == CD_ERR_VALIDATION);
  cd_config_destroy(bare);
}

int main(void) {
  EXPECT(strcmp(cd_version(), "1.0.0") == 0);
  model_roundtrip();
  model_errors();
  config_errors();
  study();
  solver();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
