#ifndef SPPSBL_SPPSBL_H
#define SPPSBL_SPPSBL_H

/* C interface to the sppsbl solver and experiment runner.
 *
 * Every fallible call returns an sppsbl_status. On failure the message for
 * the calling thread is available from sppsbl_last_error() until the next
 * failing call on that thread. Handles are opaque and owned by the caller;
 * destroy functions accept NULL. */

#include <stddef.h>
#include <stdint.h>

#if defined(SPPSBL_BUILDING_LIBRARY)
#define SPPSBL_API __attribute__((visibility("default")))
#else
#define SPPSBL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sppsbl_status {
  SPPSBL_OK = 0,
  SPPSBL_ERR_INVALID_ARGUMENT = 1, /* NULL handle, bad length, bad enum text */
  SPPSBL_ERR_CONFIG = 2,           /* malformed config or generator spec */
  SPPSBL_ERR_IO = 3,               /* file could not be read or written */
  SPPSBL_ERR_DIMENSION = 4,
  SPPSBL_ERR_DOMAIN = 5,
  SPPSBL_ERR_CONDITIONING = 6,     /* posterior factorization failed at every jitter level */
  SPPSBL_ERR_INVARIANT = 7,
  SPPSBL_ERR_GENERATION = 8,
  SPPSBL_ERR_INTERNAL = 9
} sppsbl_status;

typedef struct sppsbl_problem sppsbl_problem;
typedef struct sppsbl_config sppsbl_config;
typedef struct sppsbl_result sppsbl_result;

typedef struct sppsbl_metrics {
  double nmse;
  double corr;
  double srr;
  int success;
} sppsbl_metrics;

/* Overrides applied on top of an experiment config. Zero-initialize and set
 * what is needed. */
typedef struct sppsbl_run_options {
  unsigned threads;      /* 0: hardware concurrency */
  int trials;            /* 0: keep config */
  int has_seed;          /* nonzero: replace master_seed with seed */
  uint64_t seed;
  const char* out_dir;   /* NULL: keep config */
  int timing;            /* 0: keep config, 1: record, -1: write runtime_ms as 0 */
  const char* source;    /* name used in diagnostics; NULL: "<config>" */
} sppsbl_run_options;

SPPSBL_API const char* sppsbl_version(void);
SPPSBL_API const char* sppsbl_last_error(void);
SPPSBL_API const char* sppsbl_status_string(sppsbl_status status);

/* Problems. phi is row-major m x n; x_true may be NULL. */
SPPSBL_API sppsbl_status sppsbl_problem_create(const double* phi, size_t m, size_t n, const double* y,
                                               const double* x_true, sppsbl_problem** out);
SPPSBL_API sppsbl_status sppsbl_problem_load(const char* path, sppsbl_problem** out);
SPPSBL_API sppsbl_status sppsbl_problem_save(const sppsbl_problem* problem, const char* path);
/* generator_json is a generator object or an experiment config, whose
 * "generator" section is used. The instance seed is `seed` as given. */
SPPSBL_API sppsbl_status sppsbl_problem_generate(const char* generator_json, uint64_t seed,
                                                 sppsbl_problem** out);
SPPSBL_API void sppsbl_problem_destroy(sppsbl_problem* problem);
SPPSBL_API size_t sppsbl_problem_m(const sppsbl_problem* problem);
SPPSBL_API size_t sppsbl_problem_n(const sppsbl_problem* problem);
SPPSBL_API int sppsbl_problem_has_truth(const sppsbl_problem* problem);
SPPSBL_API sppsbl_status sppsbl_problem_copy_x_true(const sppsbl_problem* problem, double* out, size_t len);

/* Solver configuration; created with the library defaults. */
SPPSBL_API sppsbl_status sppsbl_config_create(sppsbl_config** out);
SPPSBL_API void sppsbl_config_destroy(sppsbl_config* config);
/* scheme: "spp", "pc_fixed" or "none"; fixed_beta is used by pc_fixed only. */
SPPSBL_API sppsbl_status sppsbl_config_set_scheme(sppsbl_config* config, const char* scheme, double fixed_beta);
SPPSBL_API sppsbl_status sppsbl_config_set_hyperpriors(sppsbl_config* config, double a, double b, double c,
                                                       double d, double g, double h);
SPPSBL_API sppsbl_status sppsbl_config_set_iterations(sppsbl_config* config, int max_iterations, double rel_tol);
SPPSBL_API sppsbl_status sppsbl_config_set_init(sppsbl_config* config, double alpha, double beta, double gamma);
SPPSBL_API sppsbl_status sppsbl_config_set_alpha_cap(sppsbl_config* config, double cap);
/* method: "bracketed" or "cardano". */
SPPSBL_API sppsbl_status sppsbl_config_set_root_method(sppsbl_config* config, const char* method);

SPPSBL_API sppsbl_status sppsbl_solve(const sppsbl_problem* problem, const sppsbl_config* config,
                                      sppsbl_result** out);
SPPSBL_API void sppsbl_result_destroy(sppsbl_result* result);
SPPSBL_API size_t sppsbl_result_n(const sppsbl_result* result);
SPPSBL_API int sppsbl_result_iterations(const sppsbl_result* result);
SPPSBL_API int sppsbl_result_converged(const sppsbl_result* result);
SPPSBL_API double sppsbl_result_gamma(const sppsbl_result* result);
SPPSBL_API sppsbl_status sppsbl_result_copy_x_hat(const sppsbl_result* result, double* out, size_t len);
SPPSBL_API sppsbl_status sppsbl_result_copy_alpha(const sppsbl_result* result, double* out, size_t len);
/* len must be n - 1. */
SPPSBL_API sppsbl_status sppsbl_result_copy_beta(const sppsbl_result* result, double* out, size_t len);
/* Scores the estimate against the problem's x_true; tau <= 0 picks the default. */
SPPSBL_API sppsbl_status sppsbl_result_metrics(const sppsbl_result* result, const sppsbl_problem* problem,
                                               double tau, sppsbl_metrics* out);

/* Experiments from config text (JSON, comments allowed). options may be NULL. */
SPPSBL_API sppsbl_status sppsbl_run_experiment(const char* config_text, const sppsbl_run_options* options);
SPPSBL_API sppsbl_status sppsbl_run_phase_grid(const char* config_text, const sppsbl_run_options* options);
/* Writes instance_<i>.json, i = 0..count-1, into out_dir. Instance i uses
 * seed derive(seed, 0, i), the same instance as trial i of a sweep-free
 * experiment with master seed `seed`. */
SPPSBL_API sppsbl_status sppsbl_generate_instances(const char* generator_json, uint64_t seed, size_t count,
                                                   const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SPPSBL_SPPSBL_H */
