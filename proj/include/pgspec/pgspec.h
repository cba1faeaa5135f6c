#ifndef PGSPEC_PGSPEC_H
#define PGSPEC_PGSPEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(PGSPEC_BUILDING_LIBRARY)
#define PGS_API __attribute__((visibility("default")))
#else
#define PGS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pgs_status {
  PGS_OK = 0,
  PGS_INVALID_ARGUMENT = 1,
  PGS_DOMAIN = 2,
  PGS_TRUNCATION = 3,
  PGS_NUMERICAL = 4,
  PGS_PARSE = 5,
  PGS_VALIDATION = 6,
  PGS_ENCODING = 7,
  PGS_IO = 8,
  PGS_INTERNAL = 9
} pgs_status;

typedef struct pgs_dataset pgs_dataset;
typedef struct pgs_prior pgs_prior;
typedef struct pgs_auxiliary pgs_auxiliary;

/* phase is "chain" or "estimate"; may be called from worker threads. */
typedef void (*pgs_progress_fn)(const char* phase, uint64_t done, uint64_t total, void* user);

/* Message of the last failure on the calling thread ("" if none). */
PGS_API const char* pgs_last_error(void);
PGS_API const char* pgs_status_name(pgs_status status);
PGS_API const char* pgs_version(void);

/* Every char* handed out by this library is released here. */
PGS_API void pgs_string_free(char* s);

/* ---- data ---------------------------------------------------------------- */

PGS_API pgs_status pgs_dataset_load_german(const char* path, int standardize_numeric, pgs_dataset** out);
/* X is n x p, row-major; y entries are 0 or 1. */
PGS_API pgs_status pgs_dataset_create(const double* X, const int* y, size_t n, size_t p, pgs_dataset** out);
PGS_API void pgs_dataset_free(pgs_dataset* data);
PGS_API pgs_status pgs_dataset_shape(const pgs_dataset* data, size_t* n, size_t* p, size_t* positives);
PGS_API pgs_status pgs_dataset_fingerprint(const pgs_dataset* data, uint64_t* out);
/* Writes p doubles. */
PGS_API pgs_status pgs_dataset_mle(const pgs_dataset* data, double* beta_out);

/* ---- prior --------------------------------------------------------------- */

/* b = mean * 1, B = variance * I. */
PGS_API pgs_status pgs_prior_isotropic(size_t p, double mean, double variance, pgs_prior** out);
/* B is p x p row-major, symmetric positive definite. */
PGS_API pgs_status pgs_prior_create(const double* b, const double* B, size_t p, pgs_prior** out);
PGS_API void pgs_prior_free(pgs_prior* prior);

/* ---- Gibbs chain --------------------------------------------------------- */

typedef struct pgs_chain_options {
  uint64_t total_iterations;
  uint64_t burn_in;
  uint64_t seed;
  uint64_t chain_id;
  const double* init_beta; /* p entries, or NULL for the MLE */
  const char* draws_csv;   /* NULL for none */
  uint64_t progress_every; /* 0 disables progress callbacks */
} pgs_chain_options;

PGS_API void pgs_chain_options_default(pgs_chain_options* opts);

/* Summary JSON: mean, covariance, iterations, burn_in, seed, kept. */
PGS_API pgs_status pgs_run_chain(const pgs_dataset* data, const pgs_prior* prior, const pgs_chain_options* opts,
                                 pgs_progress_fn progress, void* user, char** summary_json);

/* ---- auxiliary Student's t density --------------------------------------- */

/* Pilot chain, then location = ergodic mean, scale = ergodic covariance.
   summary_json may be NULL. */
PGS_API pgs_status pgs_auxiliary_tune(const pgs_dataset* data, const pgs_prior* prior, const pgs_chain_options* opts,
                                      double nu, pgs_progress_fn progress, void* user, pgs_auxiliary** out,
                                      char** summary_json);
/* scale is p x p row-major. */
PGS_API pgs_status pgs_auxiliary_create(const double* location, const double* scale, size_t p, double nu,
                                        pgs_auxiliary** out);
/* {"location": [...], "scale": [[...], ...], "dof": nu} */
PGS_API pgs_status pgs_auxiliary_to_json(const pgs_auxiliary* h, char** json);
PGS_API pgs_status pgs_auxiliary_from_json(const char* json, pgs_auxiliary** out);
PGS_API void pgs_auxiliary_free(pgs_auxiliary* h);

/* ---- spectral gap estimation --------------------------------------------- */

typedef struct pgs_estimator_options {
  unsigned l;
  uint64_t N;
  uint64_t seed;
  unsigned workers;
  double confidence_level;
  const uint64_t* snapshots; /* prefix sizes, may be NULL */
  size_t n_snapshots;
  double progress_interval_seconds;
} pgs_estimator_options;

PGS_API void pgs_estimator_options_default(pgs_estimator_options* opts);

/* GapEstimate JSON; derived fields are null when u_defined is false. */
PGS_API pgs_status pgs_estimate_gap(const pgs_dataset* data, const pgs_prior* prior, const pgs_auxiliary* h,
                                    const pgs_estimator_options* opts, pgs_progress_fn progress, void* user,
                                    char** gap_json);

/* *ok = 1 iff (s_l - 1)^{1/l} is nonincreasing along the given pairs. */
PGS_API pgs_status pgs_u_monotone(const unsigned* l, const double* s, size_t count, int* ok);

/* ---- birth-death oracle and self checks ---------------------------------- */

/* Exact spectrum of the m-state truncation, trace sum, s_l and u_l for
   l = 1..l_max, plus discrete Monte Carlo cross-checks with N draws
   (skipped when N == 0). */
PGS_API pgs_status pgs_bd_demo(uint64_t m, unsigned l_max, uint64_t N, uint64_t seed, char** json);

/* *all_passed = 1 iff every check passed. */
PGS_API pgs_status pgs_validate(uint64_t seed, int* all_passed, char** json);

#ifdef __cplusplus
}
#endif

#endif
