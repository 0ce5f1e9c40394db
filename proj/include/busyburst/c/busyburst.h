/* C interface to the busyburst library.
 *
 * All objects are opaque handles created and released by the library. Every
 * fallible call returns a bb_status; on failure bb_last_error() returns a
 * message describing the most recent error on the calling thread. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with bb_string_free().
 */
#ifndef BUSYBURST_C_BUSYBURST_H
#define BUSYBURST_C_BUSYBURST_H

#include <stddef.h>
#include <stdint.h>

#if defined(BUSYBURST_BUILDING_LIBRARY)
#define BB_API __attribute__((visibility("default")))
#else
#define BB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bb_status {
  BB_OK = 0,
  BB_ERR_INVALID_ARGUMENT = 1,
  BB_ERR_PARSE = 2,
  BB_ERR_IO = 3,
  BB_ERR_INVALID_PARAMETER = 4,
  BB_ERR_INVALID_PROBABILITY = 5,
  BB_ERR_NON_NEGATIVE_DRIFT = 6,
  BB_ERR_REDUCIBLE_CHAIN = 7,
  BB_ERR_DUPLICATE_STATE_VALUE = 8,
  BB_ERR_NON_CONVERGENCE = 9,
  BB_ERR_NO_POSITIVE_ROOT = 10,
  BB_ERR_OUT_OF_SUPPORT = 11,
  BB_ERR_EXCESSIVE_TRUNCATION = 12,
  BB_ERR_EMPTY_TABLE = 13,
  BB_ERR_INSUFFICIENT_DATA = 14,
  BB_ERR_SINGLE_STATE = 15,
  BB_ERR_NON_NEGATIVE_SAMPLE_DRIFT = 16,
  BB_ERR_INTERNAL = 99
} bb_status;

typedef enum bb_series_kind { BB_SERIES_IID = 0, BB_SERIES_MARKOV = 1 } bb_series_kind;

typedef struct bb_model bb_model;
typedef struct bb_campaign bb_campaign;

typedef struct bb_summary {
  double delta;
  double x_star;
  double lambda_star;
  double K;
  double integral_lambda;
} bb_summary;

typedef struct bb_symmetry {
  int symmetric;
  double max_defect;
  double x_star_defect;
  double lambda_star_defect;
  int identities_hold;
} bb_symmetry;

typedef struct bb_outcome {
  uint64_t tau;
  double area;
  double max_height;
  int truncated;
} bb_outcome;

typedef struct bb_campaign_config {
  uint64_t n_paths;
  uint64_t base_seed;
  uint64_t max_steps;
  const double* thresholds; /* NULL: default geometric grid */
  size_t n_thresholds;
  unsigned workers; /* 0: hardware concurrency */
  int record_extremes;
} bb_campaign_config;

typedef struct bb_estimate {
  double lambda_star_hat;
  double K_hat;
  double integral_lambda;
  uint64_t n;
  bb_series_kind kind;
  double drift_estimate;
  double bracket_lo;
  double bracket_hi;
  double theta_max;
  size_t distinct_values;
} bb_estimate;

/* library */
BB_API const char* bb_version(void);
BB_API const char* bb_status_name(bb_status status);
BB_API const char* bb_last_error(void);
BB_API void bb_string_free(char* s);

/* models */
BB_API bb_status bb_model_parse(const char* json, bb_model** out);
BB_API bb_status bb_model_load(const char* path, bb_model** out);
BB_API void bb_model_free(bb_model* model);
BB_API const char* bb_model_kind(const bb_model* model);
BB_API bb_status bb_model_drift(const bb_model* model, double* out);
BB_API bb_status bb_model_scgf(const bb_model* model, double theta, double* out);
BB_API bb_status bb_model_scgf_derivative(const bb_model* model, double theta, double* out);
/* Writes the first n increments of stream (seed, stream_id). */
BB_API bb_status bb_model_sample(const bb_model* model, uint64_t seed, uint64_t stream_id, double* out, size_t n);

/* large-deviation quantities */
BB_API bb_status bb_ldp_summary(const bb_model* model, bb_summary* out);
BB_API bb_status bb_rate_function(const bb_model* model, double x, double* out);
BB_API bb_status bb_symmetry_check(const bb_model* model, bb_symmetry* out);
BB_API bb_status bb_most_likely_duration(const bb_model* model, double b, double* out);
BB_API bb_status bb_psi_star(const bb_model* model, const double* t, size_t n, double* out);
BB_API bb_status bb_psi_star_b(const bb_model* model, double b, const double* t, size_t n, double* out);
BB_API bb_status bb_varphi_star(const bb_model* model, double h, const double* t, size_t n, double* out);
/* summary.json and paths.csv contents of the `analyze` command. */
BB_API bb_status bb_analyze_report(const bb_model* model, double height, size_t points, char** summary_json,
                                   char** paths_csv);
/* psi* on [0,1], plus psi*_b for area > 0 and varphi* for height > 0. */
BB_API bb_status bb_paths_csv(const bb_model* model, double area, double height, size_t points, char** csv);

/* simulation */
BB_API bb_status bb_run_busy_period(const bb_model* model, uint64_t seed, uint64_t stream_id, uint64_t max_steps,
                                    bb_outcome* out);
BB_API bb_status bb_replay_busy_period(const double* increments, size_t n, bb_outcome* out);
BB_API void bb_campaign_config_init(bb_campaign_config* config);
BB_API bb_status bb_simulate(const bb_model* model, const bb_campaign_config* config, bb_campaign** out);
BB_API void bb_campaign_free(bb_campaign* campaign);
/* Borrowed views valid until bb_campaign_free. */
BB_API bb_status bb_campaign_tail(const bb_campaign* campaign, size_t* n_thresholds, const double** thresholds,
                                  const uint64_t** counts, uint64_t* n_paths);
BB_API bb_status bb_campaign_kappa(const bb_campaign* campaign, double* out);
BB_API bb_status bb_campaign_tail_csv(const bb_campaign* campaign, char** out);
BB_API bb_status bb_campaign_extremes_csv(const bb_campaign* campaign, char** out);
BB_API bb_status bb_campaign_summary_json(const bb_campaign* campaign, char** out);

/* estimation from observed increments; json may be NULL */
BB_API bb_status bb_estimate_values(const double* values, size_t n, bb_series_kind kind, bb_estimate* out,
                                    char** json);
BB_API bb_status bb_estimate_file(const char* path, bb_series_kind kind, bb_estimate* out, char** json);

#ifdef __cplusplus
}
#endif

#endif /* BUSYBURST_C_BUSYBURST_H */
