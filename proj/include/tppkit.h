/* tppkit — temporal point process toolkit.
 *
 * C interface to the shared library.  Handles are opaque; every handle
 * returned by a tpp_* function must be released with the matching _free.
 * Functions that can fail either return NULL (pointer results) or a
 * tpp_status; the thread-local message from the most recent failure is
 * available via tpp_last_error().
 */
#ifndef TPPKIT_H
#define TPPKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpp_status {
  TPP_OK = 0,
  TPP_ERR_INVALID_ARGUMENT = 1,
  TPP_ERR_NON_MONOTONIC = 2,
  TPP_ERR_OUT_OF_WINDOW = 3,
  TPP_ERR_NEGATIVE_INTENSITY = 4,
  TPP_ERR_DOMINATING_RATE_OVERFLOW = 5,
  TPP_ERR_UNKNOWN_PRESET = 6,
  TPP_ERR_DEGENERATE_DATA = 7,
  TPP_ERR_ROLLOUT_OVERFLOW = 8,
  TPP_ERR_NON_FINITE_UPDATE = 9,
  TPP_ERR_NON_CONVERGENCE = 10,
  TPP_ERR_INSUFFICIENT_DATA = 11,
  TPP_ERR_IO = 12,
  TPP_ERR_PARSE = 13,
  TPP_ERR_UNKNOWN = 14
} tpp_status;

const char* tpp_version(void);
const char* tpp_status_name(tpp_status status);

/* message and status of the most recent failing call on this thread */
const char* tpp_last_error(void);
tpp_status tpp_last_status(void);

/* ---- datasets -------------------------------------------------------- */

typedef struct tpp_dataset tpp_dataset;

/* empty dataset over [0, window_end) */
tpp_dataset* tpp_dataset_new(double window_end);
/* times must be strictly increasing inside [0, window_end) */
tpp_status tpp_dataset_add_sequence(tpp_dataset* data, const double* times,
                                    size_t count);
tpp_dataset* tpp_dataset_load(const char* path);
tpp_status tpp_dataset_save(const tpp_dataset* data, const char* path);
void tpp_dataset_free(tpp_dataset* data);

double tpp_dataset_window(const tpp_dataset* data);
size_t tpp_dataset_size(const tpp_dataset* data);
size_t tpp_dataset_total_events(const tpp_dataset* data);
size_t tpp_dataset_sequence_length(const tpp_dataset* data, size_t index);
/* copies min(capacity, length) times; returns the sequence length */
size_t tpp_dataset_sequence_times(const tpp_dataset* data, size_t index,
                                  double* out, size_t capacity);

/* ---- intensity specifications and simulation ------------------------- */

typedef struct tpp_spec tpp_spec;

/* ip | hp | ip-hp1 | ip-hp2 (case-insensitive, '-'/'_' interchangeable) */
tpp_spec* tpp_spec_preset(const char* name);
tpp_spec* tpp_spec_load(const char* path);
tpp_status tpp_spec_save(const tpp_spec* spec, const char* path);
/* checks positivity/stability over [0, window_end) */
tpp_status tpp_spec_validate(const tpp_spec* spec, double window_end);
void tpp_spec_free(tpp_spec* spec);

/* conditional intensity at t given strictly earlier history times */
tpp_status tpp_intensity_at(const tpp_spec* spec, const double* history,
                            size_t count, double t, double* out);

/* n sequences on [0, window_end); sequence i is reproducible in isolation */
tpp_dataset* tpp_simulate(const tpp_spec* spec, double window_end, size_t n,
                          uint64_t seed, int threads);

/* ---- kernel statistics ----------------------------------------------- */

/* Gaussian-kernel MMD^2 between the pooled event times (V-statistic) */
tpp_status tpp_mmd2(const tpp_dataset* a, const tpp_dataset* b, double sigma,
                    double* out);
/* median pairwise distance among pooled times (subsampled above a cap) */
tpp_status tpp_median_bandwidth(const tpp_dataset* data, uint64_t seed,
                                double* out);

/* ---- gap policies ----------------------------------------------------- */

typedef struct tpp_policy tpp_policy;

/* dist: "exponential" | "rayleigh"; weights i.i.d. uniform(-scale, scale) */
tpp_policy* tpp_policy_init(int hidden_dim, const char* dist, double scale,
                            uint64_t seed);
/* reads the weights of a checkpoint (optimizer state, if any, is ignored) */
tpp_policy* tpp_policy_load(const char* path);
/* writes a checkpoint without optimizer state */
tpp_status tpp_policy_save(const tpp_policy* policy, const char* path);
void tpp_policy_free(tpp_policy* policy);

int tpp_policy_hidden_dim(const tpp_policy* policy);
const char* tpp_policy_distribution(const tpp_policy* policy);

/* n sampled trajectories on [0, window_end) */
tpp_dataset* tpp_policy_rollouts(const tpp_policy* policy, double window_end,
                                 size_t n, uint64_t seed, int threads);
/* sum of per-gap log-densities of the observed sequence (no censoring) */
tpp_status tpp_policy_log_likelihood(const tpp_policy* policy,
                                     const double* times, size_t count,
                                     double window_end, double* out);

/* ---- training --------------------------------------------------------- */

typedef struct tpp_config tpp_config;

tpp_config* tpp_config_default(void);
/* flat key = value file; unknown keys are rejected */
tpp_config* tpp_config_load(const char* path);
void tpp_config_free(tpp_config* config);

void tpp_config_set_seed(tpp_config* config, uint64_t seed);
void tpp_config_set_threads(tpp_config* config, int threads);
void tpp_config_set_iterations(tpp_config* config, size_t iterations);
size_t tpp_config_iterations(const tpp_config* config);
size_t tpp_config_checkpoint_interval(const tpp_config* config);

typedef struct tpp_trainer tpp_trainer;

/* fresh trainer: policy initialized from the config's seed */
tpp_trainer* tpp_trainer_new(const tpp_dataset* expert,
                             const tpp_config* config);
/* trainer restored from a checkpoint carrying optimizer state; continues
 * the original run bit-identically */
tpp_trainer* tpp_trainer_resume(const tpp_dataset* expert,
                                const tpp_config* config, const char* path);
void tpp_trainer_free(tpp_trainer* trainer);

size_t tpp_trainer_iteration(const tpp_trainer* trainer);
/* one mini-batch ascent step; fills the trace fields when non-NULL */
tpp_status tpp_trainer_step(tpp_trainer* trainer, double* mmd2,
                            double* mean_return, double* grad_norm,
                            double* wall_ms);
/* snapshot of the current weights */
tpp_policy* tpp_trainer_policy(const tpp_trainer* trainer);
/* checkpoint with optimizer state, resumable via tpp_trainer_resume */
tpp_status tpp_trainer_save_checkpoint(const tpp_trainer* trainer,
                                       const char* path);

typedef struct tpp_trace tpp_trace;

tpp_trace* tpp_trace_new(void);
void tpp_trace_free(tpp_trace* trace);
void tpp_trace_push(tpp_trace* trace, size_t iteration, double mmd2,
                    double mean_return, double grad_norm, double wall_ms);
size_t tpp_trace_size(const tpp_trace* trace);
/* CSV with header iter,mmd2,mean_return,grad_norm,wall_ms; wall_ms written
 * as 0 unless include_timing (keeps reruns byte-identical) */
tpp_status tpp_trace_save(const tpp_trace* trace, const char* path,
                          int include_timing);

/* ---- maximum-likelihood baselines ------------------------------------- */

typedef struct tpp_fit tpp_fit;

tpp_fit* tpp_fit_hawkes(const tpp_dataset* data);
tpp_fit* tpp_fit_ip(const tpp_dataset* data, int components);
tpp_fit* tpp_fit_sc(const tpp_dataset* data);
tpp_fit* tpp_fit_policy_mle(const tpp_dataset* data, int hidden_dim,
                            const char* dist, size_t iterations,
                            double learning_rate, size_t batch, uint64_t seed);
tpp_fit* tpp_fit_load(const char* path);
tpp_status tpp_fit_save(const tpp_fit* fit, const char* path);
void tpp_fit_free(tpp_fit* fit);

/* hawkes | ip | sc | policy-mle */
const char* tpp_fit_model(const tpp_fit* fit);
double tpp_fit_loglik(const tpp_fit* fit);
/* n fresh draws from the fitted model */
tpp_dataset* tpp_fit_resimulate(const tpp_fit* fit, double window_end,
                                size_t n, uint64_t seed, int threads);

/* ---- evaluation ------------------------------------------------------- */

typedef struct tpp_report tpp_report;

/* Binned-intensity comparison plus kernel discrepancies of every candidate
 * against the expert data.  sigma <= 0 selects the expert's median
 * bandwidth. */
tpp_report* tpp_report_new(const tpp_dataset* expert, size_t bins,
                           double sigma, int threads);
tpp_status tpp_report_add_candidate(tpp_report* report, const char* name,
                                    const tpp_dataset* data);
void tpp_report_free(tpp_report* report);

size_t tpp_report_candidates(const tpp_report* report);
double tpp_report_sigma(const tpp_report* report);
tpp_status tpp_report_candidate_mae(const tpp_report* report, size_t index,
                                    double* out);
tpp_status tpp_report_candidate_mmd2(const tpp_report* report, size_t index,
                                     double* out);

typedef struct tpp_rescale tpp_rescale;

/* Compensator transform of every sequence under the given model; gaps pool
 * across sequences for the QQ curve, and each sequence long enough
 * contributes a KS p-value. */
tpp_rescale* tpp_rescale_spec(const tpp_dataset* data, const tpp_spec* spec,
                              size_t quantiles);
tpp_rescale* tpp_rescale_fit(const tpp_dataset* data, const tpp_fit* fit,
                             size_t quantiles);
tpp_rescale* tpp_rescale_policy(const tpp_dataset* data,
                                const tpp_policy* policy, size_t quantiles);
void tpp_rescale_free(tpp_rescale* rescale);

size_t tpp_rescale_gap_count(const tpp_rescale* rescale);
/* KS of all pooled gaps against the unit exponential */
tpp_status tpp_rescale_pooled_ks(const tpp_rescale* rescale, double* statistic,
                                 double* p_value);
/* fraction of per-sequence KS tests with p > 0.05 */
tpp_status tpp_rescale_ks_pass_rate(const tpp_rescale* rescale, double* rate,
                                    size_t* sequences);
size_t tpp_rescale_qq_size(const tpp_rescale* rescale);
size_t tpp_rescale_qq(const tpp_rescale* rescale, double* theoretical,
                      double* empirical, size_t capacity);

/* attaches a candidate's rescale diagnostics to the report files */
tpp_status tpp_report_attach_rescale(tpp_report* report, size_t index,
                                     const tpp_rescale* rescale);
/* writes intensity.csv, summary.json, and per-candidate qq_/pvalues_ CSVs */
tpp_status tpp_report_write(const tpp_report* report, const char* dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TPPKIT_H */
