/*
 * specfilter — C API for non-monotonic threshold regularization of discrete
 * ill-posed inverse problems.
 *
 * The library exposes an opaque-handle, error-code surface over the C++ core:
 *
 *   - sf_system:    a singular system {b_i; phi_i, psi_i}, built from a dense
 *                   operator matrix or from a spectrum alone,
 *   - array-level operations: sequence reduction, filters, model selectors,
 *                   exact risks and oracles,
 *   - sf_artifacts: outputs of one command run (estimate, check-bounds, ...),
 *                   writable to a directory together with a hash manifest.
 *
 * Every function returns SF_OK or an error code; sf_last_error() returns a
 * thread-local message for the most recent failure on the calling thread.
 * Buffers are caller-allocated with lengths given by the sf_system accessors
 * or the documented argument. All handles are freed by their sf_*_free call.
 */

#ifndef SPECFILTER_H
#define SPECFILTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPECFILTER_API __declspec(dllexport)
#else
#define SPECFILTER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_ARGUMENT = 1,
  SF_ERR_DIMENSION_MISMATCH = 2,
  SF_ERR_RANK_DEFICIENT = 3,
  SF_ERR_ZERO_OBSERVED_EIGENVALUE = 4,
  SF_ERR_DEGENERATE_SIGNAL = 5,
  SF_ERR_CERTIFICATE_VIOLATED = 6,
  SF_ERR_UNKNOWN_FAMILY = 7,
  SF_ERR_UNKNOWN_ESTIMATOR = 8,
  SF_ERR_PARSE = 9,
  SF_ERR_IO = 10,
  SF_ERR_INTERNAL = 11
} sf_status;

SPECFILTER_API const char* sf_version(void);
SPECFILTER_API const char* sf_status_name(sf_status status);
SPECFILTER_API const char* sf_last_error(void);

/* ------------------------------------------------------------------------ */
/* Singular systems                                                          */
/* ------------------------------------------------------------------------ */

typedef struct sf_system sf_system;

/* SVD of a dense row-major rows x cols matrix; singular values at or below
 * tolerance * max|b_i| are SF_ERR_RANK_DEFICIENT rather than truncated. */
SPECFILTER_API sf_status sf_system_from_matrix(const double* row_major, size_t rows, size_t cols,
                                               double tolerance, sf_system** out);

/* Spectrum-only system (implicit identity bases); b_i nonzero, b_i^2
 * non-increasing. */
SPECFILTER_API sf_status sf_system_from_spectrum(const double* b, size_t n, sf_system** out);

/* Operator input files: CSV with header "rows,cols" then data rows, or JSON
 * {"b": [...]}. */
SPECFILTER_API sf_status sf_system_from_csv(const char* path, double tolerance, sf_system** out);
SPECFILTER_API sf_status sf_system_from_json(const char* text, sf_system** out);

SPECFILTER_API void sf_system_free(sf_system* system);
SPECFILTER_API size_t sf_system_n(const sf_system* system);
SPECFILTER_API size_t sf_system_d(const sf_system* system);
SPECFILTER_API sf_status sf_system_spectrum(const sf_system* system, double* out /* n */);

/* sigma_i^2 = sigma^2 b_i^-2 / n */
SPECFILTER_API sf_status sf_noise_variances(const sf_system* system, double sigma,
                                            double* out /* n */);

/* ydag_i = b_i^-1 <y, psi_i>_n; variances_out may be NULL */
SPECFILTER_API sf_status sf_to_sequence(const sf_system* system, const double* y /* n */,
                                        double sigma, double* ydag_out /* n */,
                                        double* variances_out /* n */);

/* sum_i coeffs_i phi_i */
SPECFILTER_API sf_status sf_synthesize(const sf_system* system, const double* coeffs /* n */,
                                       double* out /* d */);

/* ------------------------------------------------------------------------ */
/* Filters, selectors, risks (plain arrays, no handle needed)                */
/* ------------------------------------------------------------------------ */

SPECFILTER_API sf_status sf_spectral_cutoff(size_t k, size_t n, double* lambda_out /* n */);

SPECFILTER_API sf_status sf_tikhonov(double tau, const double* variances, size_t n,
                                     double* lambda_out /* n */);

/* mu_i = max{beta log(n^2 sigma_i^2), 0} */
SPECFILTER_API sf_status sf_threshold_mu(const double* variances, size_t n, double beta,
                                         double* mu_out /* n */);

/* {i : ydag_i^2 >= 4 sigma_i^2 mu_i}; selected_out[i] in {0,1} */
SPECFILTER_API sf_status sf_threshold_select(const double* ydag, const double* variances, size_t n,
                                             double beta, uint8_t* selected_out /* n */);

/* {i : ydag_i^2 >= 2 sigma_i^2} */
SPECFILTER_API sf_status sf_ure_select(const double* ydag, const double* variances, size_t n,
                                       uint8_t* selected_out /* n */);

/* m* = {i : x_i^2 >= sigma_i^2} */
SPECFILTER_API sf_status sf_oracle_model(const double* x, const double* variances, size_t n,
                                         uint8_t* selected_out /* n */);

/* lambda*_i = x_i^2 / (x_i^2 + sigma_i^2) */
SPECFILTER_API sf_status sf_oracle_filter(const double* x, const double* variances, size_t n,
                                          double* lambda_out /* n */);

/* bias = sum_{i not in m} x_i^2, variance = sum_{i in m} sigma_i^2 */
SPECFILTER_API sf_status sf_exact_model_risk(const uint8_t* selected, const double* x,
                                             const double* variances, size_t n, double* bias_out,
                                             double* variance_out, double* total_out);

/* sum_i (1-lambda_i)^2 x_i^2 + lambda_i^2 sigma_i^2 */
SPECFILTER_API sf_status sf_exact_filter_risk(const double* lambda, const double* x,
                                              const double* variances, size_t n, double* out);

/* mhat_xi = {i : ytilde_i^2 > 8 sigmahat_i^2 nu_i, |bhat_i| > alpha s} */
SPECFILTER_API sf_status sf_noisy_threshold_select(const double* ytilde, const double* bhat,
                                                   size_t n, double sigma, double beta,
                                                   double alpha, double s,
                                                   uint8_t* selected_out /* n */);

/* ------------------------------------------------------------------------ */
/* Command layer                                                             */
/* ------------------------------------------------------------------------ */

typedef struct sf_artifacts sf_artifacts;

/* Runs one command to completion. command is one of: estimate |
 * oracle-report | check-bounds | noisy-op | certify-tails | gen-instance.
 * config_json is the config document text; overrides_json (may be NULL) is a
 * flat JSON object merged over the config top level; base_dir (may be NULL)
 * resolves relative instance paths. */
SPECFILTER_API sf_status sf_cmd_run(const char* command, const char* config_json,
                                    const char* overrides_json, const char* base_dir,
                                    sf_artifacts** out);

SPECFILTER_API size_t sf_artifacts_count(const sf_artifacts* artifacts);
SPECFILTER_API const char* sf_artifacts_name(const sf_artifacts* artifacts, size_t index);
SPECFILTER_API const char* sf_artifacts_content(const sf_artifacts* artifacts, size_t index);

/* 1 when every bound report and tail certificate in the run held; feeds the
 * CLI's --strict exit code. */
SPECFILTER_API int sf_artifacts_all_satisfied(const sf_artifacts* artifacts);

/* Writes all artifacts under out_dir plus manifest.json (name, bytes,
 * sha256 per artifact). */
SPECFILTER_API sf_status sf_artifacts_write(const sf_artifacts* artifacts, const char* out_dir);

SPECFILTER_API void sf_artifacts_free(sf_artifacts* artifacts);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPECFILTER_H */
