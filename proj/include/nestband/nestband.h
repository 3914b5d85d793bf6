#ifndef NESTBAND_H
#define NESTBAND_H

/* C interface to the nestband covariance toolkit.
 *
 * Every function returns an nb_status. On failure nb_last_error() describes
 * the problem (thread-local, valid until the next call on the same thread).
 * Objects are opaque handles released with their *_free function; passing
 * NULL to a *_free function is a no-op. Matrices are exchanged row-major.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NB_API __declspec(dllexport)
#else
#define NB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  NB_OK = 0,
  NB_ERR_ARGUMENT = 1, /* null pointer, bad name, out-of-range value */
  NB_ERR_DOMAIN = 2,   /* input violates a precondition */
  NB_ERR_PARSE = 3,    /* malformed CSV, config or grid text */
  NB_ERR_IO = 4,       /* file cannot be read or written */
  NB_ERR_SINGULAR = 5, /* a required inverse does not exist */
  NB_ERR_INTERNAL = 6  /* an algorithmic guarantee failed (a bug) */
} nb_status;

NB_API const char* nb_last_error(void);
NB_API const char* nb_version(void);
NB_API const char* nb_rng_algorithm(void);

/* ---- matrices ---- */

typedef struct nb_matrix nb_matrix;

NB_API nb_status nb_matrix_create(size_t rows, size_t cols, const double* values, nb_matrix** out);
NB_API nb_status nb_matrix_read_csv(const char* path, nb_matrix** out);
NB_API nb_status nb_matrix_write_csv(const nb_matrix* m, const char* path);
NB_API size_t nb_matrix_rows(const nb_matrix* m);
NB_API size_t nb_matrix_cols(const nb_matrix* m);
NB_API nb_status nb_matrix_get(const nb_matrix* m, size_t row, size_t col, double* out);
/* Copies rows*cols values into `out` (row-major). */
NB_API nb_status nb_matrix_copy(const nb_matrix* m, double* out, size_t capacity);
NB_API void nb_matrix_free(nb_matrix* m);

/* ---- fitting ---- */

typedef enum { NB_SOLVER_LQA = 0, NB_SOLVER_SHOOTING = 1 } nb_solver;

typedef struct {
  nb_solver solver;
  int max_iters;
  double rel_tol;
  double zero_threshold;
  double stability_floor;
} nb_fit_options;

NB_API nb_fit_options nb_fit_options_default(void);

typedef struct nb_estimator nb_estimator;

/* `family`: sample, ledoit-wolf, banding, lasso, j0, j1, j2. `grid` uses
 * "key=values;..." (keys lambda, lambda2, ratio, k); NULL or "" selects the
 * default grid for dimension p and training size n. */
NB_API nb_status nb_estimator_create(const char* family, const char* grid, size_t p, size_t n,
                                     nb_estimator** out);
NB_API size_t nb_estimator_candidates(const nb_estimator* e);
NB_API const char* nb_estimator_family(const nb_estimator* e);
NB_API void nb_estimator_free(nb_estimator* e);

typedef struct nb_fit nb_fit;

/* Centers `data` by its column means and fits. With one candidate the fit is
 * direct; otherwise the candidate is chosen by `folds`-fold cross-validated
 * likelihood (folds >= 2) with the given seed. */
NB_API nb_status nb_fit_kfold(const nb_matrix* data, const nb_estimator* e, const nb_fit_options* opts,
                              int folds, uint64_t seed, nb_fit** out);
/* Chooses the candidate on a validation set (shifted by the training
 * means), then keeps the training fit. */
NB_API nb_status nb_fit_validation(const nb_matrix* train, const nb_matrix* valid, const nb_estimator* e,
                                   const nb_fit_options* opts, nb_fit** out);
/* Selected tuning values, e.g. "lambda=0.1;lambda2=0.01" ("" when none). */
NB_API const char* nb_fit_parameters(const nb_fit* f);
NB_API int nb_fit_is_singular(const nb_fit* f);
NB_API int nb_fit_has_factors(const nb_fit* f);
NB_API nb_status nb_fit_covariance(const nb_fit* f, nb_matrix** out);
NB_API nb_status nb_fit_precision(const nb_fit* f, nb_matrix** out);
/* T = I - Phi (p x p); NB_ERR_DOMAIN for estimators without factors. */
NB_API nb_status nb_fit_factor(const nb_fit* f, nb_matrix** out);
/* Innovation variances as a p x 1 matrix. */
NB_API nb_status nb_fit_variances(const nb_fit* f, nb_matrix** out);
/* Per-row bandwidth k_j as a p x 1 matrix. */
NB_API nb_status nb_fit_bandwidths(const nb_fit* f, nb_matrix** out);
NB_API void nb_fit_free(nb_fit* f);

/* ---- simulation ---- */

typedef struct nb_model nb_model;

/* `name`: sigma1, sigma2, sigma3. `blocks` <= 0 picks the default for p.
 * `layout` (sigma3): "start" or "width"; NULL means "start". */
NB_API nb_status nb_model_create(const char* name, size_t p, int blocks, const char* layout, uint64_t seed,
                                 uint64_t stream, nb_model** out);
NB_API nb_status nb_model_sigma(const nb_model* m, nb_matrix** out);
NB_API nb_status nb_model_omega(const nb_model* m, nb_matrix** out);
NB_API nb_status nb_model_factor(const nb_model* m, nb_matrix** out);
/* Non-empty when the covariance is poorly conditioned. */
NB_API const char* nb_model_warning(const nb_model* m);
/* `distribution`: gaussian or t3. */
NB_API nb_status nb_model_sample(const nb_model* m, const char* distribution, size_t n, uint64_t seed,
                                 uint64_t stream, nb_matrix** out);
NB_API void nb_model_free(nb_model* m);

/* ---- losses ---- */

/* `is_na` is set to 1 (and `out` to NaN) when the estimate is singular. */
NB_API nb_status nb_kl_loss(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double* out, int* is_na);
NB_API nb_status nb_entropy_loss(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double* out,
                                 int* is_na);
/* out[0..3] = L1, L2 (operator), Frobenius, Linf norms of the difference. */
NB_API nb_status nb_norm_losses(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double out[4]);

typedef enum { NB_LEVEL_FACTOR = 0, NB_LEVEL_PRECISION = 1 } nb_level;

NB_API nb_status nb_zero_frequency(const nb_matrix* const* fits, size_t count, nb_level level,
                                   double zero_tol, nb_matrix** out);

/* ---- classification ---- */

typedef struct nb_labels nb_labels;

/* `label_col` is 0-based; -1 selects the last column. */
NB_API nb_status nb_labeled_read_csv(const char* path, int label_col, nb_matrix** values, nb_labels** labels);
NB_API nb_status nb_labels_create(const char* const* labels, size_t count, nb_labels** out);
NB_API size_t nb_labels_count(const nb_labels* l);
NB_API const char* nb_labels_get(const nb_labels* l, size_t i);
NB_API void nb_labels_free(nb_labels* l);

typedef struct nb_classifier nb_classifier;

/* `kind`: lda, qda, naive-bayes. `e` may be NULL for naive-bayes. */
NB_API nb_status nb_classifier_fit(const char* kind, const nb_matrix* values, const nb_labels* labels,
                                   const nb_estimator* e, const nb_fit_options* opts, int folds, uint64_t seed,
                                   nb_classifier** out);
NB_API size_t nb_classifier_classes(const nb_classifier* c);
NB_API const char* nb_classifier_class(const nb_classifier* c, size_t i);
NB_API const char* nb_classifier_parameters(const nb_classifier* c);
/* Scores for one observation; `out` must hold nb_classifier_classes values. */
NB_API nb_status nb_classifier_scores(const nb_classifier* c, const double* x, size_t p, double* out);
NB_API nb_status nb_classifier_predict(const nb_classifier* c, const double* x, size_t p, size_t* class_index);
/* Predicts every row; labels not among the classes count as errors. */
NB_API nb_status nb_classifier_test_error(const nb_classifier* c, const nb_matrix* values,
                                          const nb_labels* labels, size_t* errors, double* rate);
NB_API void nb_classifier_free(nb_classifier* c);

/* ---- benchmark ---- */

typedef struct nb_config nb_config;

NB_API nb_status nb_config_create(nb_config** out);
/* Applies a "key = value" file on top of the current settings. */
NB_API nb_status nb_config_read(nb_config* c, const char* path);
NB_API nb_status nb_config_set(nb_config* c, const char* key, const char* value);
/* Number of config keys and their names/descriptions (for help text). */
NB_API size_t nb_config_key_count(void);
NB_API const char* nb_config_key_name(size_t i);
NB_API const char* nb_config_key_help(size_t i);
NB_API const char* nb_config_output_dir(const nb_config* c);
NB_API void nb_config_free(nb_config* c);

typedef struct nb_report nb_report;

/* threads <= 0 uses NESTBAND_THREADS or the hardware concurrency. */
NB_API nb_status nb_benchmark_run(const nb_config* c, int threads, nb_report** out);
NB_API nb_status nb_report_write(const nb_report* r, const char* dir);
NB_API const char* nb_report_summary_csv(const nb_report* r);
NB_API const char* nb_report_replications_csv(const nb_report* r);
NB_API size_t nb_report_warning_count(const nb_report* r);
NB_API const char* nb_report_warning(const nb_report* r, size_t i);
NB_API void nb_report_free(nb_report* r);

#ifdef __cplusplus
}
#endif

#endif /* NESTBAND_H */
