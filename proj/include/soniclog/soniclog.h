/* soniclog — well-log reconstruction toolkit.
 *
 * C interface over the C++ core: opaque handles, integer status codes,
 * UTF-8 strings.  Every function returns SONIC_OK (0) on success or a
 * SONIC_E_* code; sonic_last_error() describes the most recent failure on
 * the calling thread.  Strings returned through char** are owned by the
 * caller and released with sonic_free_string().
 */
#ifndef SONICLOG_H
#define SONICLOG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  SONIC_OK = 0,
  SONIC_E_INVALID_ARGUMENT = 1,
  SONIC_E_SCHEMA = 2,
  SONIC_E_PARSE = 3,
  SONIC_E_EMPTY_INPUT = 4,
  SONIC_E_INVALID_INPUT = 5,
  SONIC_E_MODEL_FORMAT = 6,
  SONIC_E_UNSUPPORTED = 7,
  SONIC_E_IO = 8,
  SONIC_E_INTERNAL = 9
};

/* Column kinds for sonic_config_set_schema. */
enum {
  SONIC_COL_FEATURE = 0,
  SONIC_COL_TARGET = 1,
  SONIC_COL_DEPTH_INDEX = 2
};

typedef struct sonic_config sonic_config;
typedef struct sonic_table sonic_table;
typedef struct sonic_model sonic_model;
typedef struct sonic_predictions sonic_predictions;

const char* sonic_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* sonic_last_error(void);

void sonic_free_string(char* s);

/* -------- configuration ------------------------------------------------- */

/* Starts from the standard seven-input/two-target well-log schema with the
 * resistivity columns marked for log-transform. */
int sonic_config_create(sonic_config** out);
void sonic_config_destroy(sonic_config* cfg);

/* Replaces the column schema. kinds[i] is one of the SONIC_COL_* values;
 * units may be NULL (empty units). */
int sonic_config_set_schema(sonic_config* cfg, const char* const* names,
                            const char* const* units, const int* kinds,
                            size_t n);
int sonic_config_set_log_columns(sonic_config* cfg, const char* const* names,
                                 size_t n);
int sonic_config_set_sentinels(sonic_config* cfg, const double* values,
                               size_t n);
int sonic_config_set_epsilon(sonic_config* cfg, double epsilon);
/* target must be one of the schema's target-kind columns. */
int sonic_config_set_target(sonic_config* cfg, const char* target);
/* family: "rf" | "gbdt" | "xgb" | "ngboost". */
int sonic_config_set_family(sonic_config* cfg, const char* family);
int sonic_config_set_params(sonic_config* cfg, int n_estimators,
                            double learning_rate, int max_depth,
                            int min_samples_leaf, int feature_subsample,
                            double lambda, double gamma, int bootstrap);
int sonic_config_set_seed(sonic_config* cfg, uint64_t seed);
int sonic_config_set_level(sonic_config* cfg, double level);
int sonic_config_set_flag_k(sonic_config* cfg, double k);

/* -------- tables --------------------------------------------------------- */

/* Load a CSV with the configured schema, drop invalid rows, and (when
 * transform is nonzero) ln-transform the configured resistivity columns.
 * cleaning_json, when non-NULL, receives the cleaning report. */
int sonic_table_load(const sonic_config* cfg, const char* path, int transform,
                     sonic_table** out, char** cleaning_json);

/* Same, but the required columns are derived from what the model consumes;
 * use for label-free prediction inputs. */
int sonic_table_load_for_model(const sonic_config* cfg,
                               const sonic_model* model, const char* path,
                               sonic_table** out, char** cleaning_json);

void sonic_table_destroy(sonic_table* table);

int sonic_table_rows(const sonic_table* table, size_t* out);

/* Per-column count/mean/std/min/quartiles/max as JSON. */
int sonic_table_summary_json(const sonic_table* table, char** out);

/* Copies the named column into out (capacity cap doubles); fails with
 * SONIC_E_INVALID_ARGUMENT when cap is too small. */
int sonic_table_column(const sonic_table* table, const char* name, double* out,
                       size_t cap);
int sonic_table_depth(const sonic_table* table, int64_t* out, size_t cap);

int sonic_table_write_csv(const sonic_table* table, const char* path);

/* -------- training and model files --------------------------------------- */

int sonic_train(const sonic_config* cfg, const sonic_table* table,
                sonic_model** out);

int sonic_model_save(const sonic_model* model, const char* path);
int sonic_model_load(const char* path, sonic_model** out);
void sonic_model_destroy(sonic_model* model);

/* family/target/features/params/metrics (no tree payload) as JSON. */
int sonic_model_info_json(const sonic_model* model, char** out);

/* Sweep the lattice lrs x depths x n_estimators with the configured family.
 * cv_folds >= 2 selects k-fold cross-validation, otherwise a seeded holdout
 * of holdout_fraction is split off. result_json receives the trial log and
 * winner. */
int sonic_grid_search(const sonic_config* cfg, const sonic_table* table,
                      const double* lrs, size_t n_lrs, const int* depths,
                      size_t n_depths, const int* n_estimators, size_t n_ns,
                      double holdout_fraction, int cv_folds,
                      char** result_json);

/* -------- prediction ------------------------------------------------------ */

/* Predict on a model-compatible table. level is the central-interval
 * probability used for probabilistic models. */
int sonic_predict(const sonic_model* model, const sonic_table* table,
                  double level, sonic_predictions** out);

int sonic_predictions_read_csv(const char* path, sonic_predictions** out);
void sonic_predictions_destroy(sonic_predictions* pred);

int sonic_predictions_rows(const sonic_predictions* pred, size_t* out);
/* 1 when sigma/interval columns are present, else 0. */
int sonic_predictions_probabilistic(const sonic_predictions* pred);

/* Reads one row. sigma/lo/hi may be NULL; for non-probabilistic predictions
 * they are left untouched. */
int sonic_predictions_row(const sonic_predictions* pred, size_t i,
                          int64_t* depth, double* mu, double* sigma,
                          double* lo, double* hi);

int sonic_predictions_write_csv(const sonic_predictions* pred,
                                const char* path);

/* -------- evaluation, attribution, reporting ------------------------------ */

/* Point metrics (+ interval coverage for probabilistic models) against the
 * table's target column; JSON result. */
int sonic_evaluate(const sonic_config* cfg, const sonic_model* model,
                   const sonic_table* table, char** result_json);

/* Shapley-value exports: importance.csv, beeswarm.csv, and one
 * dependence_<a>_<b>.csv per (pair_a[i], pair_b[i]) into out_dir.
 * meta_json, when non-NULL, receives the metadata document. */
int sonic_explain(const sonic_model* model, const sonic_table* table,
                  const char* const* pair_a, const char* const* pair_b,
                  size_t n_pairs, const char* out_dir, char** meta_json);

/* Text report (and SVG when svg_path is non-NULL) over predictions.
 * labels may be NULL for unlabeled runs, otherwise n_labels must match the
 * prediction row count and be aligned with it. Windows are closed
 * depth-index ranges [window_lo[i], window_hi[i]]. */
int sonic_report(const sonic_config* cfg, const sonic_predictions* pred,
                 const double* labels, size_t n_labels,
                 const int64_t* window_lo, const int64_t* window_hi,
                 size_t n_windows, const char* text_path,
                 const char* svg_path);

#ifdef __cplusplus
}
#endif

#endif /* SONICLOG_H */
