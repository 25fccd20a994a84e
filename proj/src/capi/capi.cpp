#include "soniclog/soniclog.h"

#include <cstring>
#include <string>
#include <vector>

#include "../core/error.hpp"
#include "../core/metrics.hpp"
#include "../core/model_io.hpp"
#include "../core/report.hpp"
#include "../core/table.hpp"
#include "../core/workflow.hpp"

using soniclog::Error;
using soniclog::ErrorCode;

struct sonic_config {
  soniclog::PipelineConfig cfg;
};

struct sonic_table {
  soniclog::LogTable table;
  soniclog::CleaningReport cleaning;
};

struct sonic_model {
  soniclog::TrainedModel model;
};

struct sonic_predictions {
  soniclog::PredictionTable pred;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int fail(int code, const std::string& message) {
  t_last_error = message;
  return code;
}

int fail_null(const char* what) {
  return fail(SONIC_E_INVALID_ARGUMENT, std::string("null ") + what);
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SONIC_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SONIC_E_INTERNAL;
  } catch (...) {
    t_last_error = "unknown failure";
    return SONIC_E_INTERNAL;
  }
}

soniclog::PipelineConfig default_config() {
  soniclog::PipelineConfig cfg;
  cfg.schema = {{"CAL", "in", soniclog::ColumnKind::Feature},
                {"CNC", "dec", soniclog::ColumnKind::Feature},
                {"GR", "API", soniclog::ColumnKind::Feature},
                {"HRD", "ohm.m", soniclog::ColumnKind::Feature},
                {"HRM", "ohm.m", soniclog::ColumnKind::Feature},
                {"PE", "b/e", soniclog::ColumnKind::Feature},
                {"ZDEN", "g/cm3", soniclog::ColumnKind::Feature},
                {"DTC", "us/m", soniclog::ColumnKind::Target},
                {"DTS", "us/m", soniclog::ColumnKind::Target}};
  cfg.target = "DTC";
  cfg.log_columns = {"HRD", "HRM"};
  return cfg;
}

}  // namespace

extern "C" {

const char* sonic_version(void) { return "1.0.0"; }

const char* sonic_last_error(void) { return t_last_error.c_str(); }

void sonic_free_string(char* s) { delete[] s; }

/* -------- configuration ------------------------------------------------- */

int sonic_config_create(sonic_config** out) {
  if (!out) return fail_null("output handle");
  return guarded([&] { *out = new sonic_config{default_config()}; });
}

void sonic_config_destroy(sonic_config* cfg) { delete cfg; }

int sonic_config_set_schema(sonic_config* cfg, const char* const* names,
                            const char* const* units, const int* kinds,
                            size_t n) {
  if (!cfg) return fail_null("config");
  if (!names || !kinds) return fail_null("schema arrays");
  if (n == 0) return fail(SONIC_E_INVALID_ARGUMENT, "empty schema");
  return guarded([&] {
    std::vector<soniclog::ColumnSpec> schema;
    for (size_t i = 0; i < n; ++i) {
      if (!names[i]) throw Error(ErrorCode::InvalidArgument, "null column name");
      soniclog::ColumnSpec spec;
      spec.name = names[i];
      spec.unit = units && units[i] ? units[i] : "";
      switch (kinds[i]) {
        case SONIC_COL_FEATURE: spec.kind = soniclog::ColumnKind::Feature; break;
        case SONIC_COL_TARGET: spec.kind = soniclog::ColumnKind::Target; break;
        case SONIC_COL_DEPTH_INDEX:
          spec.kind = soniclog::ColumnKind::DepthIndex;
          break;
        default:
          throw Error(ErrorCode::InvalidArgument, "unknown column kind");
      }
      schema.push_back(std::move(spec));
    }
    cfg->cfg.schema = std::move(schema);
  });
}

int sonic_config_set_log_columns(sonic_config* cfg, const char* const* names,
                                 size_t n) {
  if (!cfg) return fail_null("config");
  if (n > 0 && !names) return fail_null("column names");
  return guarded([&] {
    std::vector<std::string> columns;
    for (size_t i = 0; i < n; ++i) {
      if (!names[i]) throw Error(ErrorCode::InvalidArgument, "null column name");
      columns.emplace_back(names[i]);
    }
    cfg->cfg.log_columns = std::move(columns);
  });
}

int sonic_config_set_sentinels(sonic_config* cfg, const double* values,
                               size_t n) {
  if (!cfg) return fail_null("config");
  if (n > 0 && !values) return fail_null("sentinel values");
  return guarded(
      [&] { cfg->cfg.sentinels.assign(values, values + n); });
}

int sonic_config_set_epsilon(sonic_config* cfg, double epsilon) {
  if (!cfg) return fail_null("config");
  if (!(epsilon > 0))
    return fail(SONIC_E_INVALID_ARGUMENT, "epsilon must be > 0");
  cfg->cfg.epsilon = epsilon;
  return SONIC_OK;
}

int sonic_config_set_target(sonic_config* cfg, const char* target) {
  if (!cfg) return fail_null("config");
  if (!target) return fail_null("target");
  cfg->cfg.target = target;
  return SONIC_OK;
}

int sonic_config_set_family(sonic_config* cfg, const char* family) {
  if (!cfg) return fail_null("config");
  if (!family) return fail_null("family");
  return guarded([&] { cfg->cfg.family = soniclog::family_from_name(family); });
}

int sonic_config_set_params(sonic_config* cfg, int n_estimators,
                            double learning_rate, int max_depth,
                            int min_samples_leaf, int feature_subsample,
                            double lambda, double gamma, int bootstrap) {
  if (!cfg) return fail_null("config");
  soniclog::BoostParams& p = cfg->cfg.params;
  p.n_estimators = n_estimators;
  p.learning_rate = learning_rate;
  p.tree.max_depth = max_depth;
  p.tree.min_samples_leaf = min_samples_leaf;
  p.tree.feature_subsample = feature_subsample;
  p.lambda = lambda;
  p.gamma = gamma;
  p.bootstrap = bootstrap != 0;
  return SONIC_OK;
}

int sonic_config_set_seed(sonic_config* cfg, uint64_t seed) {
  if (!cfg) return fail_null("config");
  cfg->cfg.seed = seed;
  cfg->cfg.params.tree.seed = seed;
  return SONIC_OK;
}

int sonic_config_set_level(sonic_config* cfg, double level) {
  if (!cfg) return fail_null("config");
  if (!(level >= 0) || !(level < 1))
    return fail(SONIC_E_INVALID_ARGUMENT, "level must lie in [0, 1)");
  cfg->cfg.level = level;
  return SONIC_OK;
}

int sonic_config_set_flag_k(sonic_config* cfg, double k) {
  if (!cfg) return fail_null("config");
  if (!(k >= 0)) return fail(SONIC_E_INVALID_ARGUMENT, "k must be >= 0");
  cfg->cfg.flag_k = k;
  return SONIC_OK;
}

/* -------- tables --------------------------------------------------------- */

int sonic_table_load(const sonic_config* cfg, const char* path, int transform,
                     sonic_table** out, char** cleaning_json) {
  if (!cfg) return fail_null("config");
  if (!path) return fail_null("path");
  if (!out) return fail_null("output handle");
  return guarded([&] {
    soniclog::LogTable raw = soniclog::load_table(path, cfg->cfg.schema);
    auto [cleaned, report] =
        soniclog::clean(raw, cfg->cfg.sentinels, cfg->cfg.log_columns);
    soniclog::LogTable final_table =
        transform ? soniclog::transform_resistivity(cleaned, cfg->cfg.log_columns,
                                                    cfg->cfg.epsilon)
                  : std::move(cleaned);
    *out = new sonic_table{std::move(final_table), report};
    if (cleaning_json) *cleaning_json = dup_string(report.to_json().dump(2));
  });
}

int sonic_table_load_for_model(const sonic_config* cfg,
                               const sonic_model* model, const char* path,
                               sonic_table** out, char** cleaning_json) {
  if (!cfg) return fail_null("config");
  if (!model) return fail_null("model");
  if (!path) return fail_null("path");
  if (!out) return fail_null("output handle");
  return guarded([&] {
    soniclog::PreparedTable prepared =
        soniclog::prepare_for_model(path, model->model, cfg->cfg);
    if (cleaning_json)
      *cleaning_json = dup_string(prepared.cleaning.to_json().dump(2));
    *out = new sonic_table{std::move(prepared.table), prepared.cleaning};
  });
}

void sonic_table_destroy(sonic_table* table) { delete table; }

int sonic_table_rows(const sonic_table* table, size_t* out) {
  if (!table) return fail_null("table");
  if (!out) return fail_null("output");
  *out = table->table.n_rows();
  return SONIC_OK;
}

int sonic_table_summary_json(const sonic_table* table, char** out) {
  if (!table) return fail_null("table");
  if (!out) return fail_null("output");
  return guarded([&] {
    *out = dup_string(soniclog::summarize(table->table).to_json().dump(2));
  });
}

int sonic_table_column(const sonic_table* table, const char* name, double* out,
                       size_t cap) {
  if (!table) return fail_null("table");
  if (!name) return fail_null("column name");
  if (!out) return fail_null("output buffer");
  return guarded([&] {
    auto col = table->table.column(name);
    if (cap < col.size())
      throw Error(ErrorCode::InvalidArgument, "output buffer too small");
    std::memcpy(out, col.data(), col.size() * sizeof(double));
  });
}

int sonic_table_depth(const sonic_table* table, int64_t* out, size_t cap) {
  if (!table) return fail_null("table");
  if (!out) return fail_null("output buffer");
  return guarded([&] {
    auto depth = table->table.depth_index();
    if (cap < depth.size())
      throw Error(ErrorCode::InvalidArgument, "output buffer too small");
    std::memcpy(out, depth.data(), depth.size() * sizeof(int64_t));
  });
}

int sonic_table_write_csv(const sonic_table* table, const char* path) {
  if (!table) return fail_null("table");
  if (!path) return fail_null("path");
  return guarded([&] { soniclog::write_csv(table->table, path); });
}

/* -------- training and model files --------------------------------------- */

int sonic_train(const sonic_config* cfg, const sonic_table* table,
                sonic_model** out) {
  if (!cfg) return fail_null("config");
  if (!table) return fail_null("table");
  if (!out) return fail_null("output handle");
  return guarded([&] {
    *out = new sonic_model{soniclog::train_model(table->table, cfg->cfg)};
  });
}

int sonic_model_save(const sonic_model* model, const char* path) {
  if (!model) return fail_null("model");
  if (!path) return fail_null("path");
  return guarded([&] { soniclog::save_model(path, model->model); });
}

int sonic_model_load(const char* path, sonic_model** out) {
  if (!path) return fail_null("path");
  if (!out) return fail_null("output handle");
  return guarded(
      [&] { *out = new sonic_model{soniclog::load_model(path)}; });
}

void sonic_model_destroy(sonic_model* model) { delete model; }

int sonic_model_info_json(const sonic_model* model, char** out) {
  if (!model) return fail_null("model");
  if (!out) return fail_null("output");
  return guarded([&] {
    nlohmann::json j = soniclog::model_to_json(model->model);
    j.erase("payload");
    *out = dup_string(j.dump(2));
  });
}

int sonic_grid_search(const sonic_config* cfg, const sonic_table* table,
                      const double* lrs, size_t n_lrs, const int* depths,
                      size_t n_depths, const int* n_estimators, size_t n_ns,
                      double holdout_fraction, int cv_folds,
                      char** result_json) {
  if (!cfg) return fail_null("config");
  if (!table) return fail_null("table");
  if (!lrs || !depths || !n_estimators) return fail_null("grid axis");
  if (!result_json) return fail_null("output");
  return guarded([&] {
    soniclog::GridAxes axes;
    axes.learning_rates.assign(lrs, lrs + n_lrs);
    axes.max_depths.assign(depths, depths + n_depths);
    axes.n_estimators.assign(n_estimators, n_estimators + n_ns);
    soniclog::TuneOptions opts;
    opts.holdout_fraction = holdout_fraction;
    opts.cv_folds = cv_folds;
    soniclog::GridSearchResult result =
        soniclog::tune_model(table->table, cfg->cfg, axes, opts);
    *result_json = dup_string(soniclog::grid_to_json(result).dump(2));
  });
}

/* -------- prediction ------------------------------------------------------ */

int sonic_predict(const sonic_model* model, const sonic_table* table,
                  double level, sonic_predictions** out) {
  if (!model) return fail_null("model");
  if (!table) return fail_null("table");
  if (!out) return fail_null("output handle");
  return guarded([&] {
    *out = new sonic_predictions{
        soniclog::predict_table(model->model, table->table, level)};
  });
}

int sonic_predictions_read_csv(const char* path, sonic_predictions** out) {
  if (!path) return fail_null("path");
  if (!out) return fail_null("output handle");
  return guarded([&] {
    *out = new sonic_predictions{soniclog::read_predictions_csv(path)};
  });
}

void sonic_predictions_destroy(sonic_predictions* pred) { delete pred; }

int sonic_predictions_rows(const sonic_predictions* pred, size_t* out) {
  if (!pred) return fail_null("predictions");
  if (!out) return fail_null("output");
  *out = pred->pred.mu.size();
  return SONIC_OK;
}

int sonic_predictions_probabilistic(const sonic_predictions* pred) {
  return pred && pred->pred.probabilistic ? 1 : 0;
}

int sonic_predictions_row(const sonic_predictions* pred, size_t i,
                          int64_t* depth, double* mu, double* sigma,
                          double* lo, double* hi) {
  if (!pred) return fail_null("predictions");
  if (i >= pred->pred.mu.size())
    return fail(SONIC_E_INVALID_ARGUMENT, "row index out of range");
  if (depth) *depth = pred->pred.depth_index[i];
  if (mu) *mu = pred->pred.mu[i];
  if (pred->pred.probabilistic) {
    if (sigma) *sigma = pred->pred.sigma[i];
    if (lo) *lo = pred->pred.lo[i];
    if (hi) *hi = pred->pred.hi[i];
  }
  return SONIC_OK;
}

int sonic_predictions_write_csv(const sonic_predictions* pred,
                                const char* path) {
  if (!pred) return fail_null("predictions");
  if (!path) return fail_null("path");
  return guarded([&] { soniclog::write_predictions_csv(path, pred->pred); });
}

/* -------- evaluation, attribution, reporting ------------------------------ */

int sonic_evaluate(const sonic_config* cfg, const sonic_model* model,
                   const sonic_table* table, char** result_json) {
  if (!cfg) return fail_null("config");
  if (!model) return fail_null("model");
  if (!table) return fail_null("table");
  if (!result_json) return fail_null("output");
  return guarded([&] {
    *result_json = dup_string(
        soniclog::evaluate_model(model->model, table->table, cfg->cfg).dump(2));
  });
}

int sonic_explain(const sonic_model* model, const sonic_table* table,
                  const char* const* pair_a, const char* const* pair_b,
                  size_t n_pairs, const char* out_dir, char** meta_json) {
  if (!model) return fail_null("model");
  if (!table) return fail_null("table");
  if (!out_dir) return fail_null("output directory");
  if (n_pairs > 0 && (!pair_a || !pair_b)) return fail_null("pair arrays");
  return guarded([&] {
    std::vector<soniclog::ExplainPair> pairs;
    for (size_t i = 0; i < n_pairs; ++i) {
      if (!pair_a[i] || !pair_b[i])
        throw Error(ErrorCode::InvalidArgument, "null pair feature name");
      pairs.push_back({pair_a[i], pair_b[i]});
    }
    nlohmann::json meta =
        soniclog::explain_model(model->model, table->table, pairs, out_dir);
    if (meta_json) *meta_json = dup_string(meta.dump(2));
  });
}

int sonic_report(const sonic_config* cfg, const sonic_predictions* pred,
                 const double* labels, size_t n_labels,
                 const int64_t* window_lo, const int64_t* window_hi,
                 size_t n_windows, const char* text_path,
                 const char* svg_path) {
  if (!cfg) return fail_null("config");
  if (!pred) return fail_null("predictions");
  if (!text_path) return fail_null("text path");
  if (n_windows > 0 && (!window_lo || !window_hi))
    return fail_null("window arrays");
  return guarded([&] {
    soniclog::ReportInput input;
    input.predictions = pred->pred;
    if (input.predictions.probabilistic && input.predictions.level == 0)
      input.predictions.level = cfg->cfg.level;
    if (labels) {
      if (n_labels != pred->pred.mu.size())
        throw Error(ErrorCode::InvalidInput,
                    "label/prediction length mismatch");
      input.labels.assign(labels, labels + n_labels);
    }
    for (size_t i = 0; i < n_windows; ++i)
      input.windows.push_back({window_lo[i], window_hi[i]});
    input.flag_k = cfg->cfg.flag_k;
    soniclog::write_report_text(text_path, input);
    if (svg_path) soniclog::write_report_svg(svg_path, input);
  });
}

}  // extern "C"
