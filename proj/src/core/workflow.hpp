#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "model_io.hpp"
#include "table.hpp"

namespace soniclog {

// Resolved run settings shared by every command: the input column contract,
// which slowness to model, and the fitting/reporting knobs.
struct PipelineConfig {
  std::vector<ColumnSpec> schema;
  std::string target;                    // label of the slowness to model
  std::vector<std::string> log_columns;  // resistivity labels to ln-transform
  double epsilon = 1e-6;
  std::vector<double> sentinels{-999.0, -999.25, -9999.0};
  ModelFamily family = ModelFamily::NGBoost;
  BoostParams params;
  std::uint64_t seed = 0;
  double level = 0.8;  // confidence-interval probability
  double flag_k = 1.5;

  // Labels of every target-kind column in the schema (the modeled slowness
  // and its sibling).  None of these may ever enter the feature set.
  std::vector<std::string> target_labels() const;
};

struct PreparedTable {
  LogTable table;
  CleaningReport cleaning;
};

// load + clean + log-transform with the configured schema; the front end of
// stats, train, tune, and evaluate.
PreparedTable prepare_table(const std::string& path, const PipelineConfig& cfg);

// Same pipeline, but the schema is derived from what the model needs: the
// pre-transform feature columns (plus the configured depth column).  Lets
// predict/explain run on label-free inputs.
PreparedTable prepare_for_model(const std::string& path,
                                const TrainedModel& model,
                                const PipelineConfig& cfg);

// Feature labels in table order: feature-kind columns only; verifies no
// target-kind label slipped in.
std::vector<std::string> feature_columns(const LogTable& table,
                                         const PipelineConfig& cfg);

// Columns by name into a row-major-accessible matrix; unknown name → schema
// error naming the column.
Matrix feature_matrix(const LogTable& table,
                      std::span<const std::string> features);

TrainedModel train_model(const LogTable& prepared, const PipelineConfig& cfg);

struct PredictionTable {
  bool probabilistic = false;
  double level = 0;  // interval probability when probabilistic
  std::vector<std::int64_t> depth_index;
  std::vector<double> mu;
  std::vector<double> sigma;  // empty unless probabilistic
  std::vector<double> lo;
  std::vector<double> hi;
};

// Predictions for an already-prepared (model-compatible) table.
PredictionTable predict_table(const TrainedModel& model, const LogTable& prepared,
                              double level);

void write_predictions_csv(const std::string& path, const PredictionTable& pred);
PredictionTable read_predictions_csv(const std::string& path);

nlohmann::json metrics_to_json(const Metrics& m);
nlohmann::json coverage_to_json(const CoverageReport& c);
nlohmann::json flags_to_json(const QualityFlags& f);
nlohmann::json grid_to_json(const GridSearchResult& g);

// Point metrics against the table's target column, plus interval coverage for
// probabilistic models.
nlohmann::json evaluate_model(const TrainedModel& model, const LogTable& prepared,
                              const PipelineConfig& cfg);

struct ExplainPair {
  std::string a;
  std::string b;
};

// Writes importance.csv, beeswarm.csv, one dependence_<a>_<b>.csv per pair,
// and explain_meta.json into out_dir; returns the metadata document.
nlohmann::json explain_model(const TrainedModel& model, const LogTable& prepared,
                             std::span<const ExplainPair> pairs,
                             const std::string& out_dir);

struct GridAxes {
  std::vector<double> learning_rates;
  std::vector<int> max_depths;
  std::vector<int> n_estimators;
};

struct TuneOptions {
  double holdout_fraction = 0.2;
  int cv_folds = 0;  // >= 2 switches from the seeded holdout to k-fold CV
};

GridSearchResult tune_model(const LogTable& prepared, const PipelineConfig& cfg,
                            const GridAxes& axes, const TuneOptions& opts);

}  // namespace soniclog
