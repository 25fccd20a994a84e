#include "workflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "ngboost.hpp"
#include "normal.hpp"
#include "shap.hpp"

namespace soniclog {

std::vector<std::string> PipelineConfig::target_labels() const {
  std::vector<std::string> labels;
  for (const auto& spec : schema)
    if (spec.kind == ColumnKind::Target) labels.push_back(spec.name);
  return labels;
}

namespace {

void validate_target(const PipelineConfig& cfg) {
  auto labels = cfg.target_labels();
  if (std::find(labels.begin(), labels.end(), cfg.target) == labels.end())
    throw Error(ErrorCode::Schema, "target '" + cfg.target +
                                       "' is not declared as a target column");
}

// Pre-transform column a model feature came from.
std::string raw_name_of(const std::string& feature,
                        const std::vector<std::string>& log_columns) {
  for (const auto& c : log_columns)
    if (feature == "log" + c) return c;
  return feature;
}

// Fitting must see the log-transformed resistivity columns, never the raw
// ones; otherwise the saved transform would misdescribe the model's inputs.
void require_transformed(const LogTable& table, const PipelineConfig& cfg) {
  for (const auto& c : cfg.log_columns)
    if (table.find_column(c))
      throw Error(ErrorCode::Schema,
                  "column '" + c +
                      "' has not been log-transformed; prepare the table with "
                      "the transform enabled");
}

void assert_hygiene(const std::vector<std::string>& features,
                    const std::vector<std::string>& forbidden,
                    ErrorCode code) {
  for (const auto& label : forbidden)
    if (std::find(features.begin(), features.end(), label) != features.end())
      throw Error(code, "target column '" + label +
                            "' must not appear among model features");
}

PredictionTable predict_core(const TrainedModel& model, const LogTable& table,
                             double level) {
  assert_hygiene(model.features, {model.target}, ErrorCode::ModelFormat);
  Matrix x = feature_matrix(table, model.features);

  PredictionTable pred;
  pred.depth_index.assign(table.depth_index().begin(),
                          table.depth_index().end());
  if (const auto* ng = std::get_if<NGBoostModel>(&model.model)) {
    pred.probabilistic = true;
    pred.level = level;
    std::vector<NormalParams> dist = ng->predict_dist(x);
    pred.mu.reserve(dist.size());
    pred.sigma.reserve(dist.size());
    pred.lo.reserve(dist.size());
    pred.hi.reserve(dist.size());
    for (const NormalParams& p : dist) {
      Interval ci = confidence_interval(p, level);
      pred.mu.push_back(p.mu);
      pred.sigma.push_back(p.sigma());
      pred.lo.push_back(ci.lo);
      pred.hi.push_back(ci.hi);
    }
  } else if (const auto* rf = std::get_if<ForestModel>(&model.model)) {
    pred.mu = rf->predict(x);
  } else {
    pred.mu = std::get<GbdtModel>(model.model).predict(x);
  }
  return pred;
}

std::vector<std::string> split_list(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty())
    throw Error(ErrorCode::Parse, "unparseable " + what + " '" + s + "'");
  return v;
}

}  // namespace

PreparedTable prepare_table(const std::string& path, const PipelineConfig& cfg) {
  LogTable raw = load_table(path, cfg.schema);
  auto [cleaned, report] = clean(raw, cfg.sentinels, cfg.log_columns);
  LogTable transformed =
      transform_resistivity(cleaned, cfg.log_columns, cfg.epsilon);
  return {std::move(transformed), report};
}

PreparedTable prepare_for_model(const std::string& path,
                                const TrainedModel& model,
                                const PipelineConfig& cfg) {
  assert_hygiene(model.features, cfg.target_labels(), ErrorCode::ModelFormat);

  std::vector<ColumnSpec> schema;
  std::vector<std::string> log_present;
  for (const auto& feature : model.features) {
    std::string raw = raw_name_of(feature, model.log_columns);
    if (raw != feature) log_present.push_back(raw);
    schema.push_back({raw, "", ColumnKind::Feature});
  }
  for (const auto& spec : cfg.schema)
    if (spec.kind == ColumnKind::DepthIndex) schema.push_back(spec);

  LogTable raw = load_table(path, schema);
  auto [cleaned, report] = clean(raw, cfg.sentinels, log_present);
  LogTable transformed =
      transform_resistivity(cleaned, log_present, model.epsilon);
  return {std::move(transformed), report};
}

std::vector<std::string> feature_columns(const LogTable& table,
                                         const PipelineConfig& cfg) {
  auto forbidden = cfg.target_labels();
  std::vector<std::string> features;
  for (const auto& spec : table.specs()) {
    if (spec.kind != ColumnKind::Feature) continue;
    if (std::find(forbidden.begin(), forbidden.end(), spec.name) !=
        forbidden.end())
      throw Error(ErrorCode::Schema, "column '" + spec.name +
                                         "' is declared both feature and target");
    features.push_back(spec.name);
  }
  if (features.empty())
    throw Error(ErrorCode::Schema, "schema declares no feature columns");
  assert_hygiene(features, forbidden, ErrorCode::Internal);
  return features;
}

Matrix feature_matrix(const LogTable& table,
                      std::span<const std::string> features) {
  Matrix x(table.n_rows(), features.size());
  for (std::size_t c = 0; c < features.size(); ++c) {
    auto col = table.column(features[c]);
    for (std::size_t r = 0; r < table.n_rows(); ++r) x.at(r, c) = col[r];
  }
  return x;
}

TrainedModel train_model(const LogTable& prepared, const PipelineConfig& cfg) {
  validate_target(cfg);
  require_transformed(prepared, cfg);
  std::vector<std::string> features = feature_columns(prepared, cfg);
  Matrix x = feature_matrix(prepared, features);
  std::span<const double> y = prepared.column(cfg.target);

  BoostParams params = cfg.params;
  params.tree.seed = cfg.seed;

  TrainedModel model;
  model.family = cfg.family;
  model.target = cfg.target;
  model.features = std::move(features);
  model.log_columns = cfg.log_columns;
  model.epsilon = cfg.epsilon;
  model.seed = cfg.seed;
  model.params = params;

  std::vector<double> train_pred;
  switch (cfg.family) {
    case ModelFamily::RandomForest: {
      ForestModel m = fit_random_forest(x, y, params);
      train_pred = m.predict(x);
      model.model = std::move(m);
      break;
    }
    case ModelFamily::Gbdt: {
      GbdtModel m = fit_gbdt(x, y, params);
      train_pred = m.predict(x);
      model.model = std::move(m);
      break;
    }
    case ModelFamily::SecondOrder: {
      GbdtModel m = fit_second_order_boost(x, y, params);
      train_pred = m.predict(x);
      model.model = std::move(m);
      break;
    }
    case ModelFamily::NGBoost: {
      NGBoostModel m = fit_ngboost(x, y, params);
      train_pred = m.predict(x);
      model.metrics["train_nll"] = m.training_nll.back();
      model.model = std::move(m);
      break;
    }
  }

  const double n = static_cast<double>(y.size());
  double sse = 0, sae = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double e = y[i] - train_pred[i];
    sse += e * e;
    sae += std::abs(e);
  }
  model.metrics["train_rows"] = n;
  model.metrics["train_mse"] = sse / n;
  model.metrics["train_rmse"] = std::sqrt(sse / n);
  model.metrics["train_mae"] = sae / n;
  try {
    Metrics m = regression_metrics(y, train_pred);
    model.metrics["train_r2"] = m.r2;
    model.metrics["train_evs"] = m.evs;
  } catch (const Error&) {
    // constant training targets: R2/EVS undefined, point metrics still stored
  }
  return model;
}

PredictionTable predict_table(const TrainedModel& model, const LogTable& prepared,
                              double level) {
  return predict_core(model, prepared, level);
}

void write_predictions_csv(const std::string& path, const PredictionTable& pred) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  if (pred.probabilistic) {
    out << "depth_index,mu,sigma,ci_lo,ci_hi\n";
    for (std::size_t r = 0; r < pred.mu.size(); ++r)
      out << pred.depth_index[r] << ',' << format_double(pred.mu[r]) << ','
          << format_double(pred.sigma[r]) << ',' << format_double(pred.lo[r])
          << ',' << format_double(pred.hi[r]) << '\n';
  } else {
    out << "depth_index,mu\n";
    for (std::size_t r = 0; r < pred.mu.size(); ++r)
      out << pred.depth_index[r] << ',' << format_double(pred.mu[r]) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

PredictionTable read_predictions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::Parse, "'" + path + "': missing header row");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();

  PredictionTable pred;
  if (line == "depth_index,mu,sigma,ci_lo,ci_hi")
    pred.probabilistic = true;
  else if (line != "depth_index,mu")
    throw Error(ErrorCode::Parse,
                "'" + path + "': unrecognized prediction header '" + line + "'");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto cells = split_list(line);
    std::size_t expected = pred.probabilistic ? 5 : 2;
    if (cells.size() != expected)
      throw Error(ErrorCode::Parse, "'" + path + "': row " +
                                        std::to_string(row) + " has " +
                                        std::to_string(cells.size()) +
                                        " cells, expected " +
                                        std::to_string(expected));
    pred.depth_index.push_back(
        static_cast<std::int64_t>(parse_number(cells[0], "depth index")));
    pred.mu.push_back(parse_number(cells[1], "mu"));
    if (pred.probabilistic) {
      pred.sigma.push_back(parse_number(cells[2], "sigma"));
      pred.lo.push_back(parse_number(cells[3], "ci_lo"));
      pred.hi.push_back(parse_number(cells[4], "ci_hi"));
    }
  }
  return pred;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"mse", m.mse}, {"rmse", m.rmse}, {"mae", m.mae},
          {"evs", m.evs}, {"r2", m.r2},     {"n", m.n}};
}

nlohmann::json coverage_to_json(const CoverageReport& c) {
  return {{"level", c.level},
          {"covered", c.covered},
          {"total", c.total},
          {"fraction", c.fraction}};
}

nlohmann::json flags_to_json(const QualityFlags& f) {
  return {{"rule", f.rule},
          {"threshold", f.threshold},
          {"count", f.flagged.size()},
          {"flagged", f.flagged}};
}

nlohmann::json grid_to_json(const GridSearchResult& g) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : g.trials) {
    nlohmann::json row = {{"learning_rate", t.point.learning_rate},
                          {"max_depth", t.point.max_depth},
                          {"n_estimators", t.point.n_estimators},
                          {"train_r2", t.train_r2},
                          {"val_r2", t.val_r2},
                          {"seconds", t.seconds},
                          {"failed", t.failed}};
    if (t.failed) row["error"] = t.error;
    trials.push_back(std::move(row));
  }
  const BoostParams& b = g.best_params;
  return {{"best",
           {{"learning_rate", b.learning_rate},
            {"max_depth", b.tree.max_depth},
            {"n_estimators", b.n_estimators},
            {"min_samples_leaf", b.tree.min_samples_leaf},
            {"feature_subsample", b.tree.feature_subsample},
            {"lambda", b.lambda},
            {"gamma", b.gamma},
            {"bootstrap", b.bootstrap}}},
          {"best_score", g.best_score},
          {"trials", std::move(trials)}};
}

nlohmann::json evaluate_model(const TrainedModel& model, const LogTable& prepared,
                              const PipelineConfig& cfg) {
  assert_hygiene(model.features, cfg.target_labels(), ErrorCode::ModelFormat);
  auto y = prepared.column(model.target);
  PredictionTable pred = predict_core(model, prepared, cfg.level);

  nlohmann::json out;
  out["family"] = family_name(model.family);
  out["target"] = model.target;
  out["metrics"] = metrics_to_json(regression_metrics(y, pred.mu));
  if (pred.probabilistic)
    out["coverage"] =
        coverage_to_json(interval_coverage(y, pred.lo, pred.hi, cfg.level));
  return out;
}

nlohmann::json explain_model(const TrainedModel& model, const LogTable& prepared,
                             std::span<const ExplainPair> pairs,
                             const std::string& out_dir) {
  if (prepared.n_rows() == 0)
    throw Error(ErrorCode::EmptyInput, "no rows to explain");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create directory '" + out_dir + "'");

  Matrix x = feature_matrix(prepared, model.features);
  EnsembleView view;
  if (const auto* rf = std::get_if<ForestModel>(&model.model))
    view = view_of(*rf);
  else if (const auto* gb = std::get_if<GbdtModel>(&model.model))
    view = view_of(*gb);
  else
    view = view_of_mu(std::get<NGBoostModel>(model.model));

  std::vector<Attribution> attributions = shap_values(view, x);
  std::vector<ImportanceEntry> importance =
      mean_abs_importance(attributions, model.features);

  std::vector<std::string> files;
  std::string imp_path = out_dir + "/importance.csv";
  write_importance_csv(imp_path, importance);
  files.push_back(imp_path);

  std::string bee_path = out_dir + "/beeswarm.csv";
  write_beeswarm_csv(bee_path, model.features, prepared.depth_index(), x,
                     attributions);
  files.push_back(bee_path);

  for (const auto& pair : pairs) {
    auto index_of = [&](const std::string& name) -> std::size_t {
      for (std::size_t j = 0; j < model.features.size(); ++j)
        if (model.features[j] == name) return j;
      throw Error(ErrorCode::Schema,
                  "feature '" + name + "' not in the model's feature set");
    };
    std::string dep_path = out_dir + "/dependence_" + pair.a + "_" + pair.b +
                           ".csv";
    write_dependence_csv(dep_path, prepared.depth_index(), x, attributions,
                         index_of(pair.a), index_of(pair.b));
    files.push_back(dep_path);
  }

  double mean_prediction = 0;
  for (const auto& a : attributions) mean_prediction += a.fx;
  mean_prediction /= static_cast<double>(attributions.size());

  nlohmann::json meta;
  meta["family"] = family_name(model.family);
  meta["target"] = model.target;
  meta["rows"] = prepared.n_rows();
  meta["features"] = model.features;
  // Two defensible baselines: the cover-conditioned empty-set expectation the
  // attributions decompose from, and the plain mean prediction over the
  // explained rows.  They differ in general; both are surfaced.
  meta["phi0"] = attributions.front().phi0;
  meta["mean_prediction"] = mean_prediction;
  meta["files"] = files;

  std::string meta_path = out_dir + "/explain_meta.json";
  std::ofstream out(meta_path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + meta_path + "'");
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + meta_path + "'");
  return meta;
}

GridSearchResult tune_model(const LogTable& prepared, const PipelineConfig& cfg,
                            const GridAxes& axes, const TuneOptions& opts) {
  validate_target(cfg);
  require_transformed(prepared, cfg);
  BoostParams base = cfg.params;
  base.tree.seed = cfg.seed;

  if (opts.cv_folds >= 2) {
    std::vector<std::string> features = feature_columns(prepared, cfg);
    Matrix x = feature_matrix(prepared, features);
    return grid_search_cv(cfg.family, x, prepared.column(cfg.target), base,
                          axes.learning_rates, axes.max_depths,
                          axes.n_estimators, opts.cv_folds, cfg.seed);
  }

  auto [train_t, val_t] = split_holdout(prepared, opts.holdout_fraction,
                                        cfg.seed);
  std::vector<std::string> features = feature_columns(train_t, cfg);
  Matrix x_train = feature_matrix(train_t, features);
  Matrix x_val = feature_matrix(val_t, features);
  return grid_search(cfg.family, x_train, train_t.column(cfg.target), x_val,
                     val_t.column(cfg.target), base, axes.learning_rates,
                     axes.max_depths, axes.n_estimators);
}

}  // namespace soniclog
