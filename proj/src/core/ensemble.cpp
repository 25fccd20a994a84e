#include "ensemble.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace soniclog {

const char* family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::RandomForest: return "rf";
    case ModelFamily::Gbdt: return "gbdt";
    case ModelFamily::SecondOrder: return "xgb";
    case ModelFamily::NGBoost: return "ngboost";
  }
  return "unknown";
}

ModelFamily family_from_name(const std::string& name) {
  if (name == "rf") return ModelFamily::RandomForest;
  if (name == "gbdt") return ModelFamily::Gbdt;
  if (name == "xgb") return ModelFamily::SecondOrder;
  if (name == "ngboost") return ModelFamily::NGBoost;
  throw Error(ErrorCode::InvalidArgument,
              "unknown model family '" + name + "' (rf|gbdt|xgb|ngboost)");
}

namespace {

void validate_training_input(const Matrix& x, std::span<const double> targets,
                             const BoostParams& params) {
  if (x.rows == 0) throw Error(ErrorCode::EmptyInput, "empty training input");
  if (targets.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (params.n_estimators < 1)
    throw Error(ErrorCode::InvalidArgument, "n_estimators must be >= 1");
  if (!(params.learning_rate > 0))
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  for (double y : targets)
    if (!std::isfinite(y))
      throw Error(ErrorCode::InvalidInput, "non-finite training target");
}

double mean_of(std::span<const double> values) {
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double mse_of(std::span<const double> y, std::span<const double> f) {
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = y[i] - f[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

}  // namespace

double ForestModel::predict_row(std::span<const double> x) const {
  double sum = 0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict(const Matrix& x) const {
  if (x.cols != n_features)
    throw Error(ErrorCode::InvalidInput, "feature count mismatch");
  std::vector<double> out(x.rows);
  std::vector<double> row(x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    x.row(r, row.data());
    out[r] = predict_row(row);
  }
  return out;
}

double GbdtModel::predict_row(std::span<const double> x) const {
  double acc = init_value;
  for (const auto& tree : stages) acc += learning_rate * tree.predict(x);
  return acc;
}

std::vector<double> GbdtModel::predict(const Matrix& x) const {
  if (x.cols != n_features)
    throw Error(ErrorCode::InvalidInput, "feature count mismatch");
  std::vector<double> out(x.rows);
  std::vector<double> row(x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    x.row(r, row.data());
    out[r] = predict_row(row);
  }
  return out;
}

ForestModel fit_random_forest(const Matrix& x, std::span<const double> targets,
                              const BoostParams& params) {
  if (x.rows == 0) throw Error(ErrorCode::EmptyInput, "empty training input");
  if (targets.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (params.n_estimators < 1)
    throw Error(ErrorCode::InvalidArgument, "n_estimators must be >= 1");

  ForestModel model;
  model.n_features = x.cols;
  // regression convention: ceil(p/3) features per split unless configured
  int mtry = params.tree.feature_subsample;
  if (mtry == 0) mtry = static_cast<int>((x.cols + 2) / 3);
  model.feature_subsample = mtry;

  Presort presort = Presort::build(x);
  const std::size_t n = x.rows;
  std::vector<double> weights(n);
  for (int t = 0; t < params.n_estimators; ++t) {
    std::uint64_t tree_seed = mix_seed(params.tree.seed, static_cast<std::uint64_t>(t));
    TreeParams tp = params.tree;
    tp.feature_subsample = mtry;
    tp.seed = tree_seed;
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      Rng rng(tree_seed);
      for (std::size_t d = 0; d < n; ++d)
        weights[static_cast<std::size_t>(rng.bounded(n))] += 1.0;
    } else {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
    model.trees.push_back(fit_tree(x, targets, weights, tp, presort));
    model.bootstrap_seeds.push_back(tree_seed);
  }
  return model;
}

GbdtModel fit_gbdt(const Matrix& x, std::span<const double> targets,
                   const BoostParams& params) {
  validate_training_input(x, targets, params);

  GbdtModel model;
  model.n_features = x.cols;
  model.learning_rate = params.learning_rate;
  model.init_value = mean_of(targets);

  Presort presort = Presort::build(x);
  const std::size_t n = x.rows;
  std::vector<double> f(n, model.init_value);
  std::vector<double> residual(n);
  std::vector<double> row(x.cols);
  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - f[i];
    TreeParams tp = params.tree;
    tp.seed = mix_seed(params.tree.seed, static_cast<std::uint64_t>(m));
    RegressionTree tree = fit_tree(x, residual, {}, tp, presort);
    for (std::size_t i = 0; i < n; ++i) {
      x.row(i, row.data());
      f[i] += params.learning_rate * tree.predict(row);
    }
    model.stages.push_back(std::move(tree));
    model.training_mse.push_back(mse_of(targets, f));
  }
  return model;
}

GbdtModel fit_second_order_boost(const Matrix& x,
                                 std::span<const double> targets,
                                 const BoostParams& params) {
  validate_training_input(x, targets, params);
  if (params.lambda < 0 || params.gamma < 0)
    throw Error(ErrorCode::InvalidArgument, "lambda and gamma must be >= 0");

  GbdtModel model;
  model.n_features = x.cols;
  model.learning_rate = params.learning_rate;
  model.second_order = true;
  model.lambda = params.lambda;
  model.gamma = params.gamma;
  model.init_value = mean_of(targets);

  Presort presort = Presort::build(x);
  const std::size_t n = x.rows;
  std::vector<double> f(n, model.init_value);
  std::vector<double> grad(n);
  std::vector<double> hess(n, 1.0);
  std::vector<double> row(x.cols);
  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = f[i] - targets[i];
    TreeParams tp = params.tree;
    tp.seed = mix_seed(params.tree.seed, static_cast<std::uint64_t>(m));
    RegressionTree tree = fit_gradient_tree(x, grad, hess, params.lambda,
                                            params.gamma, tp, presort);
    for (std::size_t i = 0; i < n; ++i) {
      x.row(i, row.data());
      f[i] += params.learning_rate * tree.predict(row);
    }
    model.stages.push_back(std::move(tree));
    model.training_mse.push_back(mse_of(targets, f));
  }
  return model;
}

}  // namespace soniclog
