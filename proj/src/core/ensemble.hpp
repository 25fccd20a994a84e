#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tree.hpp"

namespace soniclog {

enum class ModelFamily { RandomForest, Gbdt, SecondOrder, NGBoost };

const char* family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

struct BoostParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  TreeParams tree;
  double lambda = 1.0;  // second-order leaf regularizer
  double gamma = 0.0;   // second-order split gain threshold
  bool bootstrap = true;  // forest test hook; identity reduction when off
};

// Bagged trees; prediction is the unweighted mean over trees.
struct ForestModel {
  std::vector<RegressionTree> trees;
  std::vector<std::uint64_t> bootstrap_seeds;
  int feature_subsample = 0;
  std::size_t n_features = 0;

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

// Sequential booster: init_value + learning_rate * sum of stage predictions.
struct GbdtModel {
  double init_value = 0;
  std::vector<RegressionTree> stages;
  double learning_rate = 0.1;
  bool second_order = false;
  double lambda = 0;
  double gamma = 0;
  std::size_t n_features = 0;
  std::vector<double> training_mse;  // per accepted stage, not serialized

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

ForestModel fit_random_forest(const Matrix& x, std::span<const double> targets,
                              const BoostParams& params);

// First-order boosting: each stage fits a least-squares tree to the current
// residuals y - F(x).
GbdtModel fit_gbdt(const Matrix& x, std::span<const double> targets,
                   const BoostParams& params);

// Second-order boosting on (g, h) = (F(x) - y, 1) with lambda/gamma
// regularization; reduces to fit_gbdt when both are zero.
GbdtModel fit_second_order_boost(const Matrix& x,
                                 std::span<const double> targets,
                                 const BoostParams& params);

}  // namespace soniclog
