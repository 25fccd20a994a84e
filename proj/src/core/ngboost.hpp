#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ensemble.hpp"
#include "normal.hpp"
#include "tree.hpp"

namespace soniclog {

// One NGBoost stage: a pair of regression trees fit to the per-sample natural
// gradient of (mu, log_sigma), plus the scaling chosen by line search.
struct NGStage {
  RegressionTree tree_mu;
  RegressionTree tree_log_sigma;
  double rho = 0;
};

struct NGBoostModel {
  NormalParams theta0;
  std::vector<NGStage> stages;
  double learning_rate = 0.1;
  std::size_t n_features = 0;
  // Mean training NLL after each stage; diagnostic, not part of the model file.
  std::vector<double> training_nll;

  NormalParams predict_row(std::span<const double> x) const;
  std::vector<NormalParams> predict_dist(const Matrix& x) const;
  // Point prediction is the distribution mean.
  std::vector<double> predict(const Matrix& x) const;
};

// Scaling line search: the first rho in {1, 1/2, ..., 2^-20} that strictly
// reduces mean NLL when every sample's parameters move by -eta*rho*step.
// Returns 0 when no candidate improves (the fit has reached a fixpoint).
double line_search_rho(std::span<const NormalParams> params,
                       std::span<const std::array<double, 2>> steps,
                       std::span<const double> y, double eta);

NGBoostModel fit_ngboost(const Matrix& x, std::span<const double> targets,
                         const BoostParams& params);

}  // namespace soniclog
