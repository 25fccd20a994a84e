#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "tree.hpp"

namespace soniclog {

struct Metrics {
  double mse = 0;
  double rmse = 0;
  double mae = 0;
  double evs = 0;  // explained variance score
  double r2 = 0;
  std::size_t n = 0;
};

// Standard regression metrics; variances are population (divide by n).
// Throws when the true targets are constant, since R2 is undefined there.
Metrics regression_metrics(std::span<const double> y_true,
                           std::span<const double> y_pred);

struct CoverageReport {
  double level = 0;        // nominal interval probability
  std::size_t covered = 0;
  std::size_t total = 0;
  double fraction = 0;     // covered / total
};

// How many targets fall inside their closed interval [lo_i, hi_i].
CoverageReport interval_coverage(std::span<const double> y_true,
                                 std::span<const double> lo,
                                 std::span<const double> hi, double level);

struct QualityFlags {
  std::vector<std::int64_t> flagged;  // depth indices, input order
  double threshold = 0;
  std::string rule;
};

// Flag the samples whose predicted sigma exceeds median + k * IQR of all
// sigmas — the stretches the model itself is least sure about.
QualityFlags variance_flags(std::span<const double> sigma,
                            std::span<const std::int64_t> depth_index,
                            double k = 1.5);

struct GridPoint {
  double learning_rate = 0.1;
  int max_depth = 4;
  int n_estimators = 100;
};

struct TrialResult {
  GridPoint point;
  double train_r2 = 0;
  double val_r2 = 0;
  double seconds = 0;
  bool failed = false;
  std::string error;
};

struct GridSearchResult {
  BoostParams best_params;
  double best_score = 0;  // validation R2 of the winner
  std::vector<TrialResult> trials;
};

// Exhaustive sweep over the lattice lrs x depths x n_estimators; each trial
// gets its own seed derived from the base seed.  The winner is the highest
// validation R2; exact ties prefer fewer estimators, then a shallower depth,
// then a lower learning rate.  Trials that throw are logged as failed and the
// sweep continues.
GridSearchResult grid_search(ModelFamily family, const Matrix& x_train,
                             std::span<const double> y_train,
                             const Matrix& x_val, std::span<const double> y_val,
                             const BoostParams& base,
                             std::span<const double> lrs,
                             std::span<const int> depths,
                             std::span<const int> n_estimators);

// Same sweep scored by k-fold cross-validation on one dataset: val_r2 is the
// mean validation R2 across folds, train_r2 the mean over the fold fits.
GridSearchResult grid_search_cv(ModelFamily family, const Matrix& x,
                                std::span<const double> y,
                                const BoostParams& base,
                                std::span<const double> lrs,
                                std::span<const int> depths,
                                std::span<const int> n_estimators, int folds,
                                std::uint64_t seed);

}  // namespace soniclog
