#include "metrics.hpp"

#include <chrono>
#include <cmath>

#include "error.hpp"
#include "ngboost.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace soniclog {

Metrics regression_metrics(std::span<const double> y_true,
                           std::span<const double> y_pred) {
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "no samples to score");
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::InvalidInput, "prediction/target length mismatch");
  const double n = static_cast<double>(y_true.size());

  double mean_y = 0;
  for (double y : y_true) mean_y += y;
  mean_y /= n;

  double sse = 0, sae = 0, sst = 0, err_sum = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    double e = y_true[i] - y_pred[i];
    sse += e * e;
    sae += std::abs(e);
    err_sum += e;
    double d = y_true[i] - mean_y;
    sst += d * d;
  }
  if (!(sst > 0))
    throw Error(ErrorCode::InvalidInput,
                "targets are constant; R2 and explained variance are undefined");

  Metrics m;
  m.n = y_true.size();
  m.mse = sse / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = sae / n;
  m.r2 = 1.0 - sse / sst;
  // Explained variance uses the error variance, so a constant bias in the
  // predictions does not count against it the way it does against R2.
  double err_mean = err_sum / n;
  double err_var = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    double d = (y_true[i] - y_pred[i]) - err_mean;
    err_var += d * d;
  }
  m.evs = 1.0 - err_var / sst;
  return m;
}

CoverageReport interval_coverage(std::span<const double> y_true,
                                 std::span<const double> lo,
                                 std::span<const double> hi, double level) {
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "no samples to score");
  if (lo.size() != y_true.size() || hi.size() != y_true.size())
    throw Error(ErrorCode::InvalidInput, "interval/target length mismatch");
  CoverageReport report;
  report.level = level;
  report.total = y_true.size();
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!(lo[i] <= hi[i]))
      throw Error(ErrorCode::InvalidInput, "interval with lo > hi");
    if (y_true[i] >= lo[i] && y_true[i] <= hi[i]) ++report.covered;
  }
  report.fraction =
      static_cast<double>(report.covered) / static_cast<double>(report.total);
  return report;
}

QualityFlags variance_flags(std::span<const double> sigma,
                            std::span<const std::int64_t> depth_index,
                            double k) {
  if (sigma.empty()) throw Error(ErrorCode::EmptyInput, "no sigmas to flag");
  if (depth_index.size() != sigma.size())
    throw Error(ErrorCode::InvalidInput, "sigma/depth-index length mismatch");
  if (!(k >= 0)) throw Error(ErrorCode::InvalidArgument, "k must be >= 0");
  double median = quantile(sigma, 0.5);
  double iqr = quantile(sigma, 0.75) - quantile(sigma, 0.25);
  QualityFlags flags;
  flags.threshold = median + k * iqr;
  flags.rule = "sigma > median + " + format_double(k) + " * IQR";
  for (std::size_t i = 0; i < sigma.size(); ++i)
    if (sigma[i] > flags.threshold) flags.flagged.push_back(depth_index[i]);
  return flags;
}

namespace {

struct FitEval {
  std::vector<double> train_pred;
  std::vector<double> val_pred;
};

FitEval fit_eval(ModelFamily family, const Matrix& x_train,
                 std::span<const double> y_train, const BoostParams& params,
                 const Matrix& x_val) {
  switch (family) {
    case ModelFamily::RandomForest: {
      ForestModel m = fit_random_forest(x_train, y_train, params);
      return {m.predict(x_train), m.predict(x_val)};
    }
    case ModelFamily::Gbdt: {
      GbdtModel m = fit_gbdt(x_train, y_train, params);
      return {m.predict(x_train), m.predict(x_val)};
    }
    case ModelFamily::SecondOrder: {
      GbdtModel m = fit_second_order_boost(x_train, y_train, params);
      return {m.predict(x_train), m.predict(x_val)};
    }
    case ModelFamily::NGBoost: {
      NGBoostModel m = fit_ngboost(x_train, y_train, params);
      return {m.predict(x_train), m.predict(x_val)};
    }
  }
  throw Error(ErrorCode::Internal, "unhandled model family");
}

Matrix take_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), x.cols);
  for (std::size_t c = 0; c < x.cols; ++c)
    for (std::size_t r = 0; r < idx.size(); ++r)
      out.at(r, c) = x.at(idx[r], c);
  return out;
}

std::vector<double> take(std::span<const double> v,
                         std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

void check_axes(std::span<const double> lrs, std::span<const int> depths,
                std::span<const int> n_estimators) {
  if (lrs.empty() || depths.empty() || n_estimators.empty())
    throw Error(ErrorCode::InvalidArgument, "empty grid axis");
}

BoostParams at_point(const BoostParams& base, const GridPoint& pt,
                     std::uint64_t trial_seed) {
  BoostParams p = base;
  p.learning_rate = pt.learning_rate;
  p.tree.max_depth = pt.max_depth;
  p.n_estimators = pt.n_estimators;
  p.tree.seed = trial_seed;
  return p;
}

// Strictly-better rule for the sweep winner; exact R2 ties prefer the
// cheaper configuration.
bool improves(const TrialResult& t, bool have_best, const TrialResult& best) {
  if (t.failed) return false;
  if (!have_best) return true;
  if (t.val_r2 != best.val_r2) return t.val_r2 > best.val_r2;
  if (t.point.n_estimators != best.point.n_estimators)
    return t.point.n_estimators < best.point.n_estimators;
  if (t.point.max_depth != best.point.max_depth)
    return t.point.max_depth < best.point.max_depth;
  return t.point.learning_rate < best.point.learning_rate;
}

template <typename RunTrial>
GridSearchResult sweep(const BoostParams& base, std::span<const double> lrs,
                       std::span<const int> depths,
                       std::span<const int> n_estimators, RunTrial run_trial) {
  GridSearchResult result;
  TrialResult best;
  bool have_best = false;
  std::uint64_t trial_index = 0;
  for (double lr : lrs) {
    for (int depth : depths) {
      for (int n : n_estimators) {
        TrialResult trial;
        trial.point = {lr, depth, n};
        BoostParams params =
            at_point(base, trial.point, mix_seed(base.tree.seed, trial_index));
        ++trial_index;
        auto t0 = std::chrono::steady_clock::now();
        try {
          run_trial(trial, params);
        } catch (const std::exception& e) {
          trial.failed = true;
          trial.error = e.what();
        }
        trial.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        if (improves(trial, have_best, best)) {
          best = trial;
          have_best = true;
          result.best_params = params;
        }
        result.trials.push_back(std::move(trial));
      }
    }
  }
  if (!have_best)
    throw Error(ErrorCode::InvalidInput, "every grid trial failed");
  result.best_score = best.val_r2;
  return result;
}

}  // namespace

GridSearchResult grid_search(ModelFamily family, const Matrix& x_train,
                             std::span<const double> y_train,
                             const Matrix& x_val, std::span<const double> y_val,
                             const BoostParams& base,
                             std::span<const double> lrs,
                             std::span<const int> depths,
                             std::span<const int> n_estimators) {
  check_axes(lrs, depths, n_estimators);
  if (y_train.size() != x_train.rows || y_val.size() != x_val.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (x_val.rows == 0)
    throw Error(ErrorCode::EmptyInput, "empty validation set");
  return sweep(base, lrs, depths, n_estimators,
               [&](TrialResult& trial, const BoostParams& params) {
                 FitEval fe = fit_eval(family, x_train, y_train, params, x_val);
                 trial.train_r2 = regression_metrics(y_train, fe.train_pred).r2;
                 trial.val_r2 = regression_metrics(y_val, fe.val_pred).r2;
               });
}

GridSearchResult grid_search_cv(ModelFamily family, const Matrix& x,
                                std::span<const double> y,
                                const BoostParams& base,
                                std::span<const double> lrs,
                                std::span<const int> depths,
                                std::span<const int> n_estimators, int folds,
                                std::uint64_t seed) {
  check_axes(lrs, depths, n_estimators);
  if (y.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (folds < 2 || static_cast<std::size_t>(folds) > x.rows)
    throw Error(ErrorCode::InvalidArgument,
                "cv folds must be in [2, number of samples]");

  std::vector<std::size_t> order(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  // Contiguous slices of the shuffled order; sizes differ by at most one.
  std::vector<std::size_t> bounds(static_cast<std::size_t>(folds) + 1, 0);
  std::size_t quot = x.rows / static_cast<std::size_t>(folds);
  std::size_t rem = x.rows % static_cast<std::size_t>(folds);
  for (std::size_t f = 0; f < static_cast<std::size_t>(folds); ++f)
    bounds[f + 1] = bounds[f] + quot + (f < rem ? 1 : 0);

  return sweep(base, lrs, depths, n_estimators,
               [&](TrialResult& trial, const BoostParams& params) {
                 double train_sum = 0, val_sum = 0;
                 for (std::size_t f = 0; f < static_cast<std::size_t>(folds);
                      ++f) {
                   std::vector<std::size_t> val_idx(
                       order.begin() + bounds[f], order.begin() + bounds[f + 1]);
                   std::vector<std::size_t> train_idx;
                   train_idx.reserve(x.rows - val_idx.size());
                   train_idx.insert(train_idx.end(), order.begin(),
                                    order.begin() + bounds[f]);
                   train_idx.insert(train_idx.end(),
                                    order.begin() + bounds[f + 1], order.end());

                   Matrix x_train = take_rows(x, train_idx);
                   Matrix x_val = take_rows(x, val_idx);
                   std::vector<double> y_train = take(y, train_idx);
                   std::vector<double> y_val = take(y, val_idx);
                   FitEval fe = fit_eval(family, x_train, y_train, params, x_val);
                   train_sum += regression_metrics(y_train, fe.train_pred).r2;
                   val_sum += regression_metrics(y_val, fe.val_pred).r2;
                 }
                 trial.train_r2 = train_sum / folds;
                 trial.val_r2 = val_sum / folds;
               });
}

}  // namespace soniclog
