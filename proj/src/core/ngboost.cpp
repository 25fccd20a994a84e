#include "ngboost.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace soniclog {

NormalParams NGBoostModel::predict_row(std::span<const double> x) const {
  // Same accumulation order as training so stored and recomputed parameters
  // agree bit-for-bit.
  double mu = theta0.mu;
  double ls = theta0.log_sigma;
  for (const auto& stage : stages) {
    mu -= learning_rate * stage.rho * stage.tree_mu.predict(x);
    ls -= learning_rate * stage.rho * stage.tree_log_sigma.predict(x);
  }
  return {mu, ls};
}

std::vector<NormalParams> NGBoostModel::predict_dist(const Matrix& x) const {
  if (x.cols != n_features)
    throw Error(ErrorCode::InvalidInput, "feature count mismatch");
  std::vector<NormalParams> out(x.rows);
  std::vector<double> row(x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    x.row(r, row.data());
    out[r] = predict_row(row);
  }
  return out;
}

std::vector<double> NGBoostModel::predict(const Matrix& x) const {
  std::vector<NormalParams> dist = predict_dist(x);
  std::vector<double> out(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) out[i] = dist[i].mu;
  return out;
}

double line_search_rho(std::span<const NormalParams> params,
                       std::span<const std::array<double, 2>> steps,
                       std::span<const double> y, double eta) {
  const std::size_t n = params.size();
  double base = 0;
  for (std::size_t i = 0; i < n; ++i) base += nll_score(params[i], y[i]);
  base /= static_cast<double>(n);

  double rho = 1.0;
  for (int k = 0; k <= 20; ++k, rho *= 0.5) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      NormalParams moved{params[i].mu - eta * rho * steps[i][0],
                         params[i].log_sigma - eta * rho * steps[i][1]};
      total += nll_score(moved, y[i]);
    }
    if (total / static_cast<double>(n) < base) return rho;
  }
  return 0.0;
}

NGBoostModel fit_ngboost(const Matrix& x, std::span<const double> targets,
                         const BoostParams& params) {
  if (x.rows == 0) throw Error(ErrorCode::EmptyInput, "empty training input");
  if (x.rows < 2)
    throw Error(ErrorCode::InvalidArgument,
                "distribution fitting needs at least 2 samples");
  if (targets.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (params.n_estimators < 1)
    throw Error(ErrorCode::InvalidArgument, "n_estimators must be >= 1");
  if (!(params.learning_rate > 0) || params.learning_rate > 1)
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be in (0, 1]");
  for (double v : targets)
    if (!std::isfinite(v))
      throw Error(ErrorCode::InvalidInput, "non-finite training target");

  NGBoostModel model;
  model.n_features = x.cols;
  model.learning_rate = params.learning_rate;
  model.theta0 = init_params(targets);

  Presort presort = Presort::build(x);
  const std::size_t n = x.rows;
  // Raw per-sample parameters; clamping happens inside the scoring functions
  // so repeated updates never saturate the stored values themselves.
  std::vector<NormalParams> theta(n, model.theta0);
  std::vector<double> ng_mu(n), ng_ls(n);
  std::vector<std::array<double, 2>> steps(n);
  std::vector<double> row(x.cols);

  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      auto ng = natural_gradient(theta[i], targets[i]);
      ng_mu[i] = ng[0];
      ng_ls[i] = ng[1];
    }

    TreeParams tp = params.tree;
    tp.seed = mix_seed(params.tree.seed, 2 * static_cast<std::uint64_t>(m));
    NGStage stage;
    stage.tree_mu = fit_tree(x, ng_mu, {}, tp, presort);
    tp.seed = mix_seed(params.tree.seed, 2 * static_cast<std::uint64_t>(m) + 1);
    stage.tree_log_sigma = fit_tree(x, ng_ls, {}, tp, presort);

    for (std::size_t i = 0; i < n; ++i) {
      x.row(i, row.data());
      steps[i] = {stage.tree_mu.predict(row), stage.tree_log_sigma.predict(row)};
    }
    stage.rho = line_search_rho(theta, steps, targets, params.learning_rate);

    bool stalled = stage.rho == 0.0;
    if (!stalled) {
      for (std::size_t i = 0; i < n; ++i) {
        theta[i].mu -= params.learning_rate * stage.rho * steps[i][0];
        theta[i].log_sigma -= params.learning_rate * stage.rho * steps[i][1];
      }
    }
    model.stages.push_back(std::move(stage));

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += nll_score(theta[i], targets[i]);
    model.training_nll.push_back(total / static_cast<double>(n));

    // rho == 0 means no scaling of this step improves the fit; later stages
    // would see the identical state and stall the same way, so stop here.
    if (stalled) break;
  }
  return model;
}

}  // namespace soniclog
