#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace soniclog {

// Heteroscedastic Normal parameterized by (mu, log_sigma).  Working in
// log-space keeps sigma positive without constrained optimization.
struct NormalParams {
  double mu = 0;
  double log_sigma = 0;

  double sigma() const;
};

// Bounds applied to log_sigma whenever parameters are materialized; they stop
// runaway variance updates from overflowing exp().
inline constexpr double kMinLogSigma = -13.815510557964274;  // ln(1e-6)
inline constexpr double kMaxLogSigma = 13.815510557964274;   // ln(1e6)

double clamp_log_sigma(double log_sigma);

// Per-sample negative log-likelihood of y under N(mu, sigma^2).
double nll_score(const NormalParams& p, double y);

// Ordinary gradient of the NLL with respect to (mu, log_sigma).
std::array<double, 2> score_gradient(const NormalParams& p, double y);

// Fisher information of the (mu, log_sigma) parameterization; diagonal, and
// independent of mu, so only the two diagonal entries are returned.
std::array<double, 2> fisher_info(const NormalParams& p);

// Natural gradient: ordinary gradient preconditioned by the inverse Fisher.
std::array<double, 2> natural_gradient(const NormalParams& p, double y);

// Marginal fit used to initialize boosting: mean and population std of y.
NormalParams init_params(std::span<const double> y);

double normal_cdf(double x);

// Inverse of normal_cdf on (0, 1); exact at 0.5, Error outside (0, 1).
double inverse_normal_cdf(double p);

// Central interval [mu - z*sigma, mu + z*sigma] covering `level` probability;
// level lives in [0, 1), where 0 degenerates to the zero-width interval at mu.
struct Interval {
  double lo = 0;
  double hi = 0;
};
Interval confidence_interval(const NormalParams& p, double level);

}  // namespace soniclog
