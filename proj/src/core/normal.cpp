#include "normal.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace soniclog {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double clamp_log_sigma(double log_sigma) {
  return std::clamp(log_sigma, kMinLogSigma, kMaxLogSigma);
}

double NormalParams::sigma() const { return std::exp(clamp_log_sigma(log_sigma)); }

double nll_score(const NormalParams& p, double y) {
  double ls = clamp_log_sigma(p.log_sigma);
  double s = std::exp(ls);
  double z = (y - p.mu) / s;
  return ls + 0.5 * z * z + kHalfLog2Pi;
}

std::array<double, 2> score_gradient(const NormalParams& p, double y) {
  double s = p.sigma();
  double z = (y - p.mu) / s;
  return {-z / s, 1.0 - z * z};
}

std::array<double, 2> fisher_info(const NormalParams& p) {
  double s = p.sigma();
  return {1.0 / (s * s), 2.0};
}

std::array<double, 2> natural_gradient(const NormalParams& p, double y) {
  double s = p.sigma();
  double z = (y - p.mu) / s;
  return {p.mu - y, 0.5 * (1.0 - z * z)};
}

NormalParams init_params(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit Normal to no data");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0;
  for (double v : y) {
    double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(y.size());
  NormalParams p;
  p.mu = mean;
  p.log_sigma = clamp_log_sigma(0.5 * std::log(var));
  return p;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  if (p == 0.5) return 0.0;

  // Bracket the root, then refine with Newton steps that fall back to
  // bisection whenever they would leave the bracket.
  double lo = -1.0, hi = 1.0;
  while (normal_cdf(lo) > p) lo *= 2.0;
  while (normal_cdf(hi) < p) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double f = normal_cdf(x) - p;
    if (f == 0.0) break;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    double next = x - f / pdf;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

Interval confidence_interval(const NormalParams& p, double level) {
  if (!(level >= 0.0) || !(level < 1.0))
    throw Error(ErrorCode::InvalidArgument, "confidence level must lie in [0, 1)");
  double z = inverse_normal_cdf(0.5 * (1.0 + level));
  double s = p.sigma();
  return {p.mu - z * s, p.mu + z * s};
}

}  // namespace soniclog
