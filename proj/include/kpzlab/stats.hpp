// Monte Carlo estimates, deterministic reductions, KS tests and small
// regression helpers shared by the verification suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/special.hpp"

namespace kpzlab {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
};

// Pairwise summation: deterministic (fixed association order) and accurate.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

inline McEstimate mean_stderr(std::span<const double> xs, std::uint64_t seed = 0) {
  const std::size_t n = xs.size();
  if (n < 2) throw PreconditionViolated("mean_stderr: need at least 2 replicas");
  const double mean = pairwise_sum(xs) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n, seed};
}

// Mean and stderr of exp(t_i), computed with the running max subtracted so
// large exponents cannot overflow.
inline McEstimate exp_mean_stderr(std::span<const double> ts, std::uint64_t seed = 0) {
  const std::size_t n = ts.size();
  if (n < 2) throw PreconditionViolated("exp_mean_stderr: need at least 2 replicas");
  const double m = *std::max_element(ts.begin(), ts.end());
  std::vector<double> e1(n), e2(n);
  for (std::size_t i = 0; i < n; ++i) {
    e1[i] = std::exp(ts[i] - m);
    e2[i] = e1[i] * e1[i];
  }
  const double s1 = pairwise_sum(e1);
  const double s2 = pairwise_sum(e2);
  const double nn = static_cast<double>(n);
  const double mean_scaled = s1 / nn;
  double var_scaled = (s2 - s1 * s1 / nn) / (nn - 1.0);
  if (var_scaled < 0.0) var_scaled = 0.0;
  const double scale = std::exp(m);
  return {scale * mean_scaled, scale * std::sqrt(var_scaled / nn), n, seed};
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS against a CDF; samples need not be sorted.
inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  const std::size_t n = xs.size();
  if (n == 0) throw PreconditionViolated("ks_test: empty sample");
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(xs[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(f - lo), std::fabs(hi - f)));
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  return {d, kolmogorov_q(lambda)};
}

inline KsResult ks_test_two_sample(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw PreconditionViolated("ks_test_two_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double nx = static_cast<double>(xs.size()), ny = static_cast<double>(ys.size());
  while (i < xs.size() && j < ys.size()) {
    if (xs[i] <= ys[j]) ++i; else ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = std::sqrt(nx * ny / (nx + ny));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return {d, kolmogorov_q(lambda)};
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_half_width = 0.0;  // 95%, residual-scaled
  std::size_t points = 0;
  double slope_lo() const { return slope - ci_half_width; }
  double slope_hi() const { return slope + ci_half_width; }
};

namespace detail {
// Two-sided 97.5% Student t quantiles for small dof; ~1.96 beyond the table.
inline double t_quantile_975(std::size_t dof) {
  static const double tbl[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                               2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                               2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                               2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return 12.706;
  if (dof <= 30) return tbl[dof - 1];
  return 1.96 + 2.4 / static_cast<double>(dof);
}
}  // namespace detail

// Weighted least squares y = intercept + slope*x; weights default to 1.
// The slope CI is scaled by the residual chi^2 when the fit is poor, so
// systematic curvature honestly widens the interval.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w = {}) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw PreconditionViolated("linear_fit: need n >= 3 matching points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    swx += wi * x[i];
    swy += wi * y[i];
    swxx += wi * x[i] * x[i];
    swxy += wi * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) throw PreconditionViolated("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.points = n;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += wi * r * r;
  }
  const double dof = static_cast<double>(n - 2);
  double var_slope = sw / det;
  const double scale = std::max(1.0, chi2 / std::max(dof, 1.0));
  var_slope *= scale;
  fit.slope_se = std::sqrt(var_slope);
  fit.ci_half_width = detail::t_quantile_975(n - 2) * fit.slope_se;
  return fit;
}

}  // namespace kpzlab
