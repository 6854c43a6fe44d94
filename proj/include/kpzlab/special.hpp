// Special functions needed by the samplers and test statistics: regularized
// incomplete gamma/beta with inverses, the normal CDF/quantile, and the
// Kolmogorov distribution.  Classic series / continued-fraction forms, double
// precision throughout.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "kpzlab/errors.hpp"

namespace kpzlab {

inline double log_gamma(double x) { return std::lgamma(x); }

namespace detail {

// P(a,x) by series, valid for x < a+1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw QuadratureFailure("gamma_p series did not converge");
}

// Q(a,x) by modified Lentz continued fraction, valid for x >= a+1.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 4e-16) {
      return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
    }
  }
  throw QuadratureFailure("gamma_q continued fraction did not converge");
}

}  // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw OutOfDomain("gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

inline double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw OutOfDomain("gamma_q: shape must be positive");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Standard normal CDF and quantile.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw OutOfDomain("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation, then one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Inverse of P(a,.) in x.  Newton with bisection safeguard.
inline double gamma_p_inverse(double a, double p) {
  if (!(a > 0.0)) throw OutOfDomain("gamma_p_inverse: shape must be positive");
  if (!(p > 0.0 && p < 1.0)) throw OutOfDomain("gamma_p_inverse: p outside (0,1)");
  double x;
  if (a > 1.0) {
    // Wilson-Hilferty start.
    const double z = normal_quantile(p);
    const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * t * t * t;
    if (x <= 0.0) x = 1e-8 * a;
  } else {
    const double t = 1.0 - a * (0.253 + a * 0.12);
    x = (p < t) ? std::pow(p / t, 1.0 / a) : 1.0 - std::log1p(-(p - t) / (1.0 - t));
  }
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  const double lga = log_gamma(a);
  for (int it = 0; it < 200; ++it) {
    const double f = gamma_p(a, x) - p;
    if (std::fabs(f) <= 4e-16) return x;
    if (f > 0.0) hi = x; else lo = x;
    if (std::isfinite(hi) && hi - lo <= 4e-16 * hi) return 0.5 * (lo + hi);
    const double logpdf = (a - 1.0) * std::log(x) - x - lga;
    double xn = x - f * std::exp(-logpdf);
    if (!(xn > lo && xn < hi) || xn == x) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * x, 1.0);
    }
    x = xn;
  }
  return x;
}

// Inverse of Q(a,.) in x; accurate also for small q (deep upper tail).
inline double gamma_q_inverse(double a, double q) {
  if (!(q > 0.0 && q < 1.0)) throw OutOfDomain("gamma_q_inverse: q outside (0,1)");
  if (q > 0.5) return gamma_p_inverse(a, 1.0 - q);
  // Newton on Q directly, avoiding cancellation at p near 1.
  double x = gamma_p_inverse(a, 0.5);
  const double lga = log_gamma(a);
  const double guess = -std::log(q) + (a - 1.0) * std::log(std::max(1.0, -std::log(q)));
  if (guess > x) x = guess;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double f = gamma_q(a, x) - q;
    if (std::fabs(f) <= 4e-16 * q + 1e-300) return x;
    if (f < 0.0) hi = x; else lo = x;
    if (std::isfinite(hi) && hi - lo <= 4e-16 * hi) return 0.5 * (lo + hi);
    const double logpdf = (a - 1.0) * std::log(x) - x - lga;
    double xn = x + f * std::exp(-logpdf);
    if (!(xn > lo && xn < hi) || xn == x) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * x, 1.0);
    }
    x = xn;
  }
  return x;
}

namespace detail {

inline double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 4e-16) return h;
  }
  throw QuadratureFailure("beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a,b).
inline double beta_inc(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw OutOfDomain("beta_inc: shapes must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbeta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta) *
                   detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double beta_inc_inverse(double a, double b, double p) {
  if (!(p > 0.0 && p < 1.0)) throw OutOfDomain("beta_inc_inverse: p outside (0,1)");
  // Abramowitz-Stegun 26.5.22 start, then safeguarded Newton.
  double x;
  {
    const double yp = normal_quantile(1.0 - p);
    const double al = 1.0 / (2.0 * a - 1.0);
    const double be = 1.0 / (2.0 * b - 1.0);
    if (a > 0.5 && b > 0.5) {
      const double lam = (yp * yp - 3.0) / 6.0;
      const double h = 2.0 / (al + be);
      const double w = yp * std::sqrt(h + lam) / h - (be - al) * (lam + 5.0 / 6.0 - 2.0 / (3.0 * h));
      x = a / (a + b * std::exp(2.0 * w));
    } else {
      const double lna = std::log(a / (a + b)), lnb = std::log(b / (a + b));
      const double t = std::exp(a * lna) / a, u = std::exp(b * lnb) / b;
      const double w = t + u;
      x = (p < t / w) ? std::pow(a * w * p, 1.0 / a) : 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
    }
  }
  if (!(x > 0.0 && x < 1.0)) x = 0.5;
  const double lbeta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double f = beta_inc(a, b, x) - p;
    if (std::fabs(f) <= 4e-16) return x;
    if (f > 0.0) hi = x; else lo = x;
    if (hi - lo <= 4e-16 * hi) return 0.5 * (lo + hi);
    const double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
    double xn = x - f * std::exp(-logpdf);
    if (!(xn > lo && xn < hi) || xn == x) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return x;
}

// Complementary CDF of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
// Two Jacobi theta series, switched for accuracy (as in the classic probks).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double t = std::exp(-3.14159265358979323846 * 3.14159265358979323846 /
                              (8.0 * lambda * lambda));
    const double k = std::sqrt(2.0 * 3.14159265358979323846) / lambda *
                     (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
    return 1.0 - k;
  }
  const double t = std::exp(-2.0 * lambda * lambda);
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::pow(t, static_cast<double>(k) * k);
    q += term;
    if (std::fabs(term) < 1e-18) break;
    sign = -sign;
  }
  return q < 0.0 ? 0.0 : q;
}

}  // namespace kpzlab
