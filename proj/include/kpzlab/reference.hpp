// Closed-form reference values used by the verification suites: polygamma
// functions by recurrence plus the Bernoulli asymptotic series, and the
// log-weight cumulants of the kernels that reduce to gamma/beta normalizers.
// Deliberately independent of the quadrature path they are checked against.
#pragma once

#include <cmath>

#include "kpzlab/mellin.hpp"

namespace kpzlab::reference {

// Psi_k(x) = d^{k+1}/dx^{k+1} log Gamma(x), k = 0..3.
inline double polygamma(int m, double x) {
  // Lift to the asymptotic regime: Psi_m(x) = Psi_m(x+1) - (-1)^m m! x^{-m-1}.
  double acc = 0.0;
  double fact_m = 1.0;
  for (int i = 2; i <= m; ++i) fact_m *= i;
  const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
  while (x < 16.0) {
    acc -= sign_m * fact_m * std::pow(x, -(m + 1));
    x += 1.0;
  }
  static const double kB2n[] = {1.0 / 6.0,  -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
                                5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
  double series = 0.0;
  if (m == 0) {
    series = std::log(x) - 0.5 / x;
    const double xp = 1.0 / (x * x);
    double pw = xp;
    for (int n = 1; n <= 7; ++n) {
      series -= kB2n[n - 1] * pw / (2.0 * n);
      pw *= xp;
    }
  } else {
    double fact_m1 = fact_m / m;  // (m-1)!
    double s = fact_m1 * std::pow(x, -m) + fact_m * 0.5 * std::pow(x, -(m + 1));
    for (int n = 1; n <= 7; ++n) {
      double num = 1.0;  // (2n+m-1)! / (2n)!
      for (int i = 2 * n + 1; i <= 2 * n + m - 1; ++i) num *= i;
      s += kB2n[n - 1] * num * std::pow(x, -(2 * n + m));
    }
    series = (m % 2 == 1 ? 1.0 : -1.0) * s;
  }
  return series + acc;
}

// Closed-form psi_k for the five kernels, k in [-1, 3].
inline double psi_closed_form(const WeightFamily& f, double a, int k) {
  const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
  switch (f.kind) {
    case WeightKind::Exp:
      if (k == -1) return std::lgamma(a) - a * std::log(f.beta);
      if (k == 0) return polygamma(0, a) - std::log(f.beta);
      return polygamma(k, a);
    case WeightKind::InvExp:
      if (k == -1) return a * std::log(f.beta) + std::lgamma(-a);
      if (k == 0) return std::log(f.beta) - polygamma(0, -a);
      return sgn * polygamma(k, -a);
    case WeightKind::BetaKernel:
      if (k == -1) return std::lgamma(a) + std::lgamma(f.beta) - std::lgamma(a + f.beta);
      return polygamma(k, a) - polygamma(k, a + f.beta);
    case WeightKind::InvBetaKernel:
      if (k == -1) return std::lgamma(-a) + std::lgamma(f.mu) - std::lgamma(f.mu - a);
      return sgn * (polygamma(k, -a) - polygamma(k, f.mu - a));
    case WeightKind::Ratio:
      if (k == -1)
        return std::lgamma(a + f.beta + f.mu) + std::lgamma(-a) - std::lgamma(f.beta + f.mu);
      return polygamma(k, a + f.beta + f.mu) + sgn * polygamma(k, -a);
  }
  return 0.0;
}

}  // namespace kpzlab::reference
