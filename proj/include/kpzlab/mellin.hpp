// Mellin-tilted weight distributions: densities proportional to x^{a-1} f(x)
// for the five kernel functions f used by the integrable polymer models.
//
// Normalizers M_f(a) and the log-weight cumulants psi_k are computed by
// adaptive quadrature on the log scale y = log x.  CDF and quantile go
// through exact gamma/beta reductions (each kernel is a monotone transform of
// a gamma or beta variable), with a Newton polish on the actual CDF so the
// inversion meets a 1e-12 tolerance.
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "kpzlab/errors.hpp"
#include "kpzlab/quadrature.hpp"
#include "kpzlab/special.hpp"

namespace kpzlab {

enum class WeightKind { InvExp, Exp, BetaKernel, InvBetaKernel, Ratio };

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double x) const { return x > lo && x < hi; }
};

// One of the five kernels together with its parameters.
//   InvExp         e^{-beta/x}                 on (0,inf)
//   Exp            e^{-beta x}                 on (0,inf)
//   BetaKernel     (1-x)^{beta-1}              on (0,1)
//   InvBetaKernel  (1-1/x)^{mu-1}              on (1,inf)
//   Ratio          (x/(x+1))^{beta+mu}         on (0,inf)
struct WeightFamily {
  WeightKind kind = WeightKind::Exp;
  double beta = 1.0;
  double mu = 1.0;

  static WeightFamily inv_exp(double beta) { return {WeightKind::InvExp, beta, 0.0}; }
  static WeightFamily exponential(double beta) { return {WeightKind::Exp, beta, 0.0}; }
  static WeightFamily beta_kernel(double beta) { return {WeightKind::BetaKernel, beta, 0.0}; }
  static WeightFamily inv_beta_kernel(double mu) { return {WeightKind::InvBetaKernel, 0.0, mu}; }
  static WeightFamily ratio(double beta, double mu) { return {WeightKind::Ratio, beta, mu}; }

  // Convergence interval of integral x^{a-1} f(x) dx.
  Interval domain() const {
    switch (kind) {
      case WeightKind::InvExp: return {-std::numeric_limits<double>::infinity(), 0.0};
      case WeightKind::Exp: return {0.0, std::numeric_limits<double>::infinity()};
      case WeightKind::BetaKernel: return {0.0, std::numeric_limits<double>::infinity()};
      case WeightKind::InvBetaKernel: return {-std::numeric_limits<double>::infinity(), 0.0};
      case WeightKind::Ratio: return {-(beta + mu), 0.0};
    }
    return {};
  }

  // Support of the weight variable x.
  Interval support() const {
    switch (kind) {
      case WeightKind::BetaKernel: return {0.0, 1.0};
      case WeightKind::InvBetaKernel: return {1.0, std::numeric_limits<double>::infinity()};
      default: return {0.0, std::numeric_limits<double>::infinity()};
    }
  }

  // log f(e^y); -inf outside the support.
  double log_f_exp(double y) const {
    switch (kind) {
      case WeightKind::InvExp:
        return -beta * std::exp(-y);
      case WeightKind::Exp:
        return -beta * std::exp(y);
      case WeightKind::BetaKernel:
        if (y >= 0.0) return -std::numeric_limits<double>::infinity();
        return (beta - 1.0) * std::log(-std::expm1(y));
      case WeightKind::InvBetaKernel:
        if (y <= 0.0) return -std::numeric_limits<double>::infinity();
        return (mu - 1.0) * std::log(-std::expm1(-y));
      case WeightKind::Ratio:
        // log (x/(1+x)) = -log(1+e^{-y})
        return y >= 0.0 ? -(beta + mu) * std::log1p(std::exp(-y))
                        : (beta + mu) * (y - std::log1p(std::exp(y)));
    }
    return 0.0;
  }

  double log_f(double x) const {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    switch (kind) {
      case WeightKind::InvExp: return -beta / x;
      case WeightKind::Exp: return -beta * x;
      case WeightKind::BetaKernel:
        if (x >= 1.0) return -std::numeric_limits<double>::infinity();
        return (beta - 1.0) * std::log1p(-x);
      case WeightKind::InvBetaKernel:
        if (x <= 1.0) return -std::numeric_limits<double>::infinity();
        return (mu - 1.0) * std::log1p(-1.0 / x);
      case WeightKind::Ratio:
        return (beta + mu) * (std::log(x) - std::log1p(x));
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case WeightKind::InvExp: return "inv_exp";
      case WeightKind::Exp: return "exp";
      case WeightKind::BetaKernel: return "beta_kernel";
      case WeightKind::InvBetaKernel: return "inv_beta_kernel";
      case WeightKind::Ratio: return "ratio";
    }
    return "?";
  }
};

// Tilted distribution rho_{f,a}(x) = x^{a-1} f(x) / M_f(a).
class MellinDistribution {
 public:
  MellinDistribution(const WeightFamily& family, double a) : fam_(family), a_(a) {
    if (!fam_.domain().contains(a)) {
      throw OutOfDomain("mellin: tilt " + std::to_string(a) + " outside domain of " + fam_.name());
    }
    const Interval sup = fam_.support();
    const double ylo = sup.lo <= 0.0 ? -std::numeric_limits<double>::infinity() : std::log(sup.lo);
    const double yhi = std::isinf(sup.hi) ? std::numeric_limits<double>::infinity() : std::log(sup.hi);
    window_ = find_log_window([this](double y) { return log_h(y); }, ylo, yhi);
    scaled_norm_ = integrate_log_scaled([this](double y) { return log_h(y); },
                                        [](double) { return 1.0; }, window_);
    if (!(scaled_norm_ > 0.0) || !std::isfinite(scaled_norm_)) {
      throw QuadratureFailure("mellin: normalizer quadrature failed");
    }
    log_norm_ = window_.ref + std::log(scaled_norm_);
  }

  const WeightFamily& family() const { return fam_; }
  double tilt() const { return a_; }

  // psi_{-1}(a) = log M_f(a), from quadrature.
  double log_norm() const { return log_norm_; }
  double norm() const { return std::exp(log_norm_); }

  // E[w(log X)], same window as the normalizer.
  template <class W>
  double expectation(const W& w) const {
    const double scaled =
        integrate_log_scaled([this](double y) { return log_h(y); }, w, window_, 1e-12,
                             1e-13 * scaled_norm_);
    return scaled / scaled_norm_;
  }

  // psi_k(a) = (k+1)-st derivative of log M_f at a, via log-weight cumulants;
  // k in [-1, 3].
  double psi(int k) const {
    if (k == -1) return log_norm_;
    const double m1 = expectation([](double y) { return y; });
    if (k == 0) return m1;
    auto central = [&](int j) {
      return expectation([m1, j](double y) {
        double d = y - m1, p = 1.0;
        for (int i = 0; i < j; ++i) p *= d;
        return p;
      });
    };
    switch (k) {
      case 1: return central(2);
      case 2: return central(3);
      case 3: {
        const double c2 = central(2);
        return central(4) - 3.0 * c2 * c2;
      }
      default: throw OutOfDomain("psi: order must be in [-1,3]");
    }
  }

  double log_density(double x) const {
    if (!fam_.support().contains(x)) return -std::numeric_limits<double>::infinity();
    return (a_ - 1.0) * std::log(x) + fam_.log_f(x) - log_norm_;
  }
  double density(double x) const { return std::exp(log_density(x)); }

  // F(a,x), exact gamma/beta reductions.
  double cdf(double x) const {
    const Interval sup = fam_.support();
    if (x <= sup.lo) return 0.0;
    if (x >= sup.hi) return 1.0;
    switch (fam_.kind) {
      case WeightKind::InvExp:
        return gamma_q(-a_, fam_.beta / x);
      case WeightKind::Exp:
        return gamma_p(a_, fam_.beta * x);
      case WeightKind::BetaKernel:
        return beta_inc(a_, fam_.beta, x);
      case WeightKind::InvBetaKernel:
        return beta_inc(fam_.mu, -a_, 1.0 - 1.0 / x);
      case WeightKind::Ratio:
        return beta_inc(a_ + fam_.beta + fam_.mu, -a_, x / (1.0 + x));
    }
    return 0.0;
  }

  // H(a,u): inverse CDF, |cdf(H)-u| <= 1e-12.  The upper branch solves the
  // complementary problem so far tail quantiles of the power-tailed kernels
  // stay representable.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw RootFindFailure("quantile: u outside (0,1)");
    const bool upper = u > 0.5;
    double x = 0.0;
    switch (fam_.kind) {
      case WeightKind::InvExp:
        x = fam_.beta / gamma_q_inverse(-a_, u);
        break;
      case WeightKind::Exp:
        x = upper ? gamma_q_inverse(a_, 1.0 - u) / fam_.beta : gamma_p_inverse(a_, u) / fam_.beta;
        break;
      case WeightKind::BetaKernel:
        x = upper ? 1.0 - beta_inc_inverse(fam_.beta, a_, 1.0 - u)
                  : beta_inc_inverse(a_, fam_.beta, u);
        break;
      case WeightKind::InvBetaKernel:
        x = upper ? 1.0 / beta_inc_inverse(-a_, fam_.mu, 1.0 - u)
                  : 1.0 / (1.0 - beta_inc_inverse(fam_.mu, -a_, u));
        break;
      case WeightKind::Ratio: {
        if (upper) {
          const double w = beta_inc_inverse(-a_, a_ + fam_.beta + fam_.mu, 1.0 - u);
          x = (1.0 - w) / w;
        } else {
          const double v = beta_inc_inverse(a_ + fam_.beta + fam_.mu, -a_, u);
          x = v / (1.0 - v);
        }
        break;
      }
    }
    // Polish on the actual CDF (usually 0-1 steps).
    const Interval sup = fam_.support();
    for (int it = 0; it < 8; ++it) {
      const double err = cdf(x) - u;
      if (std::fabs(err) <= 1e-12) break;
      const double rho = density(x);
      if (!(rho > 0.0)) break;
      double xn = x - err / rho;
      if (!(xn > sup.lo) || !(xn < sup.hi)) break;
      x = xn;
    }
    if (!std::isfinite(x)) throw RootFindFailure("quantile: inversion failed");
    return x;
  }

  // L(a,x) = -Cov(log X, 1{X<=x}) / (x rho(x)); the logarithmic derivative of
  // the quantile coupling in the tilt, strictly positive on the interior.
  double log_deriv_L(double x) const {
    const Interval sup = fam_.support();
    if (!(x > sup.lo && x < sup.hi)) throw OutOfSupport("log_deriv_L: x outside open support");
    const double f = cdf(x);
    const double m1 = expectation([](double y) { return y; });
    // E[log X ; X <= x] over the cached window truncated at log x.
    const double lx = std::log(x);
    LogWindow wtrunc = window_;
    if (lx <= wtrunc.lo) {
      // essentially no mass below x
      return 0.0;
    }
    double partial = 0.0;
    if (lx < wtrunc.hi) wtrunc.hi = lx;
    partial = integrate_log_scaled([this](double y) { return log_h(y); },
                                   [](double y) { return y; }, wtrunc, 1e-12,
                                   1e-13 * scaled_norm_) /
              scaled_norm_;
    const double cov = partial - m1 * f;
    const double rho = density(x);
    if (!(rho > 0.0)) throw QuadratureFailure("log_deriv_L: vanishing density");
    return -cov / (x * rho);
  }

 private:
  double log_h(double y) const { return a_ * y + fam_.log_f_exp(y); }

  WeightFamily fam_;
  double a_ = 0.0;
  LogWindow window_;
  double scaled_norm_ = 0.0;
  double log_norm_ = 0.0;
};

// Contract-level free functions.
inline double mellin_norm(const WeightFamily& f, double a) {
  return MellinDistribution(f, a).norm();
}

inline double psi(const WeightFamily& f, double a, int k) {
  return MellinDistribution(f, a).psi(k);
}

// Grid-certified max of |psi_3| over [lo, hi] (no safety factor applied).
inline double psi3_interval_max(const WeightFamily& f, double lo, double hi, int grid = 33) {
  if (hi < lo) std::swap(lo, hi);
  double m = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / grid;
    m = std::max(m, std::fabs(psi(f, a, 3)));
  }
  return m;
}

}  // namespace kpzlab
