// The single-site invariant measure nu_theta ~ e^{-theta u - V(u)} du / Z:
// normalizer and cumulants by the log-window quadrature, CDF/quantile through
// a dense cumulative table with Newton polish on the exact density.
#pragma once

#include <cmath>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/potential.hpp"
#include "kpzlab/quadrature.hpp"

namespace kpzlab {

class NuTheta {
 public:
  NuTheta(const Potential& pot, double theta, int table_points = 8192)
      : pot_(pot), theta_(theta) {
    if (!(theta > 0.0)) throw OutOfDomain("nu_theta: theta must be positive");
    window_ = find_log_window([this](double u) { return log_h(u); },
                              -std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity());
    scaled_norm_ = integrate_log_scaled([this](double u) { return log_h(u); },
                                        [](double) { return 1.0; }, window_);
    if (!(scaled_norm_ > 0.0)) throw QuadratureFailure("nu_theta: normalizer failed");
    log_z_ = window_.ref + std::log(scaled_norm_);
    build_table(table_points);
  }

  double theta() const { return theta_; }
  const Potential& potential() const { return pot_; }

  // log Z(theta) = psi_{-1}
  double log_z() const { return log_z_; }

  // Cumulants of the height increment (-u) under nu_theta:
  //   psi_0 = -E[u], psi_1 = Var(u), psi_2 = -c3(u), psi_3 = c4(u) - 3 c2(u)^2.
  double psi(int k) const {
    if (k == -1) return log_z_;
    const double m1 = expectation([](double u) { return u; });
    if (k == 0) return -m1;
    auto central = [&](int j) {
      return expectation([m1, j](double u) {
        double d = u - m1, p = 1.0;
        for (int i = 0; i < j; ++i) p *= d;
        return p;
      });
    };
    switch (k) {
      case 1: return central(2);
      case 2: return -central(3);
      case 3: {
        const double c2 = central(2);
        return central(4) - 3.0 * c2 * c2;
      }
      default: throw OutOfDomain("nu_theta psi: order must be in [-1,3]");
    }
  }

  double log_density(double x) const { return log_h(x) - log_z_; }
  double density(double x) const { return std::exp(log_density(x)); }

  double cdf(double x) const {
    if (x <= grid_.front()) return 0.0;
    if (x >= grid_.back()) return 1.0;
    const std::size_t i = locate(x);
    return cum_[i] + gl2(grid_[i], x) / total_;
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw RootFindFailure("nu quantile: u outside (0,1)");
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    if (i == 0) i = 1;
    if (i >= cum_.size()) i = cum_.size() - 1;
    // linear start inside the bracket, then Newton on the table cdf
    const double f0 = cum_[i - 1], f1 = cum_[i];
    double x = grid_[i - 1] +
               (grid_[i] - grid_[i - 1]) * (u - f0) / std::max(f1 - f0, 1e-300);
    double lo = grid_[i - 1], hi = grid_[i];
    for (int it2 = 0; it2 < 60; ++it2) {
      const double err = cdf(x) - u;
      if (std::fabs(err) <= 1e-13) return x;
      if (err > 0.0) hi = x; else lo = x;
      const double rho = density(x);
      double xn = rho > 0.0 ? x - err / rho : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (xn == x) return x;
      x = xn;
    }
    return x;
  }

 private:
  double log_h(double u) const { return -theta_ * u - pot_.v(u); }

  template <class W>
  double expectation(const W& w) const {
    const double scaled = integrate_log_scaled([this](double u) { return log_h(u); }, w, window_,
                                               1e-12, 1e-13 * scaled_norm_);
    return scaled / scaled_norm_;
  }

  // 2-point Gauss-Legendre on [a,b] of the normalized density.
  double gl2(double a, double b) const {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    const double d = h * 0.5773502691896257645;
    return h * (density(c - d) + density(c + d));
  }

  std::size_t locate(double x) const {
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    return i == 0 ? 0 : i - 1;
  }

  void build_table(int n) {
    grid_.resize(static_cast<std::size_t>(n) + 1);
    cum_.resize(grid_.size());
    const double lo = window_.lo, hi = window_.hi;
    for (int i = 0; i <= n; ++i) grid_[i] = lo + (hi - lo) * i / n;
    cum_[0] = 0.0;
    for (int i = 1; i <= n; ++i) cum_[i] = cum_[i - 1] + gl2(grid_[i - 1], grid_[i]);
    total_ = cum_.back();
    if (!(total_ > 0.0)) throw QuadratureFailure("nu_theta: cdf table degenerate");
    for (auto& c : cum_) c /= total_;
  }

  Potential pot_;
  double theta_;
  LogWindow window_;
  double scaled_norm_ = 0.0, log_z_ = 0.0, total_ = 1.0;
  std::vector<double> grid_, cum_;
};

inline double psi_v(const Potential& pot, double theta, int k) {
  return NuTheta(pot, theta).psi(k);
}

}  // namespace kpzlab
