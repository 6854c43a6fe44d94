// Interaction potentials for the diffusion system: the exponential potential,
// Laplace-transform mixtures sum w_i e^{-s_i x}, and optional smooth compact
// perturbations.  A grid certificate reports the convexity/growth/derivative-
// sandwich constants the class definition asks for.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"

namespace kpzlab {

class Potential {
 public:
  static Potential exponential() { return Potential({1.0}, {1.0}); }

  static Potential laplace_mixture(std::vector<double> weights, std::vector<double> rates) {
    if (weights.size() != rates.size() || weights.empty()) {
      throw PreconditionViolated("laplace_mixture: weights and rates must match and be nonempty");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0) || !(rates[i] > 0.0)) {
        throw PreconditionViolated("laplace_mixture: weights and rates must be positive");
      }
    }
    return Potential(std::move(weights), std::move(rates));
  }

  // Default non-integrable test case.
  static Potential default_mixture() { return laplace_mixture({0.7, 0.3}, {1.0, 2.0}); }

  Potential with_bump(double amplitude, double center, double width) const {
    Potential p = *this;
    p.bump_amp_ = amplitude;
    p.bump_center_ = center;
    p.bump_width_ = width;
    return p;
  }

  double v(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * std::exp(-r_[i] * x);
    return s + bump(x, 0);
  }
  double dv(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s -= w_[i] * r_[i] * std::exp(-r_[i] * x);
    return s + bump(x, 1);
  }
  double d2v(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * r_[i] * r_[i] * std::exp(-r_[i] * x);
    return s + bump(x, 2);
  }
  double d3v(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      s -= w_[i] * r_[i] * r_[i] * r_[i] * std::exp(-r_[i] * x);
    }
    return s + bump(x, 3);
  }

  bool is_pure_exponential() const {
    return w_.size() == 1 && w_[0] == 1.0 && r_[0] == 1.0 && bump_amp_ == 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "laplace_mixture[";
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (i) os << ",";
      os << w_[i] << "*exp(-" << r_[i] << "x)";
    }
    os << "]";
    if (bump_amp_ != 0.0) {
      os << "+bump(" << bump_amp_ << "," << bump_center_ << "," << bump_width_ << ")";
    }
    return os.str();
  }

  struct Certificate {
    bool nonnegative = false;
    bool nonincreasing = false;
    bool convex = false;
    double quad_c = 0.0;      // V(x) >= quad_c x^2 for x <= -quad_big_c
    double quad_big_c = 2.0;
    double c0 = 0.0;          // c0 V'' <= -V''' <= V''/c0 + extra_c 1{x >= -quad_big_c}
    double extra_c = 0.0;
    bool sandwich_ok = false;
    bool ok() const { return nonnegative && nonincreasing && convex && quad_c > 0.0 && sandwich_ok; }
  };

  // Grid check of the defining inequalities; reports empirical constants.
  Certificate certify(double lo = -12.0, double hi = 30.0, int npts = 4001) const {
    Certificate cert;
    cert.nonnegative = cert.nonincreasing = cert.convex = true;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio_left = 0.0;
    double min_quad = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= npts; ++i) {
      const double x = lo + (hi - lo) * i / npts;
      const double vv = v(x), d1 = dv(x), d2 = d2v(x), d3 = d3v(x);
      if (vv < 0.0) cert.nonnegative = false;
      if (d1 > 1e-12) cert.nonincreasing = false;
      if (d2 < -1e-12) cert.convex = false;
      if (d2 > 0.0) {
        const double r = -d3 / d2;
        min_ratio = std::min(min_ratio, r);
        if (x < -cert.quad_big_c) max_ratio_left = std::max(max_ratio_left, r);
      }
      if (x <= -cert.quad_big_c) min_quad = std::min(min_quad, vv / (x * x));
    }
    cert.quad_c = std::isfinite(min_quad) ? min_quad : 0.0;
    cert.c0 = std::min(min_ratio, max_ratio_left > 0.0 ? 1.0 / max_ratio_left
                                                       : std::numeric_limits<double>::infinity());
    if (!(cert.c0 > 0.0) || !std::isfinite(cert.c0)) {
      cert.sandwich_ok = false;
      return cert;
    }
    double extra = 0.0;
    for (int i = 0; i <= npts; ++i) {
      const double x = lo + (hi - lo) * i / npts;
      if (x < -cert.quad_big_c) continue;
      extra = std::max(extra, -d3v(x) - d2v(x) / cert.c0);
    }
    cert.extra_c = std::max(extra, 0.0);
    cert.sandwich_ok = true;
    return cert;
  }

 private:
  Potential(std::vector<double> w, std::vector<double> r) : w_(std::move(w)), r_(std::move(r)) {}

  double bump(double x, int order) const {
    if (bump_amp_ == 0.0) return 0.0;
    const double z = (x - bump_center_) / bump_width_;
    const double g = bump_amp_ * std::exp(-0.5 * z * z);
    const double iw = 1.0 / bump_width_;
    switch (order) {
      case 0: return g;
      case 1: return -z * iw * g;
      case 2: return (z * z - 1.0) * iw * iw * g;
      case 3: return -z * (z * z - 3.0) * iw * iw * iw * g;
    }
    return 0.0;
  }

  std::vector<double> w_, r_;
  double bump_amp_ = 0.0, bump_center_ = 0.0, bump_width_ = 1.0;
};

}  // namespace kpzlab
