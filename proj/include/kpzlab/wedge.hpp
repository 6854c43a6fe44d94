// Upper tail of the wedge-initial-condition semi-discrete polymer through the
// generating-function identity: the tilt that cancels the quadratic term of
// phi, a third-order expansion with a certified fourth-order constant, and an
// optional direct simplex-simulation check at small N.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kpzlab/diffusion.hpp"
#include "kpzlab/errors.hpp"
#include "kpzlab/nu_measure.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/potential.hpp"
#include "kpzlab/pseudo_gibbs.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

// Solves psi_1^V(theta0) = t / n (the vanishing characteristic direction).
inline double solve_theta0(const Potential& pot, double t, int n) {
  const double target = t / static_cast<double>(n);
  auto g = [&](double theta) { return psi_v(pot, theta, 1) - target; };
  // psi_1 is decreasing in theta for these potentials; bracket on a log grid
  double lo = 0.0, hi = 0.0;
  bool have_lo = false;
  for (int i = 0; i <= 48; ++i) {
    const double theta = std::exp(-4.0 + 8.0 * i / 48.0);
    if (g(theta) > 0.0) {
      lo = theta;
      have_lo = true;
    } else if (have_lo) {
      hi = theta;
      break;
    }
  }
  if (!have_lo || hi == 0.0) throw RootFindFailure("theta0: no bracket on the scan grid");
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Certified max of |psi_3^V| over [lo, hi], factor-2 safety.
inline double psi3_v_certified(const Potential& pot, double lo, double hi, int grid = 17) {
  if (hi < lo) std::swap(lo, hi);
  double m = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double theta = lo + (hi - lo) * i / grid;
    m = std::max(m, std::fabs(psi_v(pot, theta, 3)));
  }
  return 2.0 * m;
}

// Upper bound on P[log Z_wedge > u + theta0 t - n psi_0(theta0)]:
//   exp(-(2 sqrt(2)/3) u^{3/2} / sqrt(n |psi_2(theta0)|) + n a*^4 M3 / 24),
// with a* = sqrt(2u/(n |psi_2|)) the optimizing tilt.
inline double wedge_bound(const Potential& pot, int n, double t, double u,
                          double* theta0_out = nullptr) {
  if (!(u >= 0.0) || u > static_cast<double>(n)) {
    throw PreconditionViolated("wedge bound: need 0 <= u <= n");
  }
  const double theta0 = solve_theta0(pot, t, n);
  if (theta0_out) *theta0_out = theta0;
  const double psi2 = psi_v(pot, theta0, 2);
  if (!(psi2 < 0.0)) throw PreconditionViolated("wedge bound: curvature condition fails");
  if (u == 0.0) return 1.0;
  const double a_star = std::sqrt(2.0 * u / (n * std::fabs(psi2)));
  const double m3 = psi3_v_certified(pot, theta0, theta0 + a_star);
  const double log_bound = -(2.0 * std::sqrt(2.0) / 3.0) * std::pow(u, 1.5) /
                               std::sqrt(n * std::fabs(psi2)) +
                           n * std::pow(a_star, 4.0) * m3 / 24.0;
  return std::exp(log_bound);
}

struct WedgeMcResult {
  double theta0 = 0.0;
  double center = 0.0;  // theta0 t - n psi_0(theta0)
  std::vector<double> u, empirical, stderr_, bound;
};

// Direct simulation of the wedge partition function at small n: Brownian
// paths on a dt-grid, simplex integral by sorted Halton points.  Reported as
// a diagnostic; the bound evaluator above is the contract.
inline WedgeMcResult wedge_mc_check(int n, double t, const std::vector<double>& us,
                                    std::size_t replicas, std::size_t halton_points,
                                    std::uint64_t seed, double dt = 1e-3, int workers = 0) {
  if (n != 2) throw DimensionTooLarge("wedge mc: implemented for n = 2");
  const Potential pot = Potential::exponential();
  WedgeMcResult out;
  out.theta0 = solve_theta0(pot, t, n);
  out.center = out.theta0 * t - n * psi_v(pot, out.theta0, 0);
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / dt)));
  const double dt_eff = t / static_cast<double>(steps);

  std::vector<double> log_z(replicas);
  const RngStream root(seed);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const RngStream noise = root.child(r).child(5);
        // cumulative Brownian paths B_0, B_1, B_2 on the grid
        std::vector<std::vector<double>> b(3, std::vector<double>(steps + 1, 0.0));
        for (int j = 0; j < 3; ++j) {
          const RngStream path = noise.child(static_cast<std::uint64_t>(j));
          const double s = std::sqrt(dt_eff);
          for (std::size_t k = 0; k < steps; ++k) b[j][k + 1] = b[j][k] + s * path.normal_at(k);
        }
        auto b_at = [&](int j, double time) {
          const double pos = time / dt_eff;
          std::size_t k = static_cast<std::size_t>(pos);
          if (k >= steps) return b[j][steps];
          const double frac = pos - static_cast<double>(k);
          return b[j][k] + frac * (b[j][k + 1] - b[j][k]);
        };
        // E over the simplex of e^{-B0(s0) + B1(s1) - B1(s0) + B2(t) - B2(s1)}
        double acc = 0.0;
        double s0, s1;
        for (std::size_t i = 0; i < halton_points; ++i) {
          s0 = detail::radical_inverse(i + 1, 2) * t;
          s1 = detail::radical_inverse(i + 1, 3) * t;
          if (s0 > s1) std::swap(s0, s1);
          acc += std::exp(-b_at(0, s0) + b_at(1, s1) - b_at(1, s0) + b[2][steps] - b_at(2, s1));
        }
        log_z[r] = std::log(acc * t * t / 2.0 / static_cast<double>(halton_points));
      },
      workers);

  for (double u : us) {
    const double threshold = u + out.center;
    std::size_t count = 0;
    for (double z : log_z) {
      if (z > threshold) ++count;
    }
    const double p = static_cast<double>(count) / static_cast<double>(replicas);
    out.u.push_back(u);
    out.empirical.push_back(p);
    out.stderr_.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(replicas)));
    out.bound.push_back(wedge_bound(pot, n, t, u));
  }
  return out;
}

}  // namespace kpzlab
