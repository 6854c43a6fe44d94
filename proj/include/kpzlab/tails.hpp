// MGF-to-tail machinery: empirical MGF profiles of the free energy (stationary
// and tilted), Chernoff upper bounds, the three-term lower-tail split, and the
// slope diagnostics for the cubic scaling window.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "kpzlab/identity.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

struct MgfProfile {
  std::vector<double> lambdas;       // increasing, positive
  std::vector<McEstimate> estimates; // E[e^{sign * lambda * (X - center)}]
  double n_scale = 0.0;
  bool centered = true;

  double upper_confidence(std::size_t k) const {
    return estimates[k].mean + 2.0 * estimates[k].stderr_;
  }
};

// Profile with exactly known values (no MC spread); used for analytic and
// synthetic reference curves.
inline MgfProfile analytic_profile(std::vector<double> lambdas,
                                   const std::function<double(double)>& mgf, double n_scale) {
  MgfProfile p;
  p.lambdas = std::move(lambdas);
  p.n_scale = n_scale;
  p.estimates.reserve(p.lambdas.size());
  for (double l : p.lambdas) p.estimates.push_back({mgf(l), 0.0, 1, 0});
  return p;
}

// min over the grid of e^{-lambda u} * (MGF upper confidence).
inline double chernoff_upper(const MgfProfile& profile, double u) {
  if (!(u >= 0.0)) throw PreconditionViolated("chernoff_upper: u must be nonnegative");
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < profile.lambdas.size(); ++k) {
    const double ucb = profile.upper_confidence(k);
    if (!std::isfinite(ucb)) continue;
    any = true;
    best = std::min(best, std::exp(-profile.lambdas[k] * u) * ucb);
  }
  if (!any) throw EmptyProfile("chernoff_upper: no finite estimates");
  return best;
}

// Lower bound on P[X > u0] from the split
//   c e^{c N a^3} <= E[e^{aX}] <= e^{a u1} P[X>u0] + e^{a u0}
//                                 + E[e^{2aX}]^{1/2} P[X>u1]^{1/2},
// with MGF(2a) taken at the nearest grid point >= 2a (conservative by
// convexity) and P[X>u1] bounded by the Chernoff curve.  A nonpositive return
// signals a vacuous window.
inline double lower_tail_from_mgf(const MgfProfile& profile, double u0, double u1, double a,
                                  double c_lower) {
  if (profile.lambdas.empty()) throw EmptyProfile("lower_tail_from_mgf: empty profile");
  if (!(u1 > u0 && u0 > 0.0 && a > 0.0)) {
    throw PreconditionViolated("lower_tail_from_mgf: need 0 < u0 < u1 and a > 0");
  }
  std::size_t k2 = profile.lambdas.size();
  for (std::size_t k = 0; k < profile.lambdas.size(); ++k) {
    if (profile.lambdas[k] >= 2.0 * a - 1e-12) {
      k2 = k;
      break;
    }
  }
  if (k2 == profile.lambdas.size()) {
    throw GridTooCoarse("lower_tail_from_mgf: grid does not reach 2a");
  }
  const double mgf_lower = c_lower * std::exp(c_lower * profile.n_scale * a * a * a);
  const double cross = std::sqrt(profile.upper_confidence(k2)) *
                       std::sqrt(chernoff_upper(profile, u1));
  return std::exp(-a * u1) * (mgf_lower - std::exp(a * u0) - cross);
}

enum class MgfMode {
  Stationary,  // E[e^{+-lambda (log Z^{a,b} - mean)}], one replica pool
  Tilted       // E[e^{+-lambda (log Z^{a-+lambda,b} - mean)}], boundary re-tilted per lambda
};

struct MgfPair {
  MgfProfile plus, minus;
  std::vector<double> log_z;  // stationary replica values (Stationary mode)
  double center = 0.0;
};

inline void check_char_direction(const ModelSpec& spec, double a, double b, int m, int n,
                                 double n_scale, double a_char) {
  const double dev_m = std::fabs(m - n_scale * psi(spec.f2(), b, 1));
  const double dev_n = std::fabs(n - n_scale * psi(spec.f1(), a, 1));
  const double cap = a_char * std::pow(n_scale, 2.0 / 3.0);
  if (dev_m > cap || dev_n > cap) {
    throw PreconditionViolated("characteristic direction condition fails for (m,n,N,A)");
  }
}

// Centered MGF profiles on a lambda grid.  In Tilted mode the bulk weights
// are sampled once per replica and shared across the boundary tilts, and the
// centering constant is the exact stationary mean; in Stationary mode all
// lambdas reuse one replica pool and the empirical mean centers the profile.
inline MgfPair mgf_profile_mc(const ModelSpec& spec, double a, double b, int m, int n,
                              const std::vector<double>& lambdas, std::size_t replicas,
                              std::uint64_t seed, MgfMode mode, double n_scale, double a_char,
                              int workers = 0) {
  const BoundaryParams st{a, b};
  st.validate(spec);
  if (!st.stationary(spec)) throw PreconditionViolated("mgf profile: needs a+b = a3");
  check_char_direction(spec, a, b, m, n, n_scale, a_char);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0) || (k + 1 < lambdas.size() && !(lambdas[k] < lambdas[k + 1]))) {
      throw PreconditionViolated("mgf profile: lambda grid must be nonnegative increasing");
    }
  }

  MgfPair out;
  out.plus.lambdas = lambdas;
  out.minus.lambdas = lambdas;
  out.plus.n_scale = out.minus.n_scale = n_scale;
  const RngStream root(seed);

  if (mode == MgfMode::Stationary) {
    const EnvironmentSampler sampler(spec, st);
    out.log_z.resize(replicas);
    parallel_for(
        replicas,
        [&](std::size_t r) {
          out.log_z[r] = log_partition_value(sampler.sample(m, n, root.child(r).bits_at(0)));
        },
        workers);
    out.center = pairwise_sum(out.log_z) / static_cast<double>(replicas);
    std::vector<double> expo(replicas);
    for (double sign : {+1.0, -1.0}) {
      MgfProfile& prof = sign > 0 ? out.plus : out.minus;
      for (double lambda : lambdas) {
        for (std::size_t r = 0; r < replicas; ++r) {
          expo[r] = sign * lambda * (out.log_z[r] - out.center);
        }
        prof.estimates.push_back(exp_mean_stderr(expo, seed));
      }
    }
    return out;
  }

  out.center = mean_log_z(spec, a, b, m, n);
  std::vector<EnvironmentSampler> plus_samplers, minus_samplers;
  plus_samplers.reserve(lambdas.size());
  minus_samplers.reserve(lambdas.size());
  for (double lambda : lambdas) {
    plus_samplers.emplace_back(spec, BoundaryParams{a - lambda, b});
    minus_samplers.emplace_back(spec, BoundaryParams{a + lambda, b});
  }
  std::vector<double> plus_expo(lambdas.size() * replicas);
  std::vector<double> minus_expo(lambdas.size() * replicas);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t sub = root.child(r).bits_at(0);
        const BulkWeights bulk = sample_bulk(spec, m, n, sub);
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
          const double zp = log_partition_value(plus_samplers[k].sample_with_bulk(bulk, sub));
          plus_expo[k * replicas + r] = lambdas[k] * (zp - out.center);
          const double zm = log_partition_value(minus_samplers[k].sample_with_bulk(bulk, sub));
          minus_expo[k * replicas + r] = -lambdas[k] * (zm - out.center);
        }
      },
      workers);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out.plus.estimates.push_back(exp_mean_stderr(
        std::span<const double>(plus_expo.data() + k * replicas, replicas), seed));
    out.minus.estimates.push_back(exp_mean_stderr(
        std::span<const double>(minus_expo.data() + k * replicas, replicas), seed));
  }
  return out;
}

// Centered MGF profile of an arbitrary replica sample (used to reuse the
// tail machinery on diffusion height samples).
inline MgfProfile mgf_profile_from_samples(const std::vector<double>& samples,
                                           const std::vector<double>& lambdas, double n_scale,
                                           double sign = +1.0, std::uint64_t seed = 0) {
  MgfProfile prof;
  prof.lambdas = lambdas;
  prof.n_scale = n_scale;
  const double center =
      pairwise_sum(samples) / static_cast<double>(samples.size());
  std::vector<double> expo(samples.size());
  for (double lambda : lambdas) {
    for (std::size_t r = 0; r < samples.size(); ++r) {
      expo[r] = sign * lambda * (samples[r] - center);
    }
    prof.estimates.push_back(exp_mean_stderr(expo, seed));
  }
  return prof;
}

struct TailCurve {
  std::vector<double> s;         // thresholds in units of N^{1/3}
  std::vector<double> u;         // absolute thresholds
  std::vector<double> tail_emp;  // P[X >= u]
  std::vector<double> tail_se;   // binomial
  std::vector<double> chernoff;  // paired upper bounds
};

inline TailCurve tail_curve_from_samples(const std::vector<double>& log_z, double center,
                                         double n_scale, const std::vector<double>& s_grid,
                                         const MgfProfile& profile) {
  TailCurve curve;
  const double scale = std::pow(n_scale, 1.0 / 3.0);
  const double r = static_cast<double>(log_z.size());
  for (double s : s_grid) {
    const double u = s * scale;
    std::size_t count = 0;
    for (double z : log_z) {
      if (z - center >= u) ++count;
    }
    const double p = static_cast<double>(count) / r;
    curve.s.push_back(s);
    curve.u.push_back(u);
    curve.tail_emp.push_back(p);
    curve.tail_se.push_back(std::sqrt(p * (1.0 - p) / r));
    curve.chernoff.push_back(chernoff_upper(profile, u));
  }
  return curve;
}

// Empirical upper tail of log Z - E log Z at thresholds s N^{1/3}, paired
// with Chernoff bounds from a stationary profile of the same replica pool.
inline TailCurve tail_curve_mc(const ModelSpec& spec, double a, double b, int m, int n,
                               const std::vector<double>& s_grid,
                               const std::vector<double>& lambdas, std::size_t replicas,
                               std::uint64_t seed, double n_scale, double a_char,
                               int workers = 0) {
  const MgfPair pair = mgf_profile_mc(spec, a, b, m, n, lambdas, replicas, seed,
                                      MgfMode::Stationary, n_scale, a_char, workers);
  return tail_curve_from_samples(pair.log_z, pair.center, n_scale, s_grid, pair.plus);
}

// Slope of log |log MGF| against log lambda over a lambda window; the cubic
// regime shows slope 3.
inline LinearFit mgf_cubic_fit(const MgfProfile& profile, double lambda_lo, double lambda_hi) {
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < profile.lambdas.size(); ++k) {
    const double l = profile.lambdas[k];
    if (l < lambda_lo - 1e-12 || l > lambda_hi + 1e-12) continue;
    const double mgf = profile.estimates[k].mean;
    const double lg = std::log(mgf);
    if (!(std::fabs(lg) > 0.0) || !std::isfinite(lg)) continue;
    xs.push_back(std::log(l));
    ys.push_back(std::log(std::fabs(lg)));
    const double se_y = profile.estimates[k].stderr_ / (mgf * std::fabs(lg));
    ws.push_back(1.0 / (se_y * se_y + 1e-24));
  }
  if (xs.size() < 3) throw GridTooCoarse("mgf_cubic_fit: fewer than 3 usable grid points");
  return linear_fit(xs, ys, ws);
}

// Legendre-type rate at threshold u over the profile grid,
//   R(u) = max_k (lambda_k u - log mgf_k),
// with an interior-argmax flag so fits can exclude grid-saturated points.
struct RateValue {
  double rate = 0.0;
  bool interior = false;
};

inline RateValue rate_transform(const MgfProfile& profile, double u, bool use_ucb = false) {
  if (profile.lambdas.empty()) throw EmptyProfile("rate_transform: empty profile");
  RateValue out;
  out.rate = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t k = 0; k < profile.lambdas.size(); ++k) {
    const double mgf = use_ucb ? profile.upper_confidence(k) : profile.estimates[k].mean;
    if (!(mgf > 0.0) || !std::isfinite(mgf)) continue;
    const double v = profile.lambdas[k] * u - std::log(mgf);
    if (v > out.rate) {
      out.rate = v;
      best = k;
    }
  }
  out.interior = best + 1 < profile.lambdas.size() && best > 0;
  return out;
}

// Slope of log(-log bound) against log s for a Chernoff curve, restricted to
// a window of bound values; the cubic-MGF regime shows slope 3/2.
inline LinearFit tail_exponent_fit(const std::vector<double>& s, const std::vector<double>& bound,
                                   double bound_min = 1e-8, double bound_max = 0.5) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(bound[k] > bound_min && bound[k] < bound_max)) continue;
    xs.push_back(std::log(s[k]));
    ys.push_back(std::log(-std::log(bound[k])));
  }
  if (xs.size() < 3) throw GridTooCoarse("tail_exponent_fit: fewer than 3 points in window");
  return linear_fit(xs, ys);
}

// Default geometric lambda grid (ratio sqrt 2) from lo up to hi.
inline std::vector<double> geometric_lambdas(double lo, double hi) {
  std::vector<double> out;
  for (double l = lo; l <= hi * (1.0 + 1e-12); l *= std::sqrt(2.0)) out.push_back(l);
  return out;
}

}  // namespace kpzlab
