// Exact generating-function identities for the stationary polymer models and
// the exit-point tail bounds built on them: closed-form right-hand sides from
// the log-normalizer, Monte Carlo left-hand sides over sampled environments,
// the third-order expansion, and certified-constant tail bounds.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kpzlab/lattice.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

enum class EjsSide { PerturbA, PerturbB };

struct EjsQuery {
  ModelSpec spec;
  double a = 0.0, b = 0.0;  // stationary pair, a + b = a3
  double lambda = 0.0;
  int m = 0, n = 0;
  EjsSide side = EjsSide::PerturbA;

  BoundaryParams perturbed() const {
    return side == EjsSide::PerturbA ? BoundaryParams{a - lambda, b}
                                     : BoundaryParams{a, b - lambda};
  }

  void validate() const {
    const BoundaryParams st{a, b};
    st.validate(spec);
    if (!st.stationary(spec)) throw PreconditionViolated("ejs: (a,b) must satisfy a+b = a3");
    if (m < 0 || n < 0) throw DimensionError("ejs: m, n must be nonnegative");
    const Interval d1 = spec.f1().domain(), d2 = spec.f2().domain();
    if (side == EjsSide::PerturbA) {
      if (!d1.contains(a - lambda) || !d2.contains(b + lambda)) {
        throw OutOfDomain("ejs: lambda leaves the perturbed tilts admissible domain");
      }
    } else {
      if (!d1.contains(a + lambda) || !d2.contains(b - lambda)) {
        throw OutOfDomain("ejs: lambda leaves the perturbed tilts admissible domain");
      }
    }
  }
};

// Closed form for E[e^{lambda log Z}] of the half-perturbed environment.
inline double ejs_rhs(const EjsQuery& q) {
  q.validate();
  if (q.lambda == 0.0) return 1.0;
  double log_rhs;
  if (q.side == EjsSide::PerturbA) {
    log_rhs = q.m * (psi(q.spec.f1(), q.a, -1) - psi(q.spec.f1(), q.a - q.lambda, -1)) +
              q.n * (psi(q.spec.f2(), q.b + q.lambda, -1) - psi(q.spec.f2(), q.b, -1));
  } else {
    log_rhs = q.m * (psi(q.spec.f1(), q.a + q.lambda, -1) - psi(q.spec.f1(), q.a, -1)) +
              q.n * (psi(q.spec.f2(), q.b, -1) - psi(q.spec.f2(), q.b - q.lambda, -1));
  }
  return std::exp(log_rhs);
}

// Monte Carlo of the same expectation: replicas of the half-perturbed
// environment, exp(lambda log Z) averaged with max-subtraction.
inline McEstimate ejs_lhs_mc(const EjsQuery& q, std::size_t replicas, std::uint64_t seed,
                             int workers = 0) {
  q.validate();
  const EnvironmentSampler sampler(q.spec, q.perturbed());
  std::vector<double> exponents(replicas);
  const RngStream root(seed);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t sub = root.child(r).bits_at(0);
        const Environment env = sampler.sample(q.m, q.n, sub);
        exponents[r] = q.lambda * log_partition_value(env);
      },
      workers);
  McEstimate est = exp_mean_stderr(exponents, seed);
  return est;
}

// E[log Z] at a stationary pair: m psi_0^{f1}(a) + n psi_0^{f2}(b).
inline double mean_log_z(const ModelSpec& spec, double a, double b, int m, int n) {
  const BoundaryParams st{a, b};
  st.validate(spec);
  if (!st.stationary(spec)) throw PreconditionViolated("mean_log_z: needs a+b = a3");
  return m * psi(spec.f1(), a, 0) + n * psi(spec.f2(), b, 0);
}

// Third-order expansion of E[e^{lambda(log Z^{a-lambda,b} - E log Z^{a,b})}],
// without the fourth-order remainder.
inline double taylor_rhs(const ModelSpec& spec, double a, double b, int m, int n, double lambda) {
  const EjsQuery q{spec, a, b, lambda, m, n, EjsSide::PerturbA};
  q.validate();
  const double e_char = characteristic_e(spec, {a, b}, m, n);
  const double p1a = psi(spec.f1(), a, 1);
  const double p2a = psi(spec.f1(), a, 2);
  const double p2b = psi(spec.f2(), b, 2);
  return std::exp(-0.5 * lambda * lambda * p1a * e_char +
                  lambda * lambda * lambda / 6.0 * (m * p2a + n * p2b));
}

// Certified upper bound on E[Q(t1 > 0)] at a stationary pair.
//
// The second-difference identity behind it, written as a double integral of
// psi_1 over [0,lambda1]^2, gives exactly
//   A <= C1 l^2 - l^3 (m psi2^{f1}(a+2l) + n psi2^{f2}(b-2l)) + (7/12) l^4 (m+n) M3
// with M3 a bound on |psi_3| over the shifted intervals, and the bound is
// exp(A/2).  M3 is certified on a grid with a factor-2 safety margin.
inline double exit_tail_bound_rhs(const ModelSpec& spec, double a, double b, int m, int n,
                                  double lambda1, double c1, double eps0 = 0.25) {
  const BoundaryParams st{a, b};
  st.validate(spec);
  if (!st.stationary(spec)) throw PreconditionViolated("exit bound: needs a+b = a3");
  if (!(lambda1 >= 0.0) || lambda1 > eps0) {
    throw PreconditionViolated("exit bound: lambda1 outside [0, eps0]");
  }
  if (lambda1 == 0.0) return 1.0;
  const WeightFamily f1 = spec.f1(), f2 = spec.f2();
  if (!f1.domain().contains(a + 2.0 * lambda1) || !f2.domain().contains(b - 2.0 * lambda1)) {
    throw OutOfDomain("exit bound: shifted tilts leave the domain");
  }
  const double defect =
      std::fabs(m * psi(f1, a + 2.0 * lambda1, 1) - n * psi(f2, b - 2.0 * lambda1, 1));
  if (defect > c1 * (1.0 + 1e-9)) {
    throw PreconditionViolated("exit bound: characteristic defect exceeds C1");
  }
  const double p2_shifted =
      m * psi(f1, a + 2.0 * lambda1, 2) + n * psi(f2, b - 2.0 * lambda1, 2);
  const double m3 = std::max(psi3_interval_max(f1, a, a + 2.0 * lambda1),
                             psi3_interval_max(f2, b - 2.0 * lambda1, b));
  const double l = lambda1;
  const double log_bound = -0.5 * l * l * l * p2_shifted +
                           (7.0 / 12.0) * m3 * (m + n) * l * l * l * l + 0.5 * c1 * l * l;
  return std::exp(log_bound);
}

struct ExitTailW {
  McEstimate empirical;  // E[ Q(t1 > e + w) ] over environments
  double bound = 1.0;    // certified bound via the stationarity shift
  double lambda1 = 0.0;
  long shift_k = 0;
  double e_char = 0.0;
  bool vacuous = false;  // bound >= 1
};

// Solves psi1^{f2}(b)/psi1^{f1}(a) - psi1^{f2}(b-2x)/psi1^{f1}(a+2x) = w/n.
inline double solve_lambda1(const ModelSpec& spec, double a, double b, int n, double w,
                            double eps0 = 0.25) {
  if (w == 0.0) return 0.0;
  const WeightFamily f1 = spec.f1(), f2 = spec.f2();
  const double r0 = psi(f2, b, 1) / psi(f1, a, 1);
  auto g = [&](double x) {
    return r0 - psi(f2, b - 2.0 * x, 1) / psi(f1, a + 2.0 * x, 1) - w / n;
  };
  // largest admissible x with a 1e-3 domain margin
  double x_max = eps0;
  const Interval d1 = f1.domain(), d2 = f2.domain();
  if (std::isfinite(d1.hi)) x_max = std::min(x_max, 0.5 * (d1.hi - a) - 1e-3);
  if (std::isfinite(d2.lo)) x_max = std::min(x_max, 0.5 * (b - d2.lo) - 1e-3);
  if (!(x_max > 0.0)) throw RootFindFailure("lambda1: no admissible interval");
  if (g(x_max) < 0.0) throw RootFindFailure("lambda1: no root below eps0 (w too large)");
  double lo = 0.0, hi = x_max;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Annealed tail of the exit point past the characteristic direction, paired
// with the bound obtained by shifting the lattice by k = floor(e + w) and
// applying the certified bound at (m - k, n).
inline ExitTailW exit_tail_w(const ModelSpec& spec, double a, double b, int m, int n, double w,
                             std::size_t replicas, std::uint64_t seed, double eps0 = 0.25,
                             double delta = 0.5, int workers = 0) {
  const BoundaryParams st{a, b};
  st.validate(spec);
  if (!st.stationary(spec)) throw PreconditionViolated("exit_tail_w: needs a+b = a3");
  if (!(w >= 0.0)) throw PreconditionViolated("exit_tail_w: w must be nonnegative");
  ExitTailW out;
  out.e_char = characteristic_e(spec, st, m, n);
  const double kn = std::max(m, n);
  if (std::fabs(out.e_char) > delta * kn || w > delta * kn) {
    throw PreconditionViolated("exit_tail_w: outside the moderate window");
  }
  if (out.e_char + w < 0.0) throw PreconditionViolated("exit_tail_w: e + w must be >= 0");

  out.lambda1 = solve_lambda1(spec, a, b, n, w, eps0);
  out.shift_k = static_cast<long>(std::floor(out.e_char + w));
  const int m_shift = m - static_cast<int>(out.shift_k);
  if (m_shift < 1) throw PreconditionViolated("exit_tail_w: shift exhausts the lattice");
  if (out.lambda1 == 0.0) {
    out.bound = 1.0;
  } else {
    const double defect = std::fabs(m_shift * psi(spec.f1(), a + 2.0 * out.lambda1, 1) -
                                    n * psi(spec.f2(), b - 2.0 * out.lambda1, 1));
    out.bound = exit_tail_bound_rhs(spec, a, b, m_shift, n, out.lambda1, defect, eps0);
  }
  out.vacuous = out.bound >= 1.0;

  const double threshold = out.e_char + w;
  const EnvironmentSampler sampler(spec, st);
  std::vector<double> tails(replicas);
  const RngStream root(seed);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t sub = root.child(r).bits_at(0);
        const Environment env = sampler.sample(m, n, sub);
        const PartitionLattice lat = log_partition(env);
        tails[r] = exit_law(env, lat).tail_q1(threshold);
      },
      workers);
  out.empirical = mean_stderr(tails, seed);
  return out;
}

// Annealed MGF of the exit point, E[ E^{a,b}[e^{lambda t1}] ].
inline McEstimate exit_mgf(const ModelSpec& spec, double a, double b, int m, int n, double lambda,
                           std::size_t replicas, std::uint64_t seed, int workers = 0) {
  if (!(lambda >= 0.0)) throw OutOfDomain("exit_mgf: lambda must be nonnegative");
  const BoundaryParams st{a, b};
  st.validate(spec);
  if (!st.stationary(spec)) throw PreconditionViolated("exit_mgf: needs a+b = a3");
  const EnvironmentSampler sampler(spec, st);
  std::vector<double> vals(replicas);
  const RngStream root(seed);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t sub = root.child(r).bits_at(0);
        const Environment env = sampler.sample(m, n, sub);
        const PartitionLattice lat = log_partition(env);
        const ExitLaw law = exit_law(env, lat);
        double s = 0.0;
        for (std::size_t i = 0; i < law.q1.size(); ++i) {
          s += std::exp(lambda * static_cast<double>(i)) * law.q1[i];
        }
        vals[r] = s;
      },
      workers);
  return mean_stderr(vals, seed);
}

}  // namespace kpzlab
