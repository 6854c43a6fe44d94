// Euler-Maruyama integration of the interacting diffusion chain
//   du_1 = -V'(u_1) dt - theta dt + dB_0 + dB_1
//   du_j = (-V'(u_j) + V'(u_{j-1})) dt + dB_j - dB_{j-1},   j >= 2
// with initial data u_j(0) = H_eta(U_j) and the height value
//   W_{N,t}(eta,theta) = sum_j u_j(t) - B_0(t) + theta t.
//
// Noise is counter-based: level-0 increments come straight off per-path
// streams, and level-l increments are bridge refinements of level l-1, so a
// dt/2 rerun traverses the same Brownian path.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/nu_measure.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/potential.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

namespace diffusion_tag {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kRefineBase = 1000;
}  // namespace diffusion_tag

// Brownian increments for paths 0..n_paths-1 over `steps0 << level` steps.
// Refinement keeps the coarse path: halves sum to the parent increment.
inline std::vector<std::vector<double>> brownian_increments(const RngStream& noise_root,
                                                            int n_paths, std::size_t steps0,
                                                            double dt0, int level) {
  std::vector<std::vector<double>> incs(static_cast<std::size_t>(n_paths));
  const double s0 = std::sqrt(dt0);
  for (int j = 0; j < n_paths; ++j) {
    const RngStream path = noise_root.child(static_cast<std::uint64_t>(j));
    std::vector<double> cur(steps0);
    for (std::size_t k = 0; k < steps0; ++k) cur[k] = s0 * path.normal_at(k);
    double dt_parent = dt0;
    for (int l = 1; l <= level; ++l) {
      const RngStream refine = path.child(diffusion_tag::kRefineBase + static_cast<std::uint64_t>(l));
      std::vector<double> next(cur.size() * 2);
      const double s = 0.5 * std::sqrt(dt_parent);
      for (std::size_t k = 0; k < cur.size(); ++k) {
        const double xi = refine.normal_at(k);
        next[2 * k] = 0.5 * cur[k] + s * xi;
        next[2 * k + 1] = cur[k] - next[2 * k];
      }
      cur = std::move(next);
      dt_parent *= 0.5;
    }
    incs[j] = std::move(cur);
  }
  return incs;
}

struct Trajectory {
  int n_coords = 0;
  double eta = 0.0, theta = 0.0;
  double dt = 0.0, t_end = 0.0;
  int level = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  bool stored = false;
  std::vector<double> u;   // (steps+1) x n_coords, row-major, when stored
  std::vector<double> w;   // height value on the time grid
  std::vector<double> b0;  // driving B_0 on the time grid

  double time_at(std::size_t k) const { return dt * static_cast<double>(k); }

  double u_at(int j, double t) const {
    if (!stored) throw InterpolationError("trajectory path was not stored");
    if (t <= 0.0) return u[static_cast<std::size_t>(j)];
    const double pos = t / dt;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= steps) return u[steps * n_coords + j];
    const double frac = pos - static_cast<double>(k);
    const double lo = u[k * n_coords + j];
    const double hi = u[(k + 1) * n_coords + j];
    return lo + frac * (hi - lo);
  }

  double w_final() const { return w.back(); }
};

// One trajectory; retries at a refined step on numeric blowup (rare, stiff
// drift far off equilibrium), keeping the same Brownian path.
inline Trajectory integrate(const Potential& pot, int n, double eta, double theta, double dt,
                            double t_end, std::uint64_t seed, const NuTheta& init_dist,
                            int level = 0, bool store_path = true) {
  if (n < 1) throw DimensionError("integrate: need at least one coordinate");
  if (!(dt > 0.0) || !(t_end > 0.0)) throw PreconditionViolated("integrate: dt, t_end > 0");
  const std::size_t steps0 = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_end / dt)));
  const RngStream root(seed);
  const RngStream init = root.child(diffusion_tag::kInit);
  const RngStream noise = root.child(diffusion_tag::kNoise);

  std::vector<double> u0(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) u0[j] = init_dist.quantile(init.unit_at(static_cast<std::uint64_t>(j)));

  for (int attempt = level; attempt <= level + 3; ++attempt) {
    const std::size_t steps = steps0 << attempt;
    const double dt_eff = t_end / static_cast<double>(steps);
    const auto incs = brownian_increments(noise, n + 1, steps0, t_end / steps0, attempt);

    Trajectory traj;
    traj.n_coords = n;
    traj.eta = eta;
    traj.theta = theta;
    traj.dt = dt_eff;
    traj.t_end = t_end;
    traj.level = attempt;
    traj.seed = seed;
    traj.steps = steps;
    traj.stored = store_path;
    traj.w.resize(steps + 1);
    traj.b0.resize(steps + 1);
    if (store_path) traj.u.resize((steps + 1) * static_cast<std::size_t>(n));

    std::vector<double> cur = u0, drift(static_cast<std::size_t>(n));
    double b0_acc = 0.0, sum0 = 0.0;
    for (int j = 0; j < n; ++j) sum0 += cur[j];
    traj.w[0] = sum0;
    traj.b0[0] = 0.0;
    if (store_path) {
      for (int j = 0; j < n; ++j) traj.u[j] = cur[j];
    }

    bool blew_up = false;
    for (std::size_t k = 0; k < steps && !blew_up; ++k) {
      for (int j = 0; j < n; ++j) drift[j] = -pot.dv(cur[j]);
      const double prev0 = drift[0];
      cur[0] += (drift[0] - theta) * dt_eff + incs[0][k] + incs[1][k];
      double carry = prev0;
      for (int j = 1; j < n; ++j) {
        const double mine = drift[j];
        cur[j] += (mine - carry) * dt_eff + incs[j + 1][k] - incs[j][k];
        carry = mine;
      }
      b0_acc += incs[0][k];
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (!std::isfinite(cur[j]) || std::fabs(cur[j]) > 1e8) blew_up = true;
        sum += cur[j];
      }
      const double t = dt_eff * static_cast<double>(k + 1);
      traj.b0[k + 1] = b0_acc;
      traj.w[k + 1] = sum - b0_acc + theta * t;
      if (store_path) {
        for (int j = 0; j < n; ++j) traj.u[(k + 1) * static_cast<std::size_t>(n) + j] = cur[j];
      }
    }
    if (!blew_up) return traj;
  }
  throw NumericalBlowup("integrate: trajectory blew up even after step refinement");
}

// phi(theta) = N psi_{-1}^V(theta) - theta^2 t / 2.
inline double phi(const NuTheta& nu, int n, double t) {
  return n * nu.log_z() - 0.5 * nu.theta() * nu.theta() * t;
}

inline double phi(const Potential& pot, double theta, int n, double t) {
  return phi(NuTheta(pot, theta), n, t);
}

// e(theta, t) = t - N psi_1^V(theta).
inline double characteristic_e_diffusion(const Potential& pot, double theta, int n, double t) {
  return t - n * psi_v(pot, theta, 1);
}

struct DiffusionEjsResult {
  McEstimate lhs;       // E[e^{(eta-theta) W}] at the requested step
  McEstimate lhs_half;  // same replicas, one refinement level down
  double rhs = 0.0;     // exp(phi(theta) - phi(eta))
};

// Generating-function identity for the two-parameter system, with the
// halved-step rerun that audits the integrator bias.
inline DiffusionEjsResult ejs_diffusion_check(const Potential& pot, int n, double eta,
                                              double theta, double t, double dt,
                                              std::size_t replicas, std::uint64_t seed,
                                              int workers = 0) {
  if (!(eta > 0.0) || !(theta > 0.0)) throw OutOfDomain("ejs diffusion: eta, theta > 0");
  const NuTheta nu_eta(pot, eta);
  const NuTheta nu_theta(pot, theta);
  DiffusionEjsResult out;
  out.rhs = std::exp(phi(nu_theta, n, t) - phi(nu_eta, n, t));
  std::vector<double> e0(replicas), e1(replicas);
  const RngStream root(seed);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t sub = root.child(r).bits_at(0);
        const Trajectory t0 = integrate(pot, n, eta, theta, dt, t, sub, nu_eta, 0, false);
        const Trajectory t1 = integrate(pot, n, eta, theta, dt, t, sub, nu_eta, 1, false);
        e0[r] = (eta - theta) * t0.w_final();
        e1[r] = (eta - theta) * t1.w_final();
      },
      workers);
  out.lhs = exp_mean_stderr(e0, seed);
  out.lhs_half = exp_mean_stderr(e1, seed);
  return out;
}

struct DiffusionDerivs {
  double d_eta = 0.0;      // <= 0
  double d_theta = 0.0;    // >= 0
  double d2_theta = 0.0;   // >= 0
  double d_eta_theta = 0.0;  // >= 0 (mixed)
};

// Coupled finite differences of W in (eta, theta) with shared noise and
// shared initial uniforms; caches the perturbed initial-measure tables.
class DerivProbe {
 public:
  DerivProbe(const Potential& pot, double eta, double theta, double delta)
      : pot_(pot), eta_(eta), theta_(theta), delta_(delta),
        nu_m_(pot, eta - delta), nu_0_(pot, eta), nu_p_(pot, eta + delta) {}

  DiffusionDerivs evaluate(int n, double dt, double t_end, std::uint64_t seed) const {
    auto w_of = [&](const NuTheta& init, double th) {
      return integrate(pot_, n, init.theta(), th, dt, t_end, seed, init, 0, false).w_final();
    };
    const double w00 = w_of(nu_0_, theta_);
    const double w0p = w_of(nu_0_, theta_ + delta_);
    const double w0m = w_of(nu_0_, theta_ - delta_);
    const double wp0 = w_of(nu_p_, theta_);
    const double wm0 = w_of(nu_m_, theta_);
    const double wpp = w_of(nu_p_, theta_ + delta_);
    DiffusionDerivs d;
    d.d_theta = (w0p - w0m) / (2.0 * delta_);
    d.d_eta = (wp0 - wm0) / (2.0 * delta_);
    d.d2_theta = (w0p - 2.0 * w00 + w0m) / (delta_ * delta_);
    d.d_eta_theta = (wpp - wp0 - w0p + w00) / (delta_ * delta_);
    return d;
  }

 private:
  Potential pot_;
  double eta_, theta_, delta_;
  NuTheta nu_m_, nu_0_, nu_p_;
};

}  // namespace kpzlab
