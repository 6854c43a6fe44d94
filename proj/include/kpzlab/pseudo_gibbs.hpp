// The sub-probability measure on ordered jump times 0 < s_0 < ... < s_{N-1} < t
// built from V'' along a stored trajectory,
//   weight(s) = prod_j V''(u_{j+1}(s_j)) exp(-sum_j int_{s_j}^{s_{j+1}} V''(u_{j+1})),
// with s_N = t.  Expectations are evaluated by randomized quasi-Monte Carlo
// over the simplex (sorted Halton points, Cranley-Patterson shifts per batch).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "kpzlab/diffusion.hpp"
#include "kpzlab/errors.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

namespace detail {

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline constexpr unsigned kHaltonBases[4] = {2, 3, 5, 7};

}  // namespace detail

// V'' must come from the same potential that produced the trajectory.
class PseudoGibbs {
 public:
  PseudoGibbs(const Trajectory& traj, const Potential& pot) : traj_(&traj), pot_(&pot) {
    if (traj.n_coords > 4) throw DimensionTooLarge("pseudo-gibbs: N_max is 4");
    if (!traj.stored || traj.u.empty()) {
      throw InterpolationError("pseudo-gibbs: trajectory path required");
    }
    const int n = traj.n_coords;
    const std::size_t steps = traj.steps;
    cum_.assign(static_cast<std::size_t>(n), std::vector<double>(steps + 1, 0.0));
    for (int j = 0; j < n; ++j) {
      double prev = pot.d2v(traj.u[static_cast<std::size_t>(j)]);
      for (std::size_t k = 1; k <= steps; ++k) {
        const double cur = pot.d2v(traj.u[k * static_cast<std::size_t>(n) + j]);
        cum_[j][k] = cum_[j][k - 1] + 0.5 * traj.dt * (prev + cur);
        prev = cur;
      }
    }
  }

  // Integral of F(s_0) against the pseudo-Gibbs weight over the simplex.
  McEstimate expectation(const std::function<double(double)>& f_of_s0, std::size_t points,
                         std::uint64_t seed, int batches = 32) const {
    const int n = traj_->n_coords;
    const double t = traj_->t_end;
    double simplex_volume = 1.0;
    for (int j = 2; j <= n; ++j) simplex_volume /= j;
    for (int j = 0; j < n; ++j) simplex_volume *= t;

    const std::size_t per_batch = std::max<std::size_t>(1, points / batches);
    std::vector<double> batch_means(static_cast<std::size_t>(batches));
    const RngStream root = RngStream(seed).child(91);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int b = 0; b < batches; ++b) {
      const RngStream shift_stream = root.child(static_cast<std::uint64_t>(b));
      double shift[4];
      for (int d = 0; d < n; ++d) shift[d] = shift_stream.unit_at(static_cast<std::uint64_t>(d));
      double acc = 0.0;
      for (std::size_t i = 0; i < per_batch; ++i) {
        for (int d = 0; d < n; ++d) {
          double v = detail::radical_inverse(i + 1, detail::kHaltonBases[d]) + shift[d];
          v -= std::floor(v);
          s[d] = v * t;
        }
        std::sort(s.begin(), s.end());
        acc += f_of_s0(s[0]) * weight(s);
      }
      batch_means[b] = simplex_volume * acc / static_cast<double>(per_batch);
    }
    return mean_stderr(batch_means, seed);
  }

  McEstimate total_mass(std::size_t points, std::uint64_t seed, int batches = 32) const {
    return expectation([](double) { return 1.0; }, points, seed, batches);
  }

 private:
  double cum_at(int j, double t) const {
    const double pos = t / traj_->dt;
    std::size_t k = static_cast<std::size_t>(std::max(0.0, pos));
    if (k >= traj_->steps) return cum_[j].back();
    const double frac = pos - static_cast<double>(k);
    return cum_[j][k] + frac * (cum_[j][k + 1] - cum_[j][k]);
  }

  double weight(const std::vector<double>& s) const {
    const int n = traj_->n_coords;
    double log_w = 0.0;
    double prod = 1.0;
    for (int j = 0; j < n; ++j) {
      const double s_next = (j + 1 < n) ? s[j + 1] : traj_->t_end;
      prod *= pot_->d2v(traj_->u_at(j, s[j]));
      log_w -= cum_at(j, s_next) - cum_at(j, s[j]);
    }
    return prod * std::exp(log_w);
  }

  const Trajectory* traj_;
  const Potential* pot_;
  std::vector<std::vector<double>> cum_;
};

// Operation-level wrapper.
inline McEstimate pseudo_gibbs(const Trajectory& traj, const Potential& pot,
                               const std::function<double(double)>& f_of_s0, std::size_t points,
                               std::uint64_t seed, int batches = 32) {
  return PseudoGibbs(traj, pot).expectation(f_of_s0, points, seed, batches);
}

}  // namespace kpzlab
