// Counter-based splittable RNG for reproducible parallel Monte Carlo.
//
// Every draw is a pure function of (seed, stream path, counter), so replica r
// of experiment e always sees the same randomness no matter how many workers
// run or in which order.  The mixer is SplitMix64 (Steele-Lea-Flood), used in
// its stateless counter form; streams are derived by re-mixing a tag into the
// base state.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace kpzlab {

namespace detail {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// A stream of iid draws addressed by a 64-bit counter.  Value type, cheap to
// copy; child(tag) derives a statistically independent sub-stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : base_(detail::mix64(seed + detail::kGamma)) {}

  RngStream child(std::uint64_t tag) const {
    RngStream s(*this);
    s.base_ = detail::mix64(base_ ^ detail::mix64((tag + 1) * detail::kGamma));
    s.counter_ = 0;
    return s;
  }

  // Random access.
  std::uint64_t bits_at(std::uint64_t k) const {
    return detail::mix64(base_ + (k + 1) * detail::kGamma);
  }

  // Uniform on the open interval (0,1).
  double unit_at(std::uint64_t k) const {
    return static_cast<double>(bits_at(k) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via Box-Muller; draw k consumes counters 2k, 2k+1.
  double normal_at(std::uint64_t k) const {
    const double u1 = unit_at(2 * k);
    const double u2 = unit_at(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Sequential interface (advances an internal counter).
  std::uint64_t next_bits() { return bits_at(counter_++); }
  double next_unit() { return unit_at(counter_++); }
  double next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

// Gamma(shape, 1) sampler, Marsaglia-Tsang squeeze method.  Uses a variable
// number of draws from the stream (rejection), which is fine because each
// consumer owns its stream.
inline double sample_gamma(RngStream& rng, double shape) {
  if (shape < 1.0) {
    // Boost: X_a = X_{a+1} * U^{1/a}.
    const double u = rng.next_unit();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double sample_beta(RngStream& rng, double a, double b) {
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  return x / (x + y);
}

}  // namespace kpzlab
