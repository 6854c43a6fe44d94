// Foundations: special functions, quadrature, RNG streams, statistics.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "kpzlab/parallel.hpp"
#include "kpzlab/quadrature.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/special.hpp"
#include "kpzlab/stats.hpp"

#include "support/oracles.hpp"

using namespace kpzlab;

TEST_CASE("incomplete gamma against elementary identities") {
  // P(1,x) = 1 - e^{-x}
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    CHECK(gamma_p(1.0, x) == Catch::Approx(-std::expm1(-x)).epsilon(1e-13));
  }
  // P(a,.) + Q(a,.) = 1
  for (double a : {0.3, 1.7, 4.2}) {
    for (double x : {0.2, 1.0, 5.0, 20.0}) {
      CHECK(gamma_p(a, x) + gamma_q(a, x) == Catch::Approx(1.0).epsilon(1e-13));
    }
  }
  // round trips
  for (double a : {0.4, 1.0, 2.5, 6.0}) {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-9}) {
      const double x = gamma_p_inverse(a, p);
      CHECK(gamma_p(a, x) == Catch::Approx(p).margin(1e-12));
    }
    for (double q : {1e-10, 1e-4, 0.2, 0.49}) {
      const double x = gamma_q_inverse(a, q);
      CHECK(gamma_q(a, x) == Catch::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("incomplete beta against elementary identities") {
  for (double x : {0.05, 0.3, 0.77}) {
    CHECK(beta_inc(1.0, 1.0, x) == Catch::Approx(x).epsilon(1e-13));
    // I_x(2,1) = x^2
    CHECK(beta_inc(2.0, 1.0, x) == Catch::Approx(x * x).epsilon(1e-12));
    // symmetry
    CHECK(beta_inc(1.3, 2.6, x) == Catch::Approx(1.0 - beta_inc(2.6, 1.3, 1.0 - x)).margin(1e-13));
  }
  for (double a : {0.6, 1.0, 3.5}) {
    for (double b : {0.8, 2.0}) {
      for (double p : {1e-5, 0.2, 0.5, 0.87, 1.0 - 1e-6}) {
        const double x = beta_inc_inverse(a, b, p);
        CHECK(beta_inc(a, b, x) == Catch::Approx(p).margin(5e-13));
      }
    }
  }
}

TEST_CASE("normal quantile inverts the normal cdf") {
  for (double p : {1e-9, 1e-4, 0.025, 0.5, 0.975, 1.0 - 1e-6}) {
    CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-11));
  }
}

TEST_CASE("kolmogorov distribution values") {
  CHECK(kolmogorov_q(0.5) == Catch::Approx(0.9639452436648751).epsilon(1e-10));
  CHECK(kolmogorov_q(1.0) == Catch::Approx(0.26999967167735456).epsilon(1e-10));
  CHECK(kolmogorov_q(2.0) == Catch::Approx(0.0006709252557796953).epsilon(1e-9));
}

TEST_CASE("adaptive quadrature basics") {
  auto q1 = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(q1.value == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto q2 = integrate([&](double x) { return inv_sqrt2pi * std::exp(-0.5 * x * x); }, -9.0, 9.0);
  CHECK(q2.value == Catch::Approx(1.0).epsilon(1e-12));
  // integrable endpoint singularity
  auto q3 = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10);
  CHECK(q3.value == Catch::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("log-window integrator normalizes a gaussian") {
  auto logh = [](double y) { return -0.5 * y * y; };
  const auto win = find_log_window(logh, -std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity());
  const double v = integrate_log_scaled(logh, [](double) { return 1.0; }, win);
  CHECK(std::exp(win.ref) * v == Catch::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
  const double m2 = integrate_log_scaled(logh, [](double y) { return y * y; }, win) / v;
  CHECK(m2 == Catch::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("polygamma oracle sanity") {
  CHECK(oracle::polygamma(0, 1.0) == Catch::Approx(-0.5772156649015328606).epsilon(1e-12));
  CHECK(oracle::polygamma(1, 1.0) == Catch::Approx(1.6449340668482264365).epsilon(1e-12));
  CHECK(oracle::polygamma(2, 1.0) == Catch::Approx(-2.4041138063191885708).epsilon(1e-12));
  CHECK(oracle::polygamma(3, 1.0) == Catch::Approx(6.4939394022668291491).epsilon(1e-12));
  // recurrence consistency at a non-integer point
  const double x = 2.37;
  CHECK(oracle::polygamma(1, x) ==
        Catch::Approx(oracle::polygamma(1, x + 1.0) + 1.0 / (x * x)).epsilon(1e-12));
}

TEST_CASE("rng streams are deterministic and counter-addressable") {
  RngStream s(42);
  RngStream t(42);
  CHECK(s.bits_at(0) == t.bits_at(0));
  CHECK(s.bits_at(123456789) == t.bits_at(123456789));
  CHECK(s.child(7).bits_at(3) == t.child(7).bits_at(3));
  CHECK(s.child(7).bits_at(3) != s.child(8).bits_at(3));
  // sequential == random access
  RngStream seq = s.child(2);
  const double u0 = seq.next_unit();
  const double u1 = seq.next_unit();
  CHECK(u0 == s.child(2).unit_at(0));
  CHECK(u1 == s.child(2).unit_at(1));
  for (int k = 0; k < 1000; ++k) {
    const double u = s.unit_at(static_cast<std::uint64_t>(k));
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gamma sampler has the right first moments") {
  RngStream rng = RngStream(99).child(1);
  for (double shape : {0.6, 1.0, 2.5}) {
    const std::size_t n = 200000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = sample_gamma(rng, shape);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    // 5 sigma tolerance on the MC mean/variance
    CHECK(std::fabs(mean - shape) < 5.0 * std::sqrt(shape / n));
    CHECK(std::fabs(var - shape) < 5.0 * std::sqrt(6.0 * shape * shape / n + 1.0 / n));
  }
}

TEST_CASE("statistics helpers") {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(pairwise_sum(xs) == Catch::Approx(10.0));
  const auto est = mean_stderr(xs);
  CHECK(est.mean == Catch::Approx(2.5));
  CHECK(est.stderr_ == Catch::Approx(std::sqrt(5.0 / 3.0 / 4.0)));

  // guarded exponential mean matches the naive one on mild data
  std::vector<double> ts{-0.5, 0.1, 0.7, 0.2};
  const auto ge = exp_mean_stderr(ts);
  std::vector<double> es(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) es[i] = std::exp(ts[i]);
  const auto ne = mean_stderr(es);
  CHECK(ge.mean == Catch::Approx(ne.mean).epsilon(1e-13));
  CHECK(ge.stderr_ == Catch::Approx(ne.stderr_).epsilon(1e-12));

  // and survives exponents that would overflow naively
  std::vector<double> big{600.0, 601.0, 599.5, 600.2};
  const auto gb = exp_mean_stderr(big);
  CHECK(std::isfinite(std::log(gb.mean)));
  CHECK(std::log(gb.mean) == Catch::Approx(600.3268213964154).epsilon(1e-10));

  // linear fit recovers an exact line
  std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> y{3.0, 5.0, 7.0, 9.0, 11.0};
  const auto fit = linear_fit(x, y);
  CHECK(fit.slope == Catch::Approx(2.0).margin(1e-12));
  CHECK(fit.intercept == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("ks test accepts its own distribution and rejects a shifted one") {
  RngStream rng = RngStream(7).child(3);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = rng.next_normal();
  const auto ok = ks_test(xs, [](double t) { return normal_cdf(t); });
  CHECK(ok.p_value > 1e-3);
  const auto bad = ks_test(xs, [](double t) { return normal_cdf(t - 0.15); });
  CHECK(bad.p_value < 1e-6);

  std::vector<double> ys(20000);
  for (auto& y : ys) y = rng.next_normal();
  CHECK(ks_test_two_sample(xs, ys).p_value > 1e-3);
  for (auto& y : ys) y += 0.12;
  CHECK(ks_test_two_sample(xs, ys).p_value < 1e-6);
}

TEST_CASE("parallel_for is deterministic in the number of workers") {
  const std::size_t n = 10000;
  std::vector<double> a(n), b(n);
  parallel_for(n, [&](std::size_t i) { a[i] = RngStream(5).child(i).unit_at(0); }, 1);
  parallel_for(n, [&](std::size_t i) { b[i] = RngStream(5).child(i).unit_at(0); }, 4);
  CHECK(a == b);
}
