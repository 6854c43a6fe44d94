// Chernoff machinery on exactly known profiles, the lower-tail split on a
// matched synthetic law, and the MGF profiles of the polymer free energy.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kpzlab/rng.hpp"
#include "kpzlab/tails.hpp"

using namespace kpzlab;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

}  // namespace

TEST_CASE("chernoff bound on the standard normal profile") {
  const MgfProfile normal =
      analytic_profile(linspace(1e-3, 4.0, 4000), [](double l) { return std::exp(0.5 * l * l); },
                       1.0);
  // optimum lambda* = u, value e^{-u^2/2}
  CHECK(chernoff_upper(normal, 2.0) == Catch::Approx(0.13533528323661270).margin(1e-6));
  for (double u : {0.5, 1.0, 3.0}) {
    CHECK(chernoff_upper(normal, u) == Catch::Approx(std::exp(-0.5 * u * u)).margin(1e-6));
  }
  // u = 0: every grid value is at least 1, bound vacuous
  CHECK(chernoff_upper(normal, 0.0) >= 1.0);
  // monotone nonincreasing in u
  double prev = chernoff_upper(normal, 0.0);
  for (double u : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double b = chernoff_upper(normal, u);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
  // refinement can only decrease the bound
  const MgfProfile coarse =
      analytic_profile(linspace(0.25, 4.0, 16), [](double l) { return std::exp(0.5 * l * l); },
                       1.0);
  for (double u : {0.7, 1.3, 2.4}) {
    CHECK(chernoff_upper(normal, u) <= chernoff_upper(coarse, u) + 1e-15);
  }
  CHECK_THROWS_AS(chernoff_upper(MgfProfile{}, 1.0), EmptyProfile);
}

TEST_CASE("chernoff bound on a cubic profile has tail exponent 3/2") {
  const double n_scale = 50.0;
  const MgfProfile cubic = analytic_profile(
      linspace(5e-4, 2.0, 4000), [&](double l) { return std::exp(n_scale * l * l * l); },
      n_scale);
  // at u = s N^{1/3}, the Legendre transform gives exp(-(2/sqrt27) s^{3/2})
  std::vector<double> s_grid = linspace(0.5, 6.0, 10), bounds;
  const double n13 = std::pow(n_scale, 1.0 / 3.0);
  for (double s : s_grid) {
    const double b = chernoff_upper(cubic, s * n13);
    bounds.push_back(b);
    CHECK(b == Catch::Approx(std::exp(-2.0 / std::sqrt(27.0) * std::pow(s, 1.5))).epsilon(0.01));
  }
  const LinearFit fit = tail_exponent_fit(s_grid, bounds, 1e-8, 0.9);
  CHECK(fit.slope == Catch::Approx(1.5).margin(0.1));

  // the coarse default grid still recovers the exponent through the fit
  const MgfProfile coarse = analytic_profile(
      geometric_lambdas(0.004, 2.0), [&](double l) { return std::exp(n_scale * l * l * l); },
      n_scale);
  std::vector<double> coarse_bounds;
  for (double s : s_grid) coarse_bounds.push_back(chernoff_upper(coarse, s * n13));
  CHECK(tail_exponent_fit(s_grid, coarse_bounds, 1e-8, 0.9).slope ==
        Catch::Approx(1.5).margin(0.12));
}

TEST_CASE("lower tail split on the cubic profile and its matched law") {
  const double n_scale = 50.0;
  const MgfProfile cubic = analytic_profile(
      geometric_lambdas(0.002, 4.0), [&](double l) { return std::exp(n_scale * l * l * l); },
      n_scale);

  // a huge threshold makes the window vacuous
  CHECK(lower_tail_from_mgf(cubic, 500.0, 2000.0, 0.5, 1.0) <= 0.0);

  // matched variable: P[X > u] = exp(-(2/sqrt27) u^{3/2} / sqrt(N)) has
  // log-MGF ~ N a^3 by the Laplace method
  const double kappa = 2.0 / std::sqrt(27.0);
  RngStream rng = RngStream(2718).child(1);
  const std::size_t reps = 400000;
  std::vector<double> xs(reps);
  for (auto& x : xs) {
    x = std::pow(-std::log(rng.next_unit()) * std::sqrt(n_scale) / kappa, 2.0 / 3.0);
  }

  // scan the moderate window: the split should go positive somewhere and
  // never exceed the true (empirical) tail.  The split constants are
  // configuration; the cross term only dies when C''^{3/2} > 4 sqrt(27) C'^3,
  // so the defaults here are (C', C'') = (1.3, 16).
  const double cp = 1.3, cpp = 16.0;
  std::vector<double> u0s = linspace(2.0, 14.0, 13), bounds;
  double best = -1.0;
  for (double u0 : u0s) {
    const double a = cp * std::sqrt(u0 / n_scale);
    const double u1 = cpp * u0;
    const double bound = lower_tail_from_mgf(cubic, u0, u1, a, 1.0);
    bounds.push_back(bound);
    best = std::max(best, bound);
    if (bound <= 0.0) continue;
    std::size_t count = 0;
    for (double x : xs) {
      if (x > u0) ++count;
    }
    const double emp = static_cast<double>(count) / reps;
    const double se = std::sqrt(emp * (1.0 - emp) / reps);
    INFO("u0=" << u0 << " bound=" << bound << " empirical=" << emp);
    CHECK(bound <= emp + 4.0 * se);
  }
  CHECK(best > 0.0);

  // positive-window scaling: -log(bound) grows like u0^{3/2}; fit away from
  // the window edge where the bracket correction distorts the rate
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < u0s.size(); ++i) {
    if (bounds[i] > 0.0 && bounds[i] < 1e-2) {
      lx.push_back(std::log(u0s[i]));
      ly.push_back(std::log(-std::log(bounds[i])));
    }
  }
  REQUIRE(lx.size() >= 4);
  const LinearFit fit = linear_fit(lx, ly);
  CHECK(fit.slope == Catch::Approx(1.5).margin(0.15));

  CHECK_THROWS_AS(lower_tail_from_mgf(cubic, 3.0, 12.0, 3.0, 1.0), GridTooCoarse);
}

TEST_CASE("stationary mgf profile of the free energy") {
  const ModelSpec spec = ModelSpec::make(PolymerModel::InvGamma, 1.0, 2.0, 1.0);
  const BoundaryParams p = stationary_params(spec);
  const int m = 12, n = 12;
  const double n_scale = m / psi(spec.f1(), p.a, 1);
  const std::vector<double> lambdas{0.0, 0.05, 0.1, 0.2, 0.4};
  const MgfPair pair =
      mgf_profile_mc(spec, p.a, p.b, m, n, lambdas, 20000, 515, MgfMode::Stationary, n_scale, 1.0);

  CHECK(pair.plus.estimates[0].mean == 1.0);
  CHECK(pair.plus.estimates[0].stderr_ == 0.0);
  CHECK(pair.log_z.size() == 20000);

  // positive, increasing, convex within MC error
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    const auto& cur = pair.plus.estimates[k];
    const auto& prev = pair.plus.estimates[k - 1];
    CHECK(cur.mean > 0.0);
    CHECK(cur.mean >= prev.mean - 4.0 * (cur.stderr_ + prev.stderr_));
  }
  // convexity on the even subgrid {0, 0.1, 0.2}: f(0.1) <= (f(0)+f(0.2))/2
  CHECK(pair.plus.estimates[2].mean <=
        0.5 * (pair.plus.estimates[0].mean + pair.plus.estimates[3].mean) +
            4.0 * (pair.plus.estimates[2].stderr_ + pair.plus.estimates[3].stderr_));

  // determinism across worker counts
  const MgfPair again =
      mgf_profile_mc(spec, p.a, p.b, m, n, lambdas, 20000, 515, MgfMode::Stationary, n_scale, 1.0,
                     1);
  CHECK(again.plus.estimates[3].mean == pair.plus.estimates[3].mean);

  CHECK_THROWS_AS(mgf_profile_mc(spec, p.a, p.b, 200, 12, lambdas, 100, 1, MgfMode::Stationary,
                                 n_scale, 1.0),
                  PreconditionViolated);
}

TEST_CASE("tilted mgf profile shows the cubic coefficient") {
  const ModelSpec spec = ModelSpec::make(PolymerModel::InvGamma, 1.0, 2.0, 1.0);
  const BoundaryParams p = stationary_params(spec);
  const int m = 12, n = 12;  // symmetric point: e = 0 exactly
  const double n_scale = m / psi(spec.f1(), p.a, 1);
  const std::vector<double> lambdas{0.05, 0.1, 0.15, 0.2};
  const MgfPair pair =
      mgf_profile_mc(spec, p.a, p.b, m, n, lambdas, 30000, 616, MgfMode::Tilted, n_scale, 1.0);

  const double p2sum = m * psi(spec.f1(), p.a, 2) + n * psi(spec.f2(), p.b, 2);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas[k];
    const double cubic = l * l * l / 6.0 * p2sum;
    const double se_log = pair.plus.estimates[k].stderr_ / pair.plus.estimates[k].mean;
    INFO("lambda=" << l << " log mgf=" << std::log(pair.plus.estimates[k].mean)
                   << " cubic=" << cubic);
    CHECK(std::log(pair.plus.estimates[k].mean) ==
          Catch::Approx(cubic).margin(4.0 * se_log + 0.02));
    CHECK(std::log(pair.minus.estimates[k].mean) ==
          Catch::Approx(-cubic).margin(4.0 * pair.minus.estimates[k].stderr_ /
                                           pair.minus.estimates[k].mean +
                                       0.02));
  }

  const LinearFit fit_plus = mgf_cubic_fit(pair.plus, 0.05, 0.2);
  const LinearFit fit_minus = mgf_cubic_fit(pair.minus, 0.05, 0.2);
  INFO("slopes " << fit_plus.slope << " " << fit_minus.slope);
  CHECK(fit_plus.slope > 2.5);
  CHECK(fit_plus.slope < 3.5);
  CHECK(fit_minus.slope > 2.5);
  CHECK(fit_minus.slope < 3.5);
}

TEST_CASE("tail curve pairs empirical tails with valid chernoff bounds") {
  const ModelSpec spec = ModelSpec::make(PolymerModel::InvGamma, 1.0, 2.0, 1.0);
  const BoundaryParams p = stationary_params(spec);
  const int m = 12, n = 12;
  const double n_scale = m / psi(spec.f1(), p.a, 1);
  const TailCurve curve = tail_curve_mc(spec, p.a, p.b, m, n, linspace(0.0, 3.0, 8),
                                        {0.05, 0.1, 0.2, 0.4, 0.8}, 20000, 717, n_scale, 1.0);
  // s = 0: mean-median proximity, loose
  CHECK(curve.tail_emp[0] == Catch::Approx(0.5).margin(0.15));
  for (std::size_t k = 0; k < curve.s.size(); ++k) {
    CHECK(curve.tail_emp[k] <= curve.chernoff[k] + 4.0 * curve.tail_se[k] + 1e-12);
  }
}
