// Environments, the log-domain dynamic program, exit-point laws and the
// coupled derivatives, all pinned against exhaustive path enumeration on
// small lattices.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kpzlab/lattice.hpp"
#include "kpzlab/stats.hpp"

#include "support/oracles.hpp"

using namespace kpzlab;

namespace {

const std::vector<PolymerModel> kModels{PolymerModel::InvGamma, PolymerModel::Gamma,
                                        PolymerModel::Beta, PolymerModel::InvBeta};

ModelSpec default_spec(PolymerModel m) { return ModelSpec::make(m, 1.0, 2.0, 1.0); }

}  // namespace

TEST_CASE("model wiring satisfies the stationary parameter identities") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    CHECK(spec.a1() + spec.a2() == Catch::Approx(spec.a3()).margin(1e-14));
    CHECK(spec.f1().domain().contains(spec.a1()));
    CHECK(spec.f2().domain().contains(spec.a2()));
    CHECK(spec.f1().domain().contains(spec.a3()));
    CHECK(stationary_params(spec).stationary(spec));
  }
  CHECK_THROWS_AS(ModelSpec::make(PolymerModel::InvGamma, 2.5, 2.0, 1.0), OutOfDomain);
  CHECK_THROWS_AS(ModelSpec::make(PolymerModel::InvBeta, 2.0, 2.0, 1.0), OutOfDomain);
  CHECK_NOTHROW(ModelSpec::make(PolymerModel::Gamma, 7.0, 2.0, 1.0));
}

TEST_CASE("empty environment has the trivial partition table") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const Environment env = build_environment(spec, stationary_params(spec), 0, 0, 7);
  CHECK(env.log_r1.empty());
  CHECK(env.log_r2.empty());
  const PartitionLattice lat = log_partition(env);
  CHECK(lat.corner() == 0.0);
}

TEST_CASE("environment regeneration is bit-identical and coupled in a") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const BoundaryParams p = stationary_params(spec);
  const Environment e1 = build_environment(spec, p, 5, 4, 1234);
  const Environment e2 = build_environment(spec, p, 5, 4, 1234);
  CHECK(e1.log_r1 == e2.log_r1);
  CHECK(e1.log_r2 == e2.log_r2);
  CHECK(e1.log_y1 == e2.log_y1);
  CHECK(e1.u1 == e2.u1);

  // same uniforms, larger tilt: every horizontal boundary weight increases
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Environment lo = build_environment(spec, p, 6, 3, seed);
    const Environment hi = build_environment(spec, {p.a + 0.1, p.b}, 6, 3, seed);
    CHECK(lo.u1 == hi.u1);
    for (int i = 0; i < 6; ++i) CHECK(hi.log_r1[i] > lo.log_r1[i]);
    CHECK(lo.log_y1 == hi.log_y1);  // bulk not coupled to boundary tilts
  }
}

TEST_CASE("inverse-gamma bulk weights have the right law and are degenerate pairs") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const BulkWeights bulk = sample_bulk(spec, 60, 60, 99);
  CHECK(bulk.log_y1 == bulk.log_y2);
  std::vector<double> xs(bulk.log_y1.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::exp(bulk.log_y1[i]);
  const MellinDistribution d(spec.f1(), spec.a3());
  const auto ks = ks_test(xs, [&](double t) { return d.cdf(t); });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("boundary partition values are prefix sums") {
  const ModelSpec spec = default_spec(PolymerModel::Gamma);
  const Environment env = build_environment(spec, stationary_params(spec), 2, 0, 5);
  const PartitionLattice lat = log_partition(env);
  CHECK(lat.z(2, 0) == Catch::Approx(env.log_r1[0] + env.log_r1[1]).margin(1e-14));
}

TEST_CASE("dynamic program matches exhaustive enumeration") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    const EnvironmentSampler sampler(spec, stationary_params(spec));
    for (int m = 0; m <= 6; ++m) {
      for (int n = 0; n <= 6; ++n) {
        if (m + n > 8 || m + n == 0) continue;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
          const Environment env = sampler.sample(m, n, 1000 + seed);
          const PartitionLattice lat = log_partition(env);
          const auto truth = oracle::enumerate_paths(env);
          INFO(model_name(model) << " m=" << m << " n=" << n << " seed=" << seed);
          REQUIRE(lat.corner() == Catch::Approx(truth.log_z).epsilon(1e-9));
          REQUIRE(log_partition_value(env) == Catch::Approx(truth.log_z).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("exit law matches enumeration and sums to one") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    const EnvironmentSampler sampler(spec, stationary_params(spec));
    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {3, 3}, {4, 2}}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Environment env = sampler.sample(m, n, 4000 + seed);
        const PartitionLattice lat = log_partition(env);
        const ExitLaw law = exit_law(env, lat);
        const auto truth = oracle::enumerate_paths(env);
        double total = 0.0;
        for (int i = 1; i <= m; ++i) {
          REQUIRE(law.q1[i] == Catch::Approx(truth.q1[i]).margin(1e-10));
          total += law.q1[i];
        }
        for (int j = 1; j <= n; ++j) {
          REQUIRE(law.q2[j] == Catch::Approx(truth.q2[j]).margin(1e-10));
          total += law.q2[j];
        }
        REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
        // exactly one of t1 >= 1, t2 >= 1 per path
        CHECK(law.q1[0] == Catch::Approx(truth.q1[0]).margin(1e-10));
      }
    }
  }
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const Environment env = build_environment(spec, stationary_params(spec), 0, 3, 1);
  CHECK_THROWS_AS(exit_law(env, log_partition(env)), DimensionError);
}

TEST_CASE("gibbs exit expectations") {
  const ModelSpec spec = default_spec(PolymerModel::Beta);
  const Environment env = build_environment(spec, stationary_params(spec), 1, 1, 3);
  const ExitLaw law = exit_law(env, log_partition(env));
  CHECK(gibbs_exp_exit(law, [](int i) { return i > 0 ? 1.0 : 0.0; }) ==
        Catch::Approx(law.q1[1]).margin(1e-14));
  CHECK(gibbs_exp_exit(law, [](int) { return 1.0; }) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("coupled derivative of log Z is nonnegative and matches the Gibbs route") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    const BoundaryParams p = stationary_params(spec);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const double fd = deriv_logz_a(spec, p, 5, 5, seed, 1e-4);
      CHECK(fd >= 0.0);
    }
    // against the exit-law expectation E[sum_{i<=t1} L_i]
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Environment env = build_environment(spec, p, 3, 3, 777 + seed);
      const PartitionLattice lat = log_partition(env);
      const double gibbs = deriv_logz_a_gibbs(env, lat);
      const double fd = deriv_logz_a(spec, p, 3, 3, 777 + seed, 1e-4);
      INFO(model_name(model) << " seed=" << seed);
      CHECK(fd == Catch::Approx(gibbs).margin(1e-5 * std::max(1.0, gibbs)));
    }
  }
}

TEST_CASE("mixed second difference of log Z is nonpositive within tolerance") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    const BoundaryParams p = stationary_params(spec);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const double mixed = deriv2_logz_ab(spec, p, 6, 6, seed, 1e-3);
      INFO(model_name(model) << " seed=" << seed);
      CHECK(mixed <= 1e-6);
    }
  }
}

TEST_CASE("quenched exit probability is pathwise nondecreasing in a") {
  for (auto model : kModels) {
    const ModelSpec spec = default_spec(model);
    const BoundaryParams p = stationary_params(spec);
    const EnvironmentSampler base(spec, p);
    const EnvironmentSampler tilted(spec, {p.a + 0.1, p.b});
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Environment e0 = base.sample(4, 4, seed);
      const Environment e1 = tilted.sample(4, 4, seed);
      const double q0 = exit_law(e0, log_partition(e0)).tail_q1(0.0);
      const double q1 = exit_law(e1, log_partition(e1)).tail_q1(0.0);
      if (q1 < q0 - 1e-12) ++violations;
    }
    INFO(model_name(model));
    CHECK(violations == 0);
  }
}

TEST_CASE("burke property of the increment families") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const BoundaryParams p = stationary_params(spec);
  const EnvironmentSampler sampler(spec, p);
  const MellinDistribution d2(spec.f2(), p.b);
  const MellinDistribution d1(spec.f1(), p.a);
  const int m = 4, n = 4;
  const std::size_t replicas = 4000;
  std::vector<double> e_incr, n_incr;
  e_incr.reserve(replicas * n);
  n_incr.reserve(replicas * m);
  for (std::size_t r = 0; r < replicas; ++r) {
    const Environment env = sampler.sample(m, n, 31000 + r);
    const PartitionLattice lat = log_partition(env);
    const NsewIncrements inc = nsew_increments(env, lat);
    CHECK(inc.stationary);
    if (r == 0) {
      CHECK(inc.s == env.log_r1);
      CHECK(inc.w == env.log_r2);
    }
    for (double v : inc.e) e_incr.push_back(std::exp(v));
    for (double v : inc.n) n_incr.push_back(std::exp(v));
  }
  CHECK(ks_test(e_incr, [&](double t) { return d2.cdf(t); }).p_value > 1e-3);
  CHECK(ks_test(n_incr, [&](double t) { return d1.cdf(t); }).p_value > 1e-3);

  // negative control: off-stationary boundary fails the same test
  const EnvironmentSampler off(spec, {p.a + 0.3, p.b});
  std::vector<double> e_off;
  e_off.reserve(replicas * n);
  for (std::size_t r = 0; r < replicas; ++r) {
    const Environment env = off.sample(m, n, 61000 + r);
    const PartitionLattice lat = log_partition(env);
    const NsewIncrements inc = nsew_increments(env, lat);
    CHECK(!inc.stationary);
    for (double v : inc.e) e_off.push_back(std::exp(v));
  }
  CHECK(ks_test(e_off, [&](double t) { return d2.cdf(t); }).p_value < 1e-3);
}

TEST_CASE("stationarity shift: Q_{m,n}[t1>k] equals Q_{m-k,n}[t1>0] in law") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const BoundaryParams p = stationary_params(spec);
  const EnvironmentSampler sampler(spec, p);
  const std::size_t replicas = 4000;
  std::vector<double> shifted(replicas), reduced(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    const Environment e1 = sampler.sample(6, 4, 81000 + r);
    shifted[r] = exit_law(e1, log_partition(e1)).tail_q1(2.0);
    const Environment e2 = sampler.sample(4, 4, 160000 + r);
    reduced[r] = exit_law(e2, log_partition(e2)).tail_q1(0.0);
  }
  CHECK(ks_test_two_sample(shifted, reduced).p_value > 1e-3);
}

TEST_CASE("characteristic quantity") {
  const ModelSpec spec = default_spec(PolymerModel::InvGamma);
  const BoundaryParams p = stationary_params(spec);
  CHECK(characteristic_e(spec, p, 7, 0) == Catch::Approx(7.0).margin(1e-9));
  // symmetric point: psi1 equal on both sides, e = m - n
  CHECK(characteristic_e(spec, p, 105, 105) == Catch::Approx(0.0).margin(1e-7));
  // polygamma oracle route
  const double p1a = oracle::polygamma(1, 1.0);
  CHECK(characteristic_e(spec, p, 10, 3) == Catch::Approx(10.0 - 3.0 * p1a / p1a).margin(1e-7));
  // rounding construction keeps |e| small
  const ModelSpec g = default_spec(PolymerModel::Gamma);
  const BoundaryParams gp = stationary_params(g);
  const double n_scale = 40.0;
  const int m = static_cast<int>(std::lround(n_scale * psi(g.f2(), gp.b, 1)));
  const int n = static_cast<int>(std::lround(n_scale * psi(g.f1(), gp.a, 1)));
  const double ratio = psi(g.f2(), gp.b, 1) / psi(g.f1(), gp.a, 1);
  CHECK(std::fabs(characteristic_e(g, gp, m, n)) <= 1.0 + 0.5 * (1.0 + ratio));
}
