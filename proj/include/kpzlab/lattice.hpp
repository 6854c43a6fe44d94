// Sampled polymer environments on the (m+1) x (n+1) quadrant corner, the
// log-domain partition-function dynamic program (forward and bulk-only
// backward tables), quenched exit-point laws, NSEW increments and the
// coupled parameter derivatives of log Z.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/logsumexp.hpp"
#include "kpzlab/mellin.hpp"
#include "kpzlab/models.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

namespace stream_tag {
inline constexpr std::uint64_t kBoundaryH = 1;
inline constexpr std::uint64_t kBoundaryV = 2;
inline constexpr std::uint64_t kBulk = 3;
}  // namespace stream_tag

// Bulk log-weight pairs for the interior vertices, a pure function of
// (model, m, n, seed); independent of the boundary parameters so boundary
// couplings leave the bulk untouched.
struct BulkWeights {
  int m = 0, n = 0;
  std::vector<double> log_y1, log_y2;  // (i,j), i=1..m, j=1..n, row-major
};

inline BulkWeights sample_bulk(const ModelSpec& spec, int m, int n, std::uint64_t seed) {
  BulkWeights bulk;
  bulk.m = m;
  bulk.n = n;
  bulk.log_y1.resize(static_cast<std::size_t>(m) * n);
  bulk.log_y2.resize(static_cast<std::size_t>(m) * n);
  const RngStream root = RngStream(seed).child(stream_tag::kBulk);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i - 1) * n + (j - 1);
      RngStream site = root.child(idx);
      spec.sample_bulk_pair(site, &bulk.log_y1[idx], &bulk.log_y2[idx]);
    }
  }
  return bulk;
}

// A sampled environment: boundary log-weights (with the uniforms they were
// inverted from, for couplings) plus interior edge-weight pairs.
struct Environment {
  int m = 0, n = 0;
  std::uint64_t seed = 0;
  ModelSpec spec;
  BoundaryParams params;
  std::vector<double> log_r1;  // i = 1..m
  std::vector<double> log_r2;  // j = 1..n
  std::vector<double> u1, u2;  // boundary uniforms
  std::vector<double> log_y1, log_y2;

  double bulk_log_y1(int i, int j) const {
    return log_y1[static_cast<std::size_t>(i - 1) * n + (j - 1)];
  }
  double bulk_log_y2(int i, int j) const {
    return log_y2[static_cast<std::size_t>(i - 1) * n + (j - 1)];
  }
};

// Caches the boundary quantile functions so thousands of replicas do not
// re-run the normalizer quadrature.
class EnvironmentSampler {
 public:
  EnvironmentSampler(const ModelSpec& spec, const BoundaryParams& params)
      : spec_(spec), params_(params), d1_(spec.f1(), params.a), d2_(spec.f2(), params.b) {
    params.validate(spec);
  }

  const ModelSpec& spec() const { return spec_; }
  const BoundaryParams& params() const { return params_; }

  Environment sample(int m, int n, std::uint64_t seed) const {
    if (m < 0 || n < 0) throw DimensionError("environment: m, n must be nonnegative");
    Environment env;
    env.m = m;
    env.n = n;
    env.seed = seed;
    env.spec = spec_;
    env.params = params_;
    const RngStream root(seed);
    const RngStream bh = root.child(stream_tag::kBoundaryH);
    const RngStream bv = root.child(stream_tag::kBoundaryV);
    env.log_r1.resize(static_cast<std::size_t>(m));
    env.u1.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      env.u1[i] = bh.unit_at(static_cast<std::uint64_t>(i));
      env.log_r1[i] = std::log(d1_.quantile(env.u1[i]));
    }
    env.log_r2.resize(static_cast<std::size_t>(n));
    env.u2.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      env.u2[j] = bv.unit_at(static_cast<std::uint64_t>(j));
      env.log_r2[j] = std::log(d2_.quantile(env.u2[j]));
    }
    BulkWeights bulk = sample_bulk(spec_, m, n, seed);
    env.log_y1 = std::move(bulk.log_y1);
    env.log_y2 = std::move(bulk.log_y2);
    return env;
  }

  // Same boundary streams and parameters, caller-provided bulk (shared across
  // boundary tilts).
  Environment sample_with_bulk(const BulkWeights& bulk, std::uint64_t seed) const {
    Environment env = sample_boundary_only(bulk.m, bulk.n, seed);
    env.log_y1 = bulk.log_y1;
    env.log_y2 = bulk.log_y2;
    return env;
  }

 private:
  Environment sample_boundary_only(int m, int n, std::uint64_t seed) const {
    Environment env;
    env.m = m;
    env.n = n;
    env.seed = seed;
    env.spec = spec_;
    env.params = params_;
    const RngStream root(seed);
    const RngStream bh = root.child(stream_tag::kBoundaryH);
    const RngStream bv = root.child(stream_tag::kBoundaryV);
    env.log_r1.resize(static_cast<std::size_t>(m));
    env.u1.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      env.u1[i] = bh.unit_at(static_cast<std::uint64_t>(i));
      env.log_r1[i] = std::log(d1_.quantile(env.u1[i]));
    }
    env.log_r2.resize(static_cast<std::size_t>(n));
    env.u2.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      env.u2[j] = bv.unit_at(static_cast<std::uint64_t>(j));
      env.log_r2[j] = std::log(d2_.quantile(env.u2[j]));
    }
    return env;
  }

  ModelSpec spec_;
  BoundaryParams params_;
  MellinDistribution d1_, d2_;
};

inline Environment build_environment(const ModelSpec& spec, const BoundaryParams& params, int m,
                                     int n, std::uint64_t seed) {
  return EnvironmentSampler(spec, params).sample(m, n, seed);
}

// Forward table log Z[i][j] plus the bulk-only suffix table log Z~[i][j]
// (paths (i,j) -> (m,n) through interior edges only), which the exit-point
// law factorizes through.
struct PartitionLattice {
  int m = 0, n = 0;
  std::vector<double> log_z;       // (m+1) x (n+1)
  std::vector<double> log_z_back;  // same shape; meaningful for i,j >= 1

  double z(int i, int j) const { return log_z[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double zb(int i, int j) const { return log_z_back[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double& z(int i, int j) { return log_z[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double& zb(int i, int j) { return log_z_back[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double corner() const { return z(m, n); }
};

// Forward recursion only; enough when just log Z_{m,n} is needed.
inline double log_partition_value(const Environment& env) {
  const int m = env.m, n = env.n;
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  row[0] = 0.0;
  for (int j = 1; j <= n; ++j) row[j] = row[j - 1] + env.log_r2[j - 1];
  for (int i = 1; i <= m; ++i) {
    row[0] += env.log_r1[i - 1];
    for (int j = 1; j <= n; ++j) {
      row[j] = log_add_exp(row[j] + env.bulk_log_y1(i, j), row[j - 1] + env.bulk_log_y2(i, j));
    }
  }
  return row[n];
}

inline PartitionLattice log_partition(const Environment& env) {
  const int m = env.m, n = env.n;
  PartitionLattice lat;
  lat.m = m;
  lat.n = n;
  lat.log_z.assign(static_cast<std::size_t>(m + 1) * (n + 1), 0.0);
  lat.log_z_back.assign(static_cast<std::size_t>(m + 1) * (n + 1), 0.0);

  for (int i = 1; i <= m; ++i) lat.z(i, 0) = lat.z(i - 1, 0) + env.log_r1[i - 1];
  for (int j = 1; j <= n; ++j) lat.z(0, j) = lat.z(0, j - 1) + env.log_r2[j - 1];
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      lat.z(i, j) = log_add_exp(lat.z(i - 1, j) + env.bulk_log_y1(i, j),
                                lat.z(i, j - 1) + env.bulk_log_y2(i, j));
    }
  }

  // Suffix table over interior vertices.
  for (int i = m; i >= 1; --i) {
    for (int j = n; j >= 1; --j) {
      if (i == m && j == n) {
        lat.zb(i, j) = 0.0;
      } else if (i == m) {
        lat.zb(i, j) = env.bulk_log_y2(i, j + 1) + lat.zb(i, j + 1);
      } else if (j == n) {
        lat.zb(i, j) = env.bulk_log_y1(i + 1, j) + lat.zb(i + 1, j);
      } else {
        lat.zb(i, j) = log_add_exp(env.bulk_log_y1(i + 1, j) + lat.zb(i + 1, j),
                                   env.bulk_log_y2(i, j + 1) + lat.zb(i, j + 1));
      }
    }
  }
  return lat;
}

// Quenched exit-point law.  q1[i] = Q(t1 = i) for i >= 1 (last touch of the
// x-axis at (i,0)); a path exits exactly one axis, so q1[0] carries the mass
// of up-first paths and equals sum_{j>=1} q2[j].
struct ExitLaw {
  std::vector<double> q1, q2;

  double tail_q1(double threshold) const {
    double s = 0.0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
      if (static_cast<double>(i) > threshold) s += q1[i];
    }
    return s;
  }
};

inline ExitLaw exit_law(const Environment& env, const PartitionLattice& lat) {
  const int m = env.m, n = env.n;
  if (m < 1 || n < 1) throw DimensionError("exit_law: needs m, n >= 1");
  ExitLaw law;
  law.q1.assign(static_cast<std::size_t>(m) + 1, 0.0);
  law.q2.assign(static_cast<std::size_t>(n) + 1, 0.0);
  const double log_corner = lat.z(m, n);
  double pre = 0.0;
  for (int i = 1; i <= m; ++i) {
    pre += env.log_r1[i - 1];
    law.q1[i] = std::exp(pre + env.bulk_log_y2(i, 1) + lat.zb(i, 1) - log_corner);
  }
  pre = 0.0;
  for (int j = 1; j <= n; ++j) {
    pre += env.log_r2[j - 1];
    law.q2[j] = std::exp(pre + env.bulk_log_y1(1, j) + lat.zb(1, j) - log_corner);
  }
  double s1 = 0.0, s2 = 0.0;
  for (int i = 1; i <= m; ++i) s1 += law.q1[i];
  for (int j = 1; j <= n; ++j) s2 += law.q2[j];
  law.q1[0] = s2;
  law.q2[0] = s1;
  return law;
}

// E^{a,b}[g(t1)] under the quenched polymer measure.
inline double gibbs_exp_exit(const ExitLaw& law, const std::function<double(int)>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < law.q1.size(); ++i) s += g(static_cast<int>(i)) * law.q1[i];
  return s;
}

// Central finite difference of log Z in the boundary tilt a under the
// uniform coupling (bulk and uniforms fixed).
inline double deriv_logz_a(const ModelSpec& spec, const BoundaryParams& params, int m, int n,
                           std::uint64_t seed, double h = 1e-4) {
  const BoundaryParams up{params.a + h, params.b};
  const BoundaryParams dn{params.a - h, params.b};
  up.validate(spec);
  dn.validate(spec);
  const double zp = log_partition_value(EnvironmentSampler(spec, up).sample(m, n, seed));
  const double zm = log_partition_value(EnvironmentSampler(spec, dn).sample(m, n, seed));
  return (zp - zm) / (2.0 * h);
}

// Mixed second difference d^2/da db of log Z under the coupling.
inline double deriv2_logz_ab(const ModelSpec& spec, const BoundaryParams& params, int m, int n,
                             std::uint64_t seed, double h = 1e-3) {
  auto value = [&](double da, double db) {
    const BoundaryParams p{params.a + da, params.b + db};
    p.validate(spec);
    return log_partition_value(EnvironmentSampler(spec, p).sample(m, n, seed));
  };
  return (value(h, h) - value(h, -h) - value(-h, h) + value(-h, -h)) / (4.0 * h * h);
}

// The Gibbs-expectation route to the same derivative: E[sum_{i<=t1} L(a, R1_i)].
inline double deriv_logz_a_gibbs(const Environment& env, const PartitionLattice& lat) {
  const MellinDistribution d1(env.spec.f1(), env.params.a);
  const ExitLaw law = exit_law(env, lat);
  const int m = env.m;
  std::vector<double> l_prefix(static_cast<std::size_t>(m) + 1, 0.0);
  for (int i = 1; i <= m; ++i) {
    l_prefix[i] = l_prefix[i - 1] + d1.log_deriv_L(std::exp(env.log_r1[i - 1]));
  }
  double s = 0.0;
  for (int i = 1; i <= m; ++i) s += law.q1[i] * l_prefix[i];
  return s;
}

// Down-right boundary increments (compass order W,N,S,E as log values).
struct NsewIncrements {
  std::vector<double> w, n, s, e;
  bool stationary = false;  // Burke iid marginals only claimed when true
};

inline NsewIncrements nsew_increments(const Environment& env, const PartitionLattice& lat) {
  NsewIncrements out;
  out.stationary = env.params.stationary(env.spec);
  out.w = env.log_r2;
  out.s = env.log_r1;
  out.e.resize(static_cast<std::size_t>(env.n));
  for (int j = 1; j <= env.n; ++j) out.e[j - 1] = lat.z(env.m, j) - lat.z(env.m, j - 1);
  out.n.resize(static_cast<std::size_t>(env.m));
  for (int i = 1; i <= env.m; ++i) out.n[i - 1] = lat.z(i, env.n) - lat.z(i - 1, env.n);
  return out;
}

// e(a,b,m,n) = m - n psi_1^{f2}(b) / psi_1^{f1}(a).
inline double characteristic_e(const ModelSpec& spec, const BoundaryParams& params, int m, int n) {
  params.validate(spec);
  const double p1a = psi(spec.f1(), params.a, 1);
  const double p1b = psi(spec.f2(), params.b, 1);
  return static_cast<double>(m) - static_cast<double>(n) * p1b / p1a;
}

}  // namespace kpzlab
