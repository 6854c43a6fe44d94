// The four integrable polymer models in the Mellin framework: kernel choices,
// tilt parameters (a1, a2, a3) in terms of (theta, mu, beta), the bulk-weight
// map X -> (Y1, Y2), and direct bulk samplers.
#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "kpzlab/errors.hpp"
#include "kpzlab/mellin.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

enum class PolymerModel { InvGamma, Gamma, Beta, InvBeta };

inline const char* model_name(PolymerModel m) {
  switch (m) {
    case PolymerModel::InvGamma: return "inv-gamma";
    case PolymerModel::Gamma: return "gamma";
    case PolymerModel::Beta: return "beta";
    case PolymerModel::InvBeta: return "inv-beta";
  }
  return "?";
}

inline PolymerModel model_from_name(const std::string& s) {
  if (s == "inv-gamma") return PolymerModel::InvGamma;
  if (s == "gamma") return PolymerModel::Gamma;
  if (s == "beta") return PolymerModel::Beta;
  if (s == "inv-beta") return PolymerModel::InvBeta;
  throw ConfigError("unknown polymer model: " + s);
}

struct ModelSpec {
  PolymerModel model = PolymerModel::InvGamma;
  double theta = 1.0;
  double mu = 2.0;
  double beta = 1.0;

  static ModelSpec make(PolymerModel model, double theta, double mu, double beta) {
    if (!(mu > 0.0) || !(beta > 0.0)) throw OutOfDomain("model: mu and beta must be positive");
    const bool bounded = (model == PolymerModel::InvGamma || model == PolymerModel::InvBeta);
    if (!(theta > 0.0) || (bounded && !(theta < mu))) {
      throw OutOfDomain("model: theta outside admissible range");
    }
    return {model, theta, mu, beta};
  }

  WeightFamily f1() const {
    switch (model) {
      case PolymerModel::InvGamma: return WeightFamily::inv_exp(beta);
      case PolymerModel::Gamma: return WeightFamily::exponential(beta);
      case PolymerModel::Beta: return WeightFamily::beta_kernel(beta);
      case PolymerModel::InvBeta: return WeightFamily::inv_beta_kernel(beta);
    }
    return {};
  }

  WeightFamily f2() const {
    switch (model) {
      case PolymerModel::InvGamma: return WeightFamily::inv_exp(beta);
      case PolymerModel::Gamma: return WeightFamily::inv_beta_kernel(mu);
      case PolymerModel::Beta: return WeightFamily::inv_beta_kernel(mu);
      case PolymerModel::InvBeta: return WeightFamily::ratio(beta, mu);
    }
    return {};
  }

  double a1() const {
    switch (model) {
      case PolymerModel::InvGamma:
      case PolymerModel::InvBeta: return theta - mu;
      default: return mu + theta;
    }
  }
  double a2() const { return -theta; }
  double a3() const {
    switch (model) {
      case PolymerModel::InvGamma:
      case PolymerModel::InvBeta: return -mu;
      default: return mu;
    }
  }

  // Interior edge-weight pair from the bulk variable X.
  std::pair<double, double> ymap(double x) const {
    switch (model) {
      case PolymerModel::InvGamma: return {x, x};
      case PolymerModel::Gamma: return {x, 1.0};
      case PolymerModel::Beta: return {x, 1.0 - x};
      case PolymerModel::InvBeta: return {x, x - 1.0};
    }
    return {x, x};
  }

  // Bulk: X ~ rho_{f1, a3}, reduced to gamma/beta primitives.  Log weights are
  // formed from the primitives directly so ymap components like 1-X or X-1
  // never lose precision to cancellation.
  void sample_bulk_pair(RngStream& rng, double* log_y1, double* log_y2) const {
    switch (model) {
      case PolymerModel::InvGamma: {
        // X = beta / Gamma(mu)
        const double g = sample_gamma(rng, mu);
        const double ly = std::log(beta) - std::log(g);
        *log_y1 = ly;
        *log_y2 = ly;
        return;
      }
      case PolymerModel::Gamma: {
        // X = Gamma(mu) / beta
        const double g = sample_gamma(rng, mu);
        *log_y1 = std::log(g) - std::log(beta);
        *log_y2 = 0.0;
        return;
      }
      case PolymerModel::Beta: {
        // X = G1/(G1+G2) with shapes (mu, beta)
        const double g1 = sample_gamma(rng, mu);
        const double g2 = sample_gamma(rng, beta);
        const double ls = std::log(g1 + g2);
        *log_y1 = std::log(g1) - ls;
        *log_y2 = std::log(g2) - ls;
        return;
      }
      case PolymerModel::InvBeta: {
        // X = 1/B with B ~ Beta(mu, beta); X-1 = G2/G1
        const double g1 = sample_gamma(rng, mu);
        const double g2 = sample_gamma(rng, beta);
        *log_y1 = std::log(g1 + g2) - std::log(g1);
        *log_y2 = std::log(g2) - std::log(g1);
        return;
      }
    }
  }
};

struct BoundaryParams {
  double a = 0.0;
  double b = 0.0;

  bool stationary(const ModelSpec& spec) const { return std::fabs(a + b - spec.a3()) < 1e-12; }

  void validate(const ModelSpec& spec) const {
    if (!spec.f1().domain().contains(a)) throw OutOfDomain("boundary parameter a outside D(M_f1)");
    if (!spec.f2().domain().contains(b)) throw OutOfDomain("boundary parameter b outside D(M_f2)");
  }
};

// The stationary point selected by theta: (a, b) = (a1, a2).
inline BoundaryParams stationary_params(const ModelSpec& spec) { return {spec.a1(), spec.a2()}; }

}  // namespace kpzlab
