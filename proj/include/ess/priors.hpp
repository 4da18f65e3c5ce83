#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ess/model_indicator.hpp"

namespace ess {

enum class PriorFamily { GPrior, Independent };
enum class TauMode { Fixed, ZellnerSiow, HyperG };

/// Hyperparameters of the model: coefficient-prior covariance family,
/// the prior on the variable selection coefficient tau, the inverse-gamma
/// prior on sigma^2 and the beta-binomial prior on the model space.
struct PriorSpec {
  PriorFamily family = PriorFamily::GPrior;
  TauMode tau_mode = TauMode::Fixed;
  double tau = 1.0;      // Fixed mode
  double a_tau = 0.5;    // ZellnerSiow
  double b_tau = 0.5;    // ZellnerSiow (n/2 recommended)
  double c_tau = 1.0;    // HyperG
  double a_sigma = 1e-6;
  double b_sigma = 1e-3;
  double a_omega = 1.0;
  double b_omega = 1.0;
};

struct PriorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solves the beta-binomial moment equations
///   E(p_gamma) = p a/(a+b)
///   V(p_gamma) = p ab (a+b+p) / ((a+b)^2 (a+b+1))
/// for (a, b). At the binomial limit V = E(1 - E/p), a+b diverges and is
/// capped at 1e6 (flagged through binomial_limit when non-null).
inline std::pair<double, double> elicit_omega_hyperparams(
    double e_pgamma, double v_pgamma, int p, bool* binomial_limit = nullptr) {
  if (binomial_limit) *binomial_limit = false;
  if (!(e_pgamma > 0.0) || !(e_pgamma < p))
    throw PriorError("E(p_gamma) must lie in (0, p)");
  if (!(v_pgamma > 0.0)) throw PriorError("V(p_gamma) must be positive");
  const double mu = e_pgamma / p;
  const double v_binomial = p * mu * (1.0 - mu);       // a+b -> infinity
  const double v_max = p * p * mu * (1.0 - mu);        // a+b -> 0
  const double cap = 1e6;
  double s;  // a + b
  if (v_pgamma <= v_binomial * (1.0 + 1e-12)) {
    if (v_pgamma < v_binomial * (1.0 - 1e-9)) {
      throw PriorError(
          "V(p_gamma) too small for a beta-binomial prior; feasible range is (" +
          std::to_string(v_binomial) + ", " + std::to_string(v_max) + ")");
    }
    s = cap;
    if (binomial_limit) *binomial_limit = true;
  } else if (v_pgamma >= v_max) {
    throw PriorError(
        "V(p_gamma) too large for a beta-binomial prior; feasible range is (" +
        std::to_string(v_binomial) + ", " + std::to_string(v_max) + ")");
  } else {
    s = (v_max - v_pgamma) / (v_pgamma - v_binomial);
    if (s > cap) {
      s = cap;
      if (binomial_limit) *binomial_limit = true;
    }
  }
  double a = mu * s;
  double b = (1.0 - mu) * s;
  if (!(a > 0.0) || !(b > 0.0))
    throw PriorError("elicited (a_omega, b_omega) must be positive");
  return {a, b};
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// log p(gamma) under the beta-binomial model prior.
inline double log_model_prior(int p_gamma, const PriorSpec& spec, int p) {
  if (p_gamma < 0 || p_gamma > p) throw PriorError("p_gamma out of range");
  return log_beta(p_gamma + spec.a_omega, p - p_gamma + spec.b_omega) -
         log_beta(spec.a_omega, spec.b_omega);
}

inline double log_model_prior(const ModelIndicator& gamma,
                              const PriorSpec& spec, int p) {
  return log_model_prior(gamma.size(), spec, p);
}

/// Conditional prior inclusion probability theta^(1); p_gamma counts the
/// variable under consideration as included.
inline double theta_one(int p_gamma, int p, const PriorSpec& spec) {
  return (p_gamma + spec.a_omega - 1.0) / (p + spec.a_omega + spec.b_omega - 1.0);
}

/// Unnormalized log density of the tau hyperprior. Calling this with a
/// Fixed-tau spec is a contract error.
inline double log_tau_prior(double tau, const PriorSpec& spec) {
  switch (spec.tau_mode) {
    case TauMode::ZellnerSiow:
      if (!(tau > 0.0)) throw PriorError("tau must be positive");
      return -(spec.a_tau + 1.0) * std::log(tau) - spec.b_tau / tau;
    case TauMode::HyperG:
      if (!(tau >= 0.0)) throw PriorError("tau must be nonnegative");
      return -spec.c_tau * std::log1p(tau);
    case TauMode::Fixed:
      throw PriorError("log_tau_prior called with fixed tau");
  }
  throw PriorError("unknown tau mode");
}

}  // namespace ess
