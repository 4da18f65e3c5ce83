#pragma once

#include <cmath>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/likelihood.hpp"
#include "ess/priors.hpp"

// Laplace approximation of p(y|gamma) = int p(y|gamma,tau) p(tau) dtau for the
// g-prior, after the change of variables lambda = log(tau). Exposed as a
// diagnostic/oracle facility; the samplers keep tau explicit.

namespace ess {

/// Constants of the lambda-space integrand:
///   c1 = (2a_sigma + n - 1 - p_gamma)/2, c2 = (2a_sigma + n - 1)/2,
///   c3 = 2b_sigma + y'y,                 c4 = 2b_sigma + y'y (1 - R^2).
struct LaplaceCoeffs {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  double r2 = 0;
  int p_gamma = 0;
};

inline LaplaceCoeffs laplace_coeffs(const ModelIndicator& gamma,
                                    const Dataset& ds, const PriorSpec& spec) {
  if (gamma.size() >= ds.n)
    throw PriorError("Laplace approximation requires n > p_gamma");
  LaplaceCoeffs c;
  c.p_gamma = gamma.size();
  c.r2 = ols_r_squared(gamma, ds);
  c.c1 = (2.0 * spec.a_sigma + ds.n - 1.0 - c.p_gamma) / 2.0;
  c.c2 = (2.0 * spec.a_sigma + ds.n - 1.0) / 2.0;
  c.c3 = 2.0 * spec.b_sigma + ds.yty;
  c.c4 = 2.0 * spec.b_sigma + ds.yty * (1.0 - c.r2);
  return c;
}

/// log of the Zellner-Siow integrand (Jacobian included):
///   c1 log(1+u) - c2 log(c3 + c4 u) - b_tau/u - a_tau lambda,  u = e^lambda.
inline double log_integrand_zs(double lambda, const LaplaceCoeffs& c,
                               const PriorSpec& spec) {
  double u = std::exp(lambda);
  return c.c1 * std::log1p(u) - c.c2 * std::log(c.c3 + c.c4 * u) -
         spec.b_tau / u - spec.a_tau * lambda;
}

/// log of the hyper-g integrand (Jacobian included):
///   c1* log(1+u) - c2 log(c3 + c4 u) + lambda,  c1* = c1 - c_tau.
inline double log_integrand_hyperg(double lambda, const LaplaceCoeffs& c,
                                   const PriorSpec& spec) {
  double u = std::exp(lambda);
  return (c.c1 - spec.c_tau) * std::log1p(u) -
         c.c2 * std::log(c.c3 + c.c4 * u) + lambda;
}

namespace detail {

/// Real roots of u^3 + a u^2 + b u + c = 0 (trigonometric/Cardano form).
inline std::vector<double> cubic_real_roots(double a, double b, double c) {
  double p = b - a * a / 3.0;
  double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  double shift = -a / 3.0;
  double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  double scale = std::max({1.0, std::abs(q * q / 4.0),
                           std::abs(p * p * p / 27.0)});
  if (std::abs(disc) < 1e-12 * scale) {
    // borderline discriminant: repeated-root territory, keep distinct values
    if (std::abs(q) < 1e-300) {
      roots.push_back(shift);
    } else {
      double u = std::cbrt(-q / 2.0);
      roots.push_back(shift + 2.0 * u);
      roots.push_back(shift - u);
    }
  } else if (disc > 0.0) {
    double s = std::sqrt(disc);
    roots.push_back(shift + std::cbrt(-q / 2.0 + s) +
                    std::cbrt(-q / 2.0 - s));
  } else {
    double r = std::sqrt(-p * p * p / 27.0);
    double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
    double m = 2.0 * std::sqrt(-p / 3.0);
    for (int k = 0; k < 3; ++k)
      roots.push_back(shift + m * std::cos((phi + 2.0 * 3.14159265358979323846 * k) / 3.0));
  }
  return roots;
}

inline double polish_newton(double u, double a, double b, double c) {
  for (int it = 0; it < 50; ++it) {
    double f = ((u + a) * u + b) * u + c;
    double fp = (3.0 * u + 2.0 * a) * u + b;
    if (fp == 0.0) break;
    double step = f / fp;
    u -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(u))) break;
  }
  return u;
}

inline double bisect_cubic_positive(double a, double b, double c) {
  auto f = [&](double u) { return ((u + a) * u + b) * u + c; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) <= 0.0 && hi < 1e30) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Posterior mode of tau (= e^lambda-hat) under the Zellner-Siow prior: the
/// positive root of the cubic stationarity equation of log_integrand_zs.
inline double laplace_mode_zs(const ModelIndicator& gamma, const Dataset& ds,
                              const PriorSpec& spec) {
  LaplaceCoeffs c = laplace_coeffs(gamma, ds, spec);
  double denom = (c.c1 - c.c2 - spec.a_tau) * c.c4;  // < 0 for valid inputs
  double A = (c.c1 * c.c3 - c.c2 * c.c4 - (c.c3 + c.c4) * spec.a_tau +
              c.c4 * spec.b_tau) / denom;
  double B = (-c.c3 * spec.a_tau + (c.c3 + c.c4) * spec.b_tau) / denom;
  double C = c.c3 * spec.b_tau / denom;
  auto roots = detail::cubic_real_roots(A, B, C);
  int npos = 0;
  double best = 0.0;
  for (double r : roots)
    if (r > 0.0) {
      ++npos;
      best = r;
    }
  if (npos == 0)
    throw PriorError(
        "Zellner-Siow posterior mode: no positive root; b_tau > a_tau is "
        "required for a unique positive solution");
  if (npos > 1) {
    // precision-degraded analytic solution: fall back to a bracketed search
    best = detail::bisect_cubic_positive(A, B, C);
  }
  return detail::polish_newton(best, A, B, C);
}

/// Posterior mode of tau under the hyper-g prior p(tau) ~ (1+tau)^{-c_tau}
/// (tau-space mode, closed form; clamped at zero).
inline double laplace_mode_hyperg(const ModelIndicator& gamma,
                                  const Dataset& ds, const PriorSpec& spec) {
  LaplaceCoeffs c = laplace_coeffs(gamma, ds, spec);
  double df = 2.0 * spec.a_sigma + ds.n - 1.0 - (c.p_gamma + 2.0 * spec.c_tau);
  if (!(df > 0.0))
    throw PriorError(
        "hyper-g mode requires 2a_sigma + n - 1 > p_gamma + 2c_tau");
  double c1s = c.c1 - spec.c_tau;  // = df/2
  double tau = (c.c2 * c.c4 - c1s * c.c3) / (c.c4 * (c1s - c.c2));
  return std::max(tau, 0.0);
}

/// Laplace approximation of log p(y|gamma) on the same unnormalized scale as
/// the log_marginal_* functions: log I(lambda-hat) + 0.5 log(2 pi sigma^2).
inline double laplace_log_marginal(const ModelIndicator& gamma,
                                   const Dataset& ds, const PriorSpec& spec) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  LaplaceCoeffs c = laplace_coeffs(gamma, ds, spec);
  if (spec.tau_mode == TauMode::ZellnerSiow) {
    double u = laplace_mode_zs(gamma, ds, spec);
    double var = 1.0 / (-c.c1 * u / ((1.0 + u) * (1.0 + u)) +
                        c.c2 * c.c3 * c.c4 * u /
                            ((c.c3 + c.c4 * u) * (c.c3 + c.c4 * u)) +
                        spec.b_tau / u);
    if (!(var > 0.0))
      throw PriorError(
          "Zellner-Siow Laplace variance not positive at the mode (b_tau > "
          "c1 is sufficient as R^2 -> 1)");
    return log_integrand_zs(std::log(u), c, spec) +
           0.5 * std::log(two_pi * var);
  }
  if (spec.tau_mode == TauMode::HyperG) {
    // lambda-space mode: positive root of the quadratic stationarity
    // condition of log_integrand_hyperg
    double c1s = c.c1 - spec.c_tau;
    double aq = (c1s - c.c2 + 1.0) * c.c4;
    double bq = c1s * c.c3 - c.c2 * c.c4 + c.c3 + c.c4;
    double cq = c.c3;
    double u;
    if (std::abs(aq) < 1e-14 * std::max(std::abs(bq), std::abs(cq))) {
      u = -cq / bq;
    } else {
      double disc = bq * bq - 4.0 * aq * cq;
      if (disc < 0.0)
        throw PriorError("hyper-g stationarity equation has no real root");
      double s = std::sqrt(disc);
      // aq < 0 and cq > 0 for valid inputs: roots have opposite signs
      double r1 = (-bq + s) / (2.0 * aq);
      double r2 = (-bq - s) / (2.0 * aq);
      u = std::max(r1, r2);
    }
    if (!(u > 0.0))
      throw PriorError("hyper-g integrand has no positive mode");
    double var = 1.0 / (-c1s * u / ((1.0 + u) * (1.0 + u)) +
                        c.c2 * c.c3 * c.c4 * u /
                            ((c.c3 + c.c4 * u) * (c.c3 + c.c4 * u)));
    if (!(var > 0.0))
      throw PriorError(
          "hyper-g Laplace variance not positive at the mode (requires "
          "p_gamma + 2c_tau < 2a_sigma + n - 1 away from R^2 -> 1)");
    return log_integrand_hyperg(std::log(u), c, spec) +
           0.5 * std::log(two_pi * var);
  }
  throw PriorError("laplace_log_marginal called with fixed tau");
}

}  // namespace ess
