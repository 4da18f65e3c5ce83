#pragma once

// Shared oracles for the test suite: golden-section maximization, adaptive
// Simpson quadrature, dense-formula marginal likelihoods, and random
// regression instances. These deliberately use different algorithms than the
// library paths they validate.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "ess/dataset.hpp"
#include "ess/model_indicator.hpp"
#include "ess/rng.hpp"

namespace support {

/// Golden-section search for the maximizer of a unimodal f on [lo, hi].
inline double golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi,
                                      double tol = 1e-12) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f on [a, b].
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-12) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, eps, 60);
}

/// log of integral of exp(log_f) over [a, b], with max-subtraction for
/// numerical stability.
inline double log_integrate(const std::function<double(double)>& log_f,
                            double a, double b, double eps = 1e-12) {
  // crude grid scan for the maximum, then shift
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i)
    mx = std::max(mx, log_f(a + (b - a) * i / 400.0));
  double val = integrate([&](double x) { return std::exp(log_f(x) - mx); }, a,
                         b, eps);
  return mx + std::log(val);
}

/// Random centered regression instance with a handful of true effects.
inline ess::Dataset random_instance(int n, int p, ess::Rng& rng,
                                    bool standardized = false) {
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
  Eigen::VectorXd y(n);
  int k = 1 + rng.below(std::min(p, 4));
  std::vector<double> beta(k);
  std::vector<int> idx(k);
  for (int t = 0; t < k; ++t) {
    idx[t] = rng.below(p);
    beta[t] = rng.normal();
  }
  for (int i = 0; i < n; ++i) {
    double mu = 0.0;
    for (int t = 0; t < k; ++t) mu += beta[t] * X(i, idx[t]);
    y[i] = mu + rng.normal();
  }
  ess::Dataset ds = ess::center(ess::make_dataset(std::move(y), std::move(X)));
  if (standardized) ds = ess::standardize(std::move(ds));
  return ds;
}

/// Dense-formula g-prior marginal: direct evaluation of
/// -p_g/2 log(1+tau) - c2 log(2 b_sigma + y'y - tau/(1+tau) y'P y) using a
/// full-matrix inverse rather than QR.
inline double dense_gprior_log_marginal(const ess::ModelIndicator& g,
                                        double tau, const ess::Dataset& ds,
                                        double a_sigma, double b_sigma) {
  double fit = 0.0;
  const int pg = g.size();
  if (pg > 0) {
    Eigen::MatrixXd Xg(ds.n, pg);
    for (int k = 0; k < pg; ++k) Xg.col(k) = ds.X.col(g.included[k]);
    Eigen::MatrixXd G = Xg.transpose() * Xg;
    Eigen::VectorXd v = Xg.transpose() * ds.y;
    fit = v.dot(G.fullPivLu().solve(v));
  }
  double s = ds.yty - tau / (1.0 + tau) * fit;
  return -0.5 * pg * std::log1p(tau) -
         0.5 * (2.0 * a_sigma + ds.n - 1.0) * std::log(2.0 * b_sigma + s);
}

}  // namespace support
