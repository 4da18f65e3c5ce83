#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ess/dataset.hpp"
#include "ess/model_indicator.hpp"
#include "ess/priors.hpp"

namespace ess {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unnormalized log marginal likelihood together with the quadratic form
/// S(gamma) it was computed from. Constant factors depending only on
/// (n, a_sigma, b_sigma) are dropped consistently across all calls.
struct LogMarginal {
  double value = 0.0;
  double s_gamma = 0.0;
  int p_gamma = 0;
  double tau = 0.0;
};

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& X,
                                 const ModelIndicator& gamma) {
  Eigen::MatrixXd Xg(X.rows(), gamma.size());
  for (int k = 0; k < gamma.size(); ++k) Xg.col(k) = X.col(gamma.included[k]);
  return Xg;
}

/// y' X_g (X_g'X_g)^{-1} X_g' y via column-pivoted QR. Rank-deficient
/// directions are pivoted out and contribute no fit. For p_gamma >= n the
/// projection is complete and the fit equals y'y.
inline double projection_fit(const ModelIndicator& gamma, const Dataset& ds) {
  const int pg = gamma.size();
  if (pg == 0) return 0.0;
  if (pg >= ds.n) return ds.yty;
  Eigen::MatrixXd Xg = submatrix(ds.X, gamma);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xg);
  Eigen::Index r = qr.rank();
  Eigen::VectorXd z = qr.householderQ().transpose() * ds.y;
  double fit = z.head(r).squaredNorm();
  return std::min(fit, ds.yty);
}

inline double s_gamma_gprior_from_fit(double fit, double tau,
                                      const Dataset& ds) {
  return ds.yty - tau / (1.0 + tau) * fit;
}

inline double s_gamma_gprior(const ModelIndicator& gamma, double tau,
                             const Dataset& ds) {
  if (!(tau > 0.0)) throw NumericError("tau must be positive");
  return s_gamma_gprior_from_fit(projection_fit(gamma, ds), tau, ds);
}

inline double log_marginal_from_s(double s, double log_det_term,
                                  const Dataset& ds, double a_sigma,
                                  double b_sigma) {
  const double q = 2.0 * b_sigma + s;
  if (!(q > 0.0)) throw NumericError("2*b_sigma + S(gamma) must be positive");
  return log_det_term - 0.5 * (2.0 * a_sigma + ds.n - 1.0) * std::log(q);
}

inline LogMarginal log_marginal_gprior(const ModelIndicator& gamma, double tau,
                                       const Dataset& ds, double a_sigma,
                                       double b_sigma) {
  const double s = s_gamma_gprior(gamma, tau, ds);
  LogMarginal lm;
  lm.p_gamma = gamma.size();
  lm.tau = tau;
  lm.s_gamma = s;
  lm.value = log_marginal_from_s(s, -0.5 * lm.p_gamma * std::log1p(tau),
                                 ds, a_sigma, b_sigma);
  return lm;
}

inline LogMarginal log_marginal_gprior_from_fit(double fit, int p_gamma,
                                                double tau, const Dataset& ds,
                                                double a_sigma,
                                                double b_sigma) {
  LogMarginal lm;
  lm.p_gamma = p_gamma;
  lm.tau = tau;
  lm.s_gamma = s_gamma_gprior_from_fit(fit, tau, ds);
  lm.value = log_marginal_from_s(lm.s_gamma,
                                 -0.5 * p_gamma * std::log1p(tau), ds, a_sigma,
                                 b_sigma);
  return lm;
}

/// Independent-prior marginal (coefficient covariance tau * I). Computed by
/// QR of the ridge-augmented panel stacking X_g over (1/sqrt(tau)) I, so the
/// result is defined for any p_gamma, including p_gamma >= n. The Gram
/// determinant |X_g'X_g + I/tau| is read off the R diagonal.
inline LogMarginal log_marginal_indep(const ModelIndicator& gamma, double tau,
                                      const Dataset& ds, double a_sigma,
                                      double b_sigma) {
  if (!(tau > 0.0)) throw NumericError("tau must be positive");
  const int pg = gamma.size();
  LogMarginal lm;
  lm.p_gamma = pg;
  lm.tau = tau;
  if (pg == 0) {
    lm.s_gamma = ds.yty;
    lm.value = log_marginal_from_s(ds.yty, 0.0, ds, a_sigma, b_sigma);
    return lm;
  }
  const double ridge = 1.0 / std::sqrt(tau);
  Eigen::MatrixXd A(ds.n + pg, pg);
  A.topRows(ds.n) = submatrix(ds.X, gamma);
  A.bottomRows(pg) = ridge * Eigen::MatrixXd::Identity(pg, pg);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ds.n + pg);
  b.head(ds.n) = ds.y;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  double log_det = 0.0;  // log |X'X + I/tau|
  for (int k = 0; k < pg; ++k)
    log_det += 2.0 * std::log(std::abs(qr.matrixQR()(k, k)));
  Eigen::VectorXd beta = qr.solve(b);
  lm.s_gamma = (b - A * beta).squaredNorm();
  lm.value = log_marginal_from_s(
      lm.s_gamma, -0.5 * log_det - 0.5 * pg * std::log(tau), ds, a_sigma,
      b_sigma);
  return lm;
}

/// Generic conjugate marginal for an arbitrary SPD prior covariance Sigma and
/// prior mean m (dense linear algebra; test oracle, not the sampling path).
inline LogMarginal log_marginal_generic(const ModelIndicator& gamma,
                                        const Eigen::MatrixXd& Sigma,
                                        const Eigen::VectorXd& m,
                                        const Dataset& ds, double a_sigma,
                                        double b_sigma) {
  const int pg = gamma.size();
  LogMarginal lm;
  lm.p_gamma = pg;
  lm.tau = 0.0;
  if (pg == 0) {
    lm.s_gamma = ds.yty;
    lm.value = log_marginal_from_s(ds.yty, 0.0, ds, a_sigma, b_sigma);
    return lm;
  }
  if (Sigma.rows() != pg || Sigma.cols() != pg || m.size() != pg)
    throw NumericError("Sigma/m dimensions do not match p_gamma");
  Eigen::LLT<Eigen::MatrixXd> sig_llt(Sigma);
  if (sig_llt.info() != Eigen::Success)
    throw NumericError("Sigma is not positive definite");
  Eigen::MatrixXd Sigma_inv =
      sig_llt.solve(Eigen::MatrixXd::Identity(pg, pg));
  Eigen::MatrixXd Xg = submatrix(ds.X, gamma);
  Eigen::MatrixXd K = Xg.transpose() * Xg + Sigma_inv;
  Eigen::LLT<Eigen::MatrixXd> k_llt(K);
  if (k_llt.info() != Eigen::Success)
    throw NumericError("K_gamma is not positive definite");
  Eigen::VectorXd M = Xg.transpose() * ds.y + Sigma_inv * m;
  const double C = ds.yty + m.dot(Sigma_inv * m);
  lm.s_gamma = C - M.dot(k_llt.solve(M));
  double log_det_K = 0.0, log_det_Sigma = 0.0;
  for (int k = 0; k < pg; ++k) {
    log_det_K += 2.0 * std::log(k_llt.matrixL()(k, k));
    log_det_Sigma += 2.0 * std::log(sig_llt.matrixL()(k, k));
  }
  lm.value = log_marginal_from_s(
      lm.s_gamma, -0.5 * (log_det_K + log_det_Sigma), ds, a_sigma, b_sigma);
  return lm;
}

/// Family dispatch used by the samplers.
inline LogMarginal log_marginal(const ModelIndicator& gamma, double tau,
                                const Dataset& ds, const PriorSpec& spec) {
  return spec.family == PriorFamily::GPrior
             ? log_marginal_gprior(gamma, tau, ds, spec.a_sigma, spec.b_sigma)
             : log_marginal_indep(gamma, tau, ds, spec.a_sigma, spec.b_sigma);
}

/// R^2_gamma = 1 - S(gamma)/y'y under the run's prior family.
inline double r_squared(const ModelIndicator& gamma, double tau,
                        const Dataset& ds, PriorFamily family) {
  if (!(ds.yty > 0.0)) throw NumericError("constant response: y'y is zero");
  double s = family == PriorFamily::GPrior
                 ? s_gamma_gprior(gamma, tau, ds)
                 : log_marginal_indep(gamma, tau, ds, 0.0, 0.0).s_gamma;
  return 1.0 - s / ds.yty;
}

/// Ordinary least-squares R^2 (tau-free projection); used by the Laplace
/// machinery and the simulated-example acceptance windows.
inline double ols_r_squared(const ModelIndicator& gamma, const Dataset& ds) {
  if (!(ds.yty > 0.0)) throw NumericError("constant response: y'y is zero");
  return projection_fit(gamma, ds) / ds.yty;
}

}  // namespace ess
