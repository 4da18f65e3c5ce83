#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/likelihood.hpp"
#include "ess/model_indicator.hpp"
#include "ess/rng.hpp"

// Seeded generators for the simulated designs X1, X2, X3 and examples
// Ex1-Ex5 of the evaluation suite, plus a synthetic LD-block design standing
// in for the genotype example (which needs external data).

namespace ess {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Example { Ex1, Ex2, Ex3, Ex4, Ex5, Custom, LDBlocks };

struct SimSpec {
  Example example = Example::Ex1;
  std::uint64_t seed = 0;
  // Custom / LDBlocks fields
  int n = 0;
  int p = 0;
  std::vector<int> gamma_true;      // 0-based
  std::vector<double> beta_true;    // aligned with gamma_true
  double noise_sd = 1.0;
  int block_size = 20;              // LDBlocks
  double block_rho = 0.9;           // LDBlocks within-block AR correlation
};

struct SimResult {
  Dataset ds;  // uncentered
  ModelIndicator gamma_true;
  std::vector<double> beta_true;
  double noise_sd = 0.0;
};

inline Eigen::VectorXd normal_vector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// X_(1)j = X*_j + Z with all entries standard normal; pairwise column
/// correlation 0.5.
inline Eigen::MatrixXd gen_x1(int n, int p, Rng& rng) {
  if (n < 1 || p < 1) throw SimError("gen_x1: n, p must be positive");
  Eigen::VectorXd z = normal_vector(n, rng);
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j) X.col(j) = normal_vector(n, rng) + z;
  return X;
}

/// The 15-column multicollinear block: base columns Z-tilde + 2 Z_j, then the
/// near-duplicate and linear-combination columns with 0.15 Z perturbations.
inline Eigen::MatrixXd gen_x2(int n, Rng& rng) {
  if (n < 2) throw SimError("gen_x2: n must be at least 2");
  Eigen::VectorXd shared = normal_vector(n, rng);
  std::vector<Eigen::VectorXd> z;
  z.reserve(15);
  for (int j = 0; j < 15; ++j) z.push_back(normal_vector(n, rng));
  Eigen::MatrixXd X(n, 15);
  for (int j : {1, 3, 5, 8, 9, 10, 12, 13, 14, 15})
    X.col(j - 1) = shared + 2.0 * z[j - 1];
  X.col(1) = X.col(0) + 0.15 * z[1];                                // col 2
  X.col(3) = X.col(2) + 0.15 * z[3];                                // col 4
  X.col(5) = X.col(4) + 0.15 * z[5];                                // col 6
  X.col(6) = X.col(7) + X.col(8) - X.col(9) + 0.15 * z[6];          // col 7
  X.col(10) =
      X.col(13) + X.col(14) - X.col(11) - X.col(12) + 0.15 * z[10];  // col 11
  return X;
}

/// X3 = [X2 X1*] with X1* an n x 45 instance of the X1 construction.
inline Eigen::MatrixXd gen_x3(int n, Rng& rng) {
  Eigen::MatrixXd X(n, 60);
  X.leftCols(15) = gen_x2(n, rng);
  X.rightCols(45) = gen_x1(n, 45, rng);
  return X;
}

/// Synthetic stand-in for a linkage-disequilibrium design (not from the
/// evaluation suite): AR(block_rho) column correlation within blocks.
inline Eigen::MatrixXd gen_ld_blocks(int n, int p, int block_size, double rho,
                                     Rng& rng) {
  if (n < 1 || p < 1) throw SimError("gen_ld_blocks: n, p must be positive");
  if (block_size < 1 || !(rho > -1.0 && rho < 1.0))
    throw SimError("gen_ld_blocks: invalid block parameters");
  Eigen::MatrixXd X(n, p);
  double resid = std::sqrt(1.0 - rho * rho);
  for (int j = 0; j < p; ++j) {
    if (j % block_size == 0)
      X.col(j) = normal_vector(n, rng);
    else
      X.col(j) = rho * X.col(j - 1) + resid * normal_vector(n, rng);
  }
  return X;
}

namespace detail {

inline Eigen::VectorXd response_from(const Eigen::MatrixXd& X,
                                     const std::vector<int>& gamma,
                                     const std::vector<double>& beta,
                                     double noise_sd, Rng& rng) {
  Eigen::VectorXd y = noise_sd * normal_vector(static_cast<int>(X.rows()), rng);
  for (std::size_t k = 0; k < gamma.size(); ++k)
    y += beta[k] * X.col(gamma[k]);
  return y;
}

inline SimResult pack(Eigen::MatrixXd X, Eigen::VectorXd y,
                      std::vector<int> gamma, std::vector<double> beta,
                      double noise_sd) {
  SimResult r;
  r.ds = make_dataset(std::move(y), std::move(X));
  r.gamma_true =
      ModelIndicator::from_indices(std::move(gamma), r.ds.p);
  r.beta_true = std::move(beta);
  r.noise_sd = noise_sd;
  return r;
}

inline std::vector<int> to_zero_based(std::initializer_list<int> one_based) {
  std::vector<int> v;
  for (int j : one_based) v.push_back(j - 1);
  return v;
}

}  // namespace detail

inline SimResult gen_example(const SimSpec& spec) {
  Rng rng(spec.seed);
  switch (spec.example) {
    case Example::Ex1: {
      Eigen::MatrixXd X = gen_x1(120, 60, rng);
      auto gamma = detail::to_zero_based({21, 37, 46, 53, 54});
      std::vector<double> beta = {2.5, 0.5, -1.0, 1.5, 0.5};
      Eigen::VectorXd y = detail::response_from(X, gamma, beta, 2.0, rng);
      return detail::pack(std::move(X), std::move(y), gamma, beta, 2.0);
    }
    case Example::Ex2: {
      Eigen::MatrixXd X(300, 30);
      X.leftCols(15) = gen_x2(300, rng);
      X.rightCols(15) = gen_x2(300, rng);
      auto gamma = detail::to_zero_based({1, 3, 5, 7, 8, 11, 12, 13});
      std::vector<double> beta = {1.5, 1.5, 1.5, 1.5, -1.5, 1.5, 1.5, 1.5};
      Eigen::VectorXd y = detail::response_from(X, gamma, beta, 2.5, rng);
      return detail::pack(std::move(X), std::move(y), gamma, beta, 2.5);
    }
    case Example::Ex3: {
      Eigen::MatrixXd X = gen_x1(120, 60, rng);
      std::vector<int> gamma;
      std::vector<double> beta;
      for (int j = 15; j < 60; ++j) {
        gamma.push_back(j);
        beta.push_back(static_cast<double>(j / 15));  // blocks of 1, 2, 3
      }
      Eigen::VectorXd y = detail::response_from(X, gamma, beta, 2.0, rng);
      return detail::pack(std::move(X), std::move(y), gamma, beta, 2.0);
    }
    case Example::Ex4: {
      Eigen::MatrixXd X(120, 300);
      for (int b = 0; b < 5; ++b) X.middleCols(60 * b, 60) = gen_x3(120, rng);
      auto gamma = detail::to_zero_based({1, 11, 30, 45, 61, 71, 90, 105, 121,
                                          131, 150, 165, 181, 191, 210, 225});
      std::vector<double> beta = {2,  -1, 1.5, 1,   0.5, 2, -1, 1.5,
                                  1,  0.5, 2,  -1,  -1,  1.5, 1, 0.5};
      Eigen::VectorXd y = detail::response_from(X, gamma, beta, 2.5, rng);
      return detail::pack(std::move(X), std::move(y), gamma, beta, 2.5);
    }
    case Example::Ex5: {
      auto g1 = detail::to_zero_based(
          {701, 730, 745, 763, 790, 805, 825, 850, 865, 887});
      std::vector<double> b1 = {2, -1, 1.5, 1, 0.5, 2, -1, 1.5, 2, -1};
      auto g2 = detail::to_zero_based({1, 38, 63, 98, 125});
      std::vector<double> b2 = {2, -1, 1.5, 1, 0.5};
      const double sd = 0.05;
      ModelIndicator m1 = ModelIndicator::from_indices(g1, 1000);
      ModelIndicator m2 = ModelIndicator::from_indices(g2, 1000);
      // the R^2 window is pinned down by the design draw, not the (tiny)
      // noise, so the whole (X, y) pair is redrawn on rejection
      for (int attempt = 0; attempt < 10000; ++attempt) {
        Eigen::MatrixXd X(200, 1000);
        for (int b = 0; b < 3; ++b)
          X.middleCols(60 * b, 60) = gen_x3(200, rng);
        X.middleCols(180, 520) = gen_x1(200, 520, rng);
        for (int b = 0; b < 5; ++b)
          X.middleCols(700 + 60 * b, 60) = gen_x3(200, rng);
        Eigen::VectorXd y(200);
        for (int i = 0; i < 200; ++i) {
          const auto& g = i < 160 ? g1 : g2;
          const auto& b = i < 160 ? b1 : b2;
          double mu = 0.0;
          for (std::size_t k = 0; k < g.size(); ++k) mu += b[k] * X(i, g[k]);
          y[i] = mu + sd * rng.normal();
        }
        Dataset probe = center(make_dataset(y, X));
        double r1 = ols_r_squared(m1, probe);
        double r2 = ols_r_squared(m2, probe);
        // the quoted acceptance interval is inverted as printed; the
        // feasible reading [r1/10, r1/8] is used
        if (r1 >= 0.6 && r2 >= r1 / 10.0 && r2 <= r1 / 8.0)
          return detail::pack(std::move(X), std::move(y), g1, b1, sd);
      }
      throw SimError(
          "Ex5 acceptance loop exceeded 10000 attempts; try another seed");
    }
    case Example::Custom: {
      if (spec.n < 2 || spec.p < 1)
        throw SimError("custom example needs n >= 2 and p >= 1");
      if (spec.gamma_true.size() != spec.beta_true.size())
        throw SimError("gamma_true and beta_true lengths differ");
      Eigen::MatrixXd X = gen_x1(spec.n, spec.p, rng);
      Eigen::VectorXd y = detail::response_from(X, spec.gamma_true,
                                                spec.beta_true, spec.noise_sd,
                                                rng);
      return detail::pack(std::move(X), std::move(y), spec.gamma_true,
                          spec.beta_true, spec.noise_sd);
    }
    case Example::LDBlocks: {
      if (spec.n < 2 || spec.p < 1)
        throw SimError("LD-block example needs n >= 2 and p >= 1");
      Eigen::MatrixXd X = gen_ld_blocks(spec.n, spec.p, spec.block_size,
                                        spec.block_rho, rng);
      Eigen::VectorXd y = detail::response_from(X, spec.gamma_true,
                                                spec.beta_true, spec.noise_sd,
                                                rng);
      return detail::pack(std::move(X), std::move(y), spec.gamma_true,
                          spec.beta_true, spec.noise_sd);
    }
  }
  throw SimError("unknown example");
}

inline Example parse_example(const std::string& name) {
  if (name == "Ex1") return Example::Ex1;
  if (name == "Ex2") return Example::Ex2;
  if (name == "Ex3") return Example::Ex3;
  if (name == "Ex4") return Example::Ex4;
  if (name == "Ex5") return Example::Ex5;
  if (name == "ldblocks") return Example::LDBlocks;
  throw SimError("unknown example name: " + name);
}

}  // namespace ess
