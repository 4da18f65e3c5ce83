#include <catch2/catch_amalgamated.hpp>

#include "ess/laplace.hpp"
#include "ess/priors.hpp"
#include "ess/rng.hpp"
#include "support.hpp"

using ess::ModelIndicator;
using ess::PriorSpec;

TEST_CASE("beta-binomial elicitation recovers the moments") {
  const int p = 100;
  bool limit = true;
  auto [a, b] = ess::elicit_omega_hyperparams(5.0, 20.0, p, &limit);
  CHECK_FALSE(limit);
  // forward moments
  double mean = p * a / (a + b);
  double var = p * a * b * (a + b + p) / ((a + b) * (a + b) * (a + b + 1.0));
  CHECK(mean == Catch::Approx(5.0));
  CHECK(var == Catch::Approx(20.0));
}

TEST_CASE("elicitation edge cases") {
  const int p = 100;
  double mu = 0.05;
  double v_binomial = p * mu * (1.0 - mu);
  double v_max = p * p * mu * (1.0 - mu);
  bool limit = false;
  auto [a, b] = ess::elicit_omega_hyperparams(5.0, v_binomial, p, &limit);
  CHECK(limit);
  CHECK(a + b == Catch::Approx(1e6));
  CHECK_THROWS_AS(ess::elicit_omega_hyperparams(5.0, v_binomial / 2.0, p),
                  ess::PriorError);
  CHECK_THROWS_AS(ess::elicit_omega_hyperparams(5.0, v_max, p),
                  ess::PriorError);
  CHECK_THROWS_AS(ess::elicit_omega_hyperparams(0.0, 1.0, p),
                  ess::PriorError);
  CHECK_THROWS_AS(ess::elicit_omega_hyperparams(100.0, 1.0, p),
                  ess::PriorError);
}

TEST_CASE("model prior normalizes over the model space") {
  PriorSpec spec;
  spec.a_omega = 1.7;
  spec.b_omega = 4.2;
  const int p = 12;
  double total = 0.0;
  // sum over sizes with binomial multiplicities
  for (int k = 0; k <= p; ++k) {
    double log_choose = std::lgamma(p + 1.0) - std::lgamma(k + 1.0) -
                        std::lgamma(p - k + 1.0);
    total += std::exp(log_choose + ess::log_model_prior(k, spec, p));
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(ess::log_model_prior(-1, spec, p), ess::PriorError);
  CHECK_THROWS_AS(ess::log_model_prior(p + 1, spec, p), ess::PriorError);
}

TEST_CASE("theta_one is the prior conditional inclusion probability") {
  PriorSpec spec;
  spec.a_omega = 2.5;
  spec.b_omega = 7.0;
  const int p = 9;
  // p(gamma with j in) / [p(in) + p(out)] at fixed remaining size k-1
  for (int k = 1; k <= p; ++k) {
    double lp1 = ess::log_model_prior(k, spec, p);
    double lp0 = ess::log_model_prior(k - 1, spec, p);
    double want = 1.0 / (1.0 + std::exp(lp0 - lp1));
    CHECK(ess::theta_one(k, p, spec) == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("tau hyperpriors") {
  PriorSpec zs;
  zs.tau_mode = ess::TauMode::ZellnerSiow;
  zs.a_tau = 0.5;
  zs.b_tau = 15.0;
  CHECK(ess::log_tau_prior(2.0, zs) ==
        Catch::Approx(-1.5 * std::log(2.0) - 7.5));
  CHECK_THROWS_AS(ess::log_tau_prior(0.0, zs), ess::PriorError);

  PriorSpec hg;
  hg.tau_mode = ess::TauMode::HyperG;
  hg.c_tau = 1.5;
  CHECK(ess::log_tau_prior(0.0, hg) == 0.0);
  CHECK(ess::log_tau_prior(3.0, hg) ==
        Catch::Approx(-1.5 * std::log(4.0)));
  CHECK_THROWS_AS(ess::log_tau_prior(-0.1, hg), ess::PriorError);

  PriorSpec fixed;
  CHECK_THROWS_AS(ess::log_tau_prior(1.0, fixed), ess::PriorError);
}

TEST_CASE("Zellner-Siow mode solves the stationarity condition") {
  // 100 random instances: cubic root vs golden-section maximization of the
  // lambda-space integrand, relative tolerance 1e-6
  ess::Rng rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    int n = 20 + rng.below(60);
    int p = 4 + rng.below(8);
    ess::Dataset ds = support::random_instance(n, p, rng);
    ModelIndicator g;
    for (int j = 0; j < p && g.size() + 2 < n; ++j)
      if (rng.uniform() < 0.4) g.add(j);
    PriorSpec spec;
    spec.tau_mode = ess::TauMode::ZellnerSiow;
    spec.a_tau = 0.5;
    spec.b_tau = n / 2.0;
    double mode = ess::laplace_mode_zs(g, ds, spec);
    ess::LaplaceCoeffs c = ess::laplace_coeffs(g, ds, spec);
    double lam = support::golden_section_maximize(
        [&](double x) { return ess::log_integrand_zs(x, c, spec); },
        std::log(mode) - 8.0, std::log(mode) + 8.0, 1e-13);
    CHECK(std::abs(mode - std::exp(lam)) <= 1e-6 * std::exp(lam));
    // stationarity of the integrand at the reported mode
    double h = 1e-6;
    double d = (ess::log_integrand_zs(std::log(mode) + h, c, spec) -
                ess::log_integrand_zs(std::log(mode) - h, c, spec)) /
               (2.0 * h);
    CHECK(std::abs(d) < 1e-5);
  }
}

TEST_CASE("hyper-g mode matches the quadratic-root oracle") {
  ess::Rng rng(103);
  for (int rep = 0; rep < 100; ++rep) {
    int n = 25 + rng.below(50);
    int p = 4 + rng.below(6);
    ess::Dataset ds = support::random_instance(n, p, rng);
    ModelIndicator g;
    for (int j = 0; j < p; ++j)
      if (rng.uniform() < 0.4) g.add(j);
    PriorSpec spec;
    spec.tau_mode = ess::TauMode::HyperG;
    spec.c_tau = 1.0;
    double mode = ess::laplace_mode_hyperg(g, ds, spec);
    // oracle: tau-space stationarity c1*(c3+c4 tau) = c2 c4 (1+tau),
    // i.e. the root of the linear equation, clamped at 0
    ess::LaplaceCoeffs c = ess::laplace_coeffs(g, ds, spec);
    double c1s = c.c1 - spec.c_tau;
    double want =
        std::max((c.c2 * c.c4 - c1s * c.c3) / ((c1s - c.c2) * c.c4), 0.0);
    CHECK(std::abs(mode - want) <= 1e-9 * std::max(1.0, want));
    if (want > 0.0) {
      // the derivative of c1* log(1+t) - c2 log(c3+c4 t) vanishes there
      double d = c1s / (1.0 + mode) - c.c2 * c.c4 / (c.c3 + c.c4 * mode);
      CHECK(std::abs(d) < 1e-9);
    }
  }
}

TEST_CASE("Laplace approximation tracks quadrature") {
  // n = 20 signal-bearing instances; the Laplace value should be within 0.05
  // of the true log integral computed by adaptive quadrature in lambda space.
  // (On null models the integrand is skewed enough that the approximation
  // error exceeds this band; the approximation targets supported models.)
  for (int seed = 1; seed <= 25; ++seed) {
    ess::Rng rng(seed);
    Eigen::MatrixXd X(20, 6);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 6; ++j) X(i, j) = rng.normal();
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i)
      y[i] = 3.0 * X(i, 0) + 2.5 * X(i, 1) - 3.0 * X(i, 2) + rng.normal();
    ess::Dataset ds = ess::center(ess::make_dataset(std::move(y),
                                                    std::move(X)));
    ModelIndicator g = ModelIndicator::from_indices({0, 1, 2}, 6);
    for (int which = 0; which < 2; ++which) {
      PriorSpec spec;
      if (which == 0) {
        spec.tau_mode = ess::TauMode::ZellnerSiow;
        spec.a_tau = 0.5;
        spec.b_tau = 10.0;
      } else {
        spec.tau_mode = ess::TauMode::HyperG;
        spec.c_tau = 1.5;
      }
      ess::LaplaceCoeffs c = ess::laplace_coeffs(g, ds, spec);
      auto log_f = [&](double lam) {
        return which == 0 ? ess::log_integrand_zs(lam, c, spec)
                          : ess::log_integrand_hyperg(lam, c, spec);
      };
      double truth = support::log_integrate(log_f, -30.0, 40.0, 1e-12);
      double approx = ess::laplace_log_marginal(g, ds, spec);
      CHECK(std::abs(approx - truth) < 0.05);
    }
  }
}

TEST_CASE("Laplace preconditions") {
  ess::Rng rng(109);
  ess::Dataset wide = support::random_instance(4, 6, rng);
  ModelIndicator big = ModelIndicator::from_mask(0b1111, 6);
  PriorSpec spec;
  spec.tau_mode = ess::TauMode::ZellnerSiow;
  CHECK_THROWS_AS(ess::laplace_mode_zs(big, wide, spec), ess::PriorError);
  PriorSpec fixed;
  ess::Dataset ds = support::random_instance(20, 4, rng);
  ModelIndicator g = ModelIndicator::from_mask(0b11, 4);
  CHECK_THROWS_AS(ess::laplace_log_marginal(g, ds, fixed), ess::PriorError);
}
