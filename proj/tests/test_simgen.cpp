#include <catch2/catch_amalgamated.hpp>

#include "ess/likelihood.hpp"
#include "ess/simgen.hpp"

namespace {

double col_corr(const Eigen::MatrixXd& X, int a, int b) {
  Eigen::VectorXd xa = X.col(a).array() - X.col(a).mean();
  Eigen::VectorXd xb = X.col(b).array() - X.col(b).mean();
  return xa.dot(xb) / (xa.norm() * xb.norm());
}

}  // namespace

TEST_CASE("x1 pairwise correlation near 0.5") {
  ess::Rng rng(1);
  Eigen::MatrixXd X = ess::gen_x1(5000, 10, rng);
  double sum = 0.0;
  int cnt = 0;
  for (int a = 0; a < 10; ++a)
    for (int b = a + 1; b < 10; ++b) {
      sum += col_corr(X, a, b);
      ++cnt;
    }
  CHECK(sum / cnt == Catch::Approx(0.5).margin(0.03));
}

TEST_CASE("x2 collinearity structure") {
  ess::Rng rng(2);
  const int n = 4000;
  Eigen::MatrixXd X = ess::gen_x2(n, rng);
  REQUIRE(X.cols() == 15);
  // near-duplicate pairs
  CHECK(col_corr(X, 0, 1) > 0.99);
  CHECK(col_corr(X, 2, 3) > 0.99);
  CHECK(col_corr(X, 4, 5) > 0.99);
  // column 7 (1-based) is col8 + col9 - col10 + 0.15 Z
  Eigen::VectorXd resid = X.col(6) - (X.col(7) + X.col(8) - X.col(9));
  double sd = std::sqrt(resid.squaredNorm() / (n - 1));
  CHECK(sd == Catch::Approx(0.15).margin(0.01));
  // column 11 (1-based) is col14 + col15 - col12 - col13 + 0.15 Z
  Eigen::VectorXd resid2 =
      X.col(10) - (X.col(13) + X.col(14) - X.col(11) - X.col(12));
  CHECK(std::sqrt(resid2.squaredNorm() / (n - 1)) ==
        Catch::Approx(0.15).margin(0.01));
  // base columns share a common factor: strongly correlated neighbours
  CHECK(col_corr(X, 7, 8) > 0.1);
}

TEST_CASE("x3 and ld blocks dimensions") {
  ess::Rng rng(3);
  Eigen::MatrixXd X3 = ess::gen_x3(50, rng);
  CHECK(X3.rows() == 50);
  CHECK(X3.cols() == 60);
  Eigen::MatrixXd L = ess::gen_ld_blocks(500, 40, 10, 0.9, rng);
  CHECK(L.cols() == 40);
  // within-block neighbours are correlated, block boundaries are not
  CHECK(col_corr(L, 0, 1) > 0.7);
  CHECK(std::abs(col_corr(L, 9, 10)) < 0.2);
  CHECK_THROWS_AS(ess::gen_ld_blocks(10, 5, 0, 0.9, rng), ess::SimError);
}

TEST_CASE("example dimensions and determinism") {
  struct Want {
    ess::Example ex;
    int n, p, k;
  };
  const Want wants[] = {{ess::Example::Ex1, 120, 60, 5},
                        {ess::Example::Ex2, 300, 30, 8},
                        {ess::Example::Ex3, 120, 60, 45},
                        {ess::Example::Ex4, 120, 300, 16}};
  for (const Want& w : wants) {
    ess::SimSpec spec;
    spec.example = w.ex;
    spec.seed = 42;
    ess::SimResult r = ess::gen_example(spec);
    CHECK(r.ds.n == w.n);
    CHECK(r.ds.p == w.p);
    CHECK(r.gamma_true.size() == w.k);
    ess::SimResult r2 = ess::gen_example(spec);
    CHECK((r.ds.y.array() == r2.ds.y.array()).all());
    CHECK((r.ds.X.array() == r2.ds.X.array()).all());
    spec.seed = 43;
    ess::SimResult r3 = ess::gen_example(spec);
    CHECK_FALSE((r.ds.y.array() == r3.ds.y.array()).all());
  }
}

TEST_CASE("ex1 truth") {
  ess::SimSpec spec;
  spec.example = ess::Example::Ex1;
  spec.seed = 7;
  ess::SimResult r = ess::gen_example(spec);
  CHECK(r.gamma_true.included == std::vector<int>{20, 36, 45, 52, 53});
  CHECK(r.noise_sd == 2.0);
  // the true model should explain most of the variance
  ess::Dataset ds = ess::center(r.ds);
  CHECK(ess::ols_r_squared(r.gamma_true, ds) > 0.5);
}

TEST_CASE("ex5 satisfies its acceptance window") {
  ess::SimSpec spec;
  spec.example = ess::Example::Ex5;
  spec.seed = 1;
  ess::SimResult r = ess::gen_example(spec);
  CHECK(r.ds.n == 200);
  CHECK(r.ds.p == 1000);
  ess::Dataset ds = ess::center(r.ds);
  auto m1 = ess::ModelIndicator::from_indices(
      {700, 729, 744, 762, 789, 804, 824, 849, 864, 886}, 1000);
  auto m2 = ess::ModelIndicator::from_indices({0, 37, 62, 97, 124}, 1000);
  double r1 = ess::ols_r_squared(m1, ds);
  double r2 = ess::ols_r_squared(m2, ds);
  CHECK(r1 >= 0.6 - 1e-9);
  CHECK(r2 >= r1 / 10.0 - 1e-9);
  CHECK(r2 <= r1 / 8.0 + 1e-9);
  CHECK(r.gamma_true == m1);
}

TEST_CASE("custom example validation") {
  ess::SimSpec spec;
  spec.example = ess::Example::Custom;
  spec.n = 1;
  spec.p = 2;
  CHECK_THROWS_AS(ess::gen_example(spec), ess::SimError);
  spec.n = 50;
  spec.gamma_true = {0};
  spec.beta_true = {1.0, 2.0};
  CHECK_THROWS_AS(ess::gen_example(spec), ess::SimError);
  spec.beta_true = {1.0};
  ess::SimResult r = ess::gen_example(spec);
  CHECK(r.ds.n == 50);
  CHECK(ess::parse_example("Ex2") == ess::Example::Ex2);
  CHECK_THROWS_AS(ess::parse_example("Ex9"), ess::SimError);
}
