#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "ess/csv.hpp"
#include "ess/dataset.hpp"
#include "ess/model_indicator.hpp"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/ess_test_" + name) {
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv split and parse") {
  auto cells = ess::csv::split_line("1,2.5,,x\r");
  REQUIRE(cells.size() == 4);
  CHECK(cells[0] == "1");
  CHECK(cells[2] == "");
  CHECK(cells[3] == "x");
  double v = 0;
  CHECK(ess::csv::parse_double(" 3.25 ", v));
  CHECK(v == 3.25);
  CHECK_FALSE(ess::csv::parse_double("abc", v));
  CHECK_FALSE(ess::csv::parse_double("1.5x", v));
  CHECK_FALSE(ess::csv::parse_double("   ", v));
}

TEST_CASE("csv table with header and error location") {
  TempFile good("good.csv", "a,b\n1,2\n3,4\n");
  auto t = ess::csv::read_table(good.path);
  REQUIRE(t.size() == 2);
  CHECK(t[1][1] == 4.0);

  TempFile bad("bad.csv", "1,2\n3,oops\n");
  try {
    ess::csv::read_table(bad.path);
    FAIL("expected ParseError");
  } catch (const ess::csv::ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);  // row or column located
  }

  TempFile ragged("ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(ess::csv::read_table(ragged.path), ess::csv::ParseError);
  TempFile empty("empty.csv", "");
  CHECK_THROWS_AS(ess::csv::read_table(empty.path), ess::csv::ParseError);
  CHECK_THROWS_AS(ess::csv::read_table("/tmp/ess_no_such_file.csv"),
                  ess::csv::ParseError);
}

TEST_CASE("dataset load, center, standardize") {
  TempFile yf("y.csv", "y\n1\n2\n3\n4\n");
  TempFile xf("x.csv", "x1,x2\n1,1\n2,4\n3,9\n4,16\n");
  ess::Dataset ds = ess::load_dataset(yf.path, xf.path);
  REQUIRE(ds.n == 4);
  REQUIRE(ds.p == 2);
  CHECK_FALSE(ds.centered);

  ds = ess::center(std::move(ds));
  CHECK(ds.centered);
  CHECK(std::abs(ds.y.mean()) < 1e-14);
  CHECK(std::abs(ds.X.col(0).mean()) < 1e-14);
  CHECK(ds.yty == Catch::Approx(5.0));

  ds = ess::standardize(std::move(ds));
  CHECK(ds.standardized);
  for (int j = 0; j < ds.p; ++j)
    CHECK(ds.X.col(j).squaredNorm() / (ds.n - 1) == Catch::Approx(1.0));

  TempFile y2("y2.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(ess::load_dataset(y2.path, xf.path), ess::DataError);
}

TEST_CASE("dataset validation errors") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(ess::make_dataset(y, X), ess::DataError);
  Eigen::MatrixXd Xc = Eigen::MatrixXd::Ones(3, 1);  // constant column
  ess::Dataset ds = ess::center(ess::make_dataset(y, Xc));
  CHECK_THROWS_AS(ess::standardize(std::move(ds)), ess::DataError);
  ess::Dataset raw = ess::make_dataset(y, Eigen::MatrixXd::Random(3, 1));
  CHECK_THROWS_AS(ess::standardize(std::move(raw)), ess::DataError);
}

TEST_CASE("model indicator operations") {
  ess::ModelIndicator g;
  g.add(5);
  g.add(1);
  g.add(5);
  CHECK(g.size() == 2);
  CHECK(g.included == std::vector<int>{1, 5});
  CHECK(g.contains(5));
  g.flip(3);
  CHECK(g.included == std::vector<int>{1, 3, 5});
  g.flip(3);
  g.remove(1);
  CHECK(g.included == std::vector<int>{5});

  auto m = ess::ModelIndicator::from_mask(0b1011, 4);
  CHECK(m.included == std::vector<int>{0, 1, 3});
  CHECK(ess::ModelIndicator::from_indices({3, 0}, 4).included ==
        std::vector<int>{0, 3});
  CHECK_THROWS_AS(ess::ModelIndicator::from_indices({4}, 4),
                  std::out_of_range);
  CHECK_THROWS_AS(ess::ModelIndicator::from_indices({1, 1}, 4),
                  std::invalid_argument);
}
