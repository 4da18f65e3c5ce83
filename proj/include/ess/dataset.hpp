#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ess/csv.hpp"

namespace ess {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Regression data. The samplers require y and the columns of X to be
/// centred; independent priors additionally expect unit-variance columns.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  int n = 0;
  int p = 0;
  bool centered = false;
  bool standardized = false;
  double yty = 0.0;  // (y - ybar)'(y - ybar), cached by center()
};

inline Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X) {
  if (X.rows() != y.size()) {
    std::ostringstream msg;
    msg << "dimension mismatch: response has " << y.size()
        << " rows, design has " << X.rows();
    throw DataError(msg.str());
  }
  Dataset ds;
  ds.n = static_cast<int>(y.size());
  ds.p = static_cast<int>(X.cols());
  if (ds.n < 2) throw DataError("need at least 2 observations");
  if (ds.p < 1) throw DataError("design matrix must have at least 1 column");
  ds.y = std::move(y);
  ds.X = std::move(X);
  return ds;
}

inline Dataset load_dataset(const std::string& response_file,
                            const std::string& design_file) {
  auto yt = csv::read_table(response_file);
  auto xt = csv::read_table(design_file);
  if (yt.front().size() != 1)
    throw DataError(response_file + ": response must be a single column, got " +
                    std::to_string(yt.front().size()));
  Eigen::VectorXd y(yt.size());
  for (std::size_t i = 0; i < yt.size(); ++i) y[static_cast<int>(i)] = yt[i][0];
  Eigen::MatrixXd X(xt.size(), xt.front().size());
  for (std::size_t i = 0; i < xt.size(); ++i)
    for (std::size_t j = 0; j < xt[i].size(); ++j)
      X(static_cast<int>(i), static_cast<int>(j)) = xt[i][j];
  return make_dataset(std::move(y), std::move(X));
}

inline Dataset center(Dataset ds) {
  ds.y.array() -= ds.y.mean();
  for (int j = 0; j < ds.p; ++j) ds.X.col(j).array() -= ds.X.col(j).mean();
  ds.yty = ds.y.squaredNorm();
  ds.centered = true;
  return ds;
}

/// Rescales each column to unit sample standard deviation (divisor n-1).
inline Dataset standardize(Dataset ds) {
  if (!ds.centered) throw DataError("standardize requires a centered dataset");
  for (int j = 0; j < ds.p; ++j) {
    double sd = std::sqrt(ds.X.col(j).squaredNorm() / (ds.n - 1));
    if (sd < 1e-12)
      throw DataError("zero-variance design column " + std::to_string(j + 1));
    ds.X.col(j) /= sd;
  }
  ds.standardized = true;
  return ds;
}

}  // namespace ess
