#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "synthkit/predictors.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

struct LinearModel {
  DesignLayout layout;
  Eigen::VectorXd coefficients;     // intercept first
  Eigen::VectorXd standard_errors;
  Eigen::MatrixXd covariance;       // sigma^2 (X'X)^-1
  double residual_sd = 0.0;
  std::size_t rows = 0;
  bool ridge_fallback = false;      // design was rank deficient; 1e-8 I was added

  double predict(std::span<const double> x_row) const;
};

// Ordinary least squares with classical standard errors.
LinearModel fit_ols(const Predictors& x, std::span<const double> y);

// x'beta plus Normal(0, residual_sd^2) noise.
double draw_linear(const LinearModel& model, std::span<const double> x_row, Rng& rng);

}  // namespace synthkit
