#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "synthkit/predictors.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

struct LogisticOptions {
  std::size_t max_iter = 50;
  double tol = 1e-8;
  // Per-coefficient absolute bound; reaching it marks the fit as separated.
  double coefficient_cap = 30.0;
};

// Multinomial logit with the first observed class as reference (its linear
// predictor is fixed at zero). Only classes present in the training target are
// modelled; the rest get probability zero.
struct LogisticModel {
  DesignLayout layout;
  std::vector<std::int32_t> classes;  // level codes, classes[0] is the reference
  std::size_t level_count = 0;
  Eigen::MatrixXd coefficients;       // (classes - 1) x encoded width
  Eigen::MatrixXd standard_errors;    // same shape
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool separation = false;

  // Probabilities over all `level_count` levels.
  std::vector<double> probabilities(std::span<const double> x_row) const;
};

// Softmax log-likelihood and its derivatives in the flattened parameter
// vector theta[(k - 1) * p + j] for non-reference class k.
class LogisticObjective {
 public:
  LogisticObjective(const Predictors& x, std::span<const std::int32_t> y, std::vector<std::int32_t> classes);

  std::size_t parameter_count() const noexcept { return (classes_.size() - 1) * width(); }
  std::size_t width() const noexcept { return static_cast<std::size_t>(design_.cols()); }

  double log_likelihood(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  // Observed information (negative Hessian).
  Eigen::MatrixXd information(const Eigen::VectorXd& theta) const;

 private:
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const;  // n x (K - 1)

  Eigen::MatrixXd design_;
  std::vector<std::size_t> label_;  // class position per row
  std::vector<std::int32_t> classes_;
};

LogisticModel fit_logistic(const Predictors& x, std::span<const std::int32_t> y, std::size_t level_count,
                           const LogisticOptions& options = {});

// Draws an index from a probability vector. A total within 1e-9 of one is
// renormalised; anything further off is rejected.
std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng);

std::int32_t draw_class(const LogisticModel& model, std::span<const double> x_row, Rng& rng);

}  // namespace synthkit
