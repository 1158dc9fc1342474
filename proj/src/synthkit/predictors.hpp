#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthkit/dataset.hpp"

namespace synthkit {

// Raw predictor values, column-major. Categorical predictors hold level codes
// as exact doubles; level_counts[j] == 0 marks a numeric predictor.
struct Predictors {
  std::vector<std::vector<double>> columns;
  std::vector<std::size_t> level_counts;
  std::vector<std::string> names;

  std::size_t width() const noexcept { return columns.size(); }
  std::size_t rows() const noexcept { return columns.empty() ? row_count : columns.front().size(); }

  // Only meaningful when there are no predictor columns.
  std::size_t row_count = 0;

  static Predictors gather(const Dataset& ds, std::span<const std::size_t> cols);
  std::vector<double> row(std::size_t r) const;
};

// Design-matrix encoding: intercept, numeric predictors as-is, categorical
// predictors one-hot with the first level dropped.
class DesignLayout {
 public:
  DesignLayout() = default;
  DesignLayout(std::vector<std::size_t> level_counts, std::vector<std::string> names);
  static DesignLayout of(const Predictors& x) { return DesignLayout(x.level_counts, x.names); }

  std::size_t raw_width() const noexcept { return level_counts_.size(); }
  std::size_t encoded_width() const noexcept { return width_; }

  // Throws on a layout mismatch (wrong length or out-of-range level code).
  void encode(std::span<const double> raw, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd encode(std::span<const double> raw) const;
  Eigen::MatrixXd design(const Predictors& x) const;

  // "(Intercept)", "x", "c=level" ... Categorical labels come from `schema_levels`
  // when given, otherwise "c=#k".
  std::vector<std::string> coefficient_names(const std::vector<std::vector<std::string>>& schema_levels = {}) const;

 private:
  std::vector<std::size_t> level_counts_;
  std::vector<std::string> names_;
  std::size_t width_ = 1;
};

}  // namespace synthkit
