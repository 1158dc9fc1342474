#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "synthkit/predictors.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

struct CartOptions {
  std::size_t min_leaf = 5;
  // Categorical predictors with at most this many levels present in a node get
  // an exhaustive subset search; wider ones are split along an ordering.
  std::size_t max_exhaustive_levels = 10;
};

struct CartNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;                  // numeric split: x <= threshold goes left
  std::vector<std::uint8_t> left_levels;   // categorical split: level -> goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::size_t> donors;         // leaf only: training row indices

  bool is_leaf() const noexcept { return feature < 0; }
};

class CartTree {
 public:
  const std::vector<CartNode>& nodes() const noexcept { return nodes_; }
  std::size_t min_leaf() const noexcept { return min_leaf_; }
  std::size_t training_rows() const noexcept { return training_rows_; }
  std::size_t predictor_count() const noexcept { return level_counts_.size(); }
  std::size_t leaf_count() const;

  // Index of the leaf node reached by `x_row`. Categorical levels not seen at a
  // node during training follow the right branch.
  std::size_t leaf_of(std::span<const double> x_row) const;
  const std::vector<std::size_t>& donors_at(std::span<const double> x_row) const;

 private:
  friend CartTree fit_cart(const Predictors&, std::span<const double>, std::size_t, const CartOptions&);

  std::vector<CartNode> nodes_;
  std::vector<std::size_t> level_counts_;
  std::size_t min_leaf_ = 5;
  std::size_t training_rows_ = 0;
};

// Greedy binary partitioning. `y_levels == 0` means a numeric target (split on
// squared-error reduction); otherwise y holds level codes and splits minimise
// Gini impurity.
CartTree fit_cart(const Predictors& x, std::span<const double> y, std::size_t y_levels,
                  const CartOptions& options = {});

// Routes x_row to its leaf and returns a uniformly drawn donor's training value.
double draw_leaf(const CartTree& tree, std::span<const double> x_row, std::span<const double> training_y, Rng& rng);

// Majority class of the leaf; ties go to the lowest code.
std::int32_t predict_class(const CartTree& tree, std::span<const double> x_row, std::span<const double> training_y,
                           std::size_t y_levels);

}  // namespace synthkit
