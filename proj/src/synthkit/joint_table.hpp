#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "synthkit/dataset.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

// Saturated model over categorical columns: the observed cross-tabulation.
class JointTable {
 public:
  using Cell = std::vector<std::int32_t>;

  const std::vector<std::size_t>& variables() const noexcept { return variables_; }
  const std::map<Cell, std::size_t>& cells() const noexcept { return cells_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t count(const Cell& cell) const;

  // Draws a level tuple with probability count / total.
  const Cell& draw(Rng& rng) const;

 private:
  friend JointTable fit_joint_table(const Dataset&, std::span<const std::size_t>);

  std::vector<std::size_t> variables_;
  std::map<Cell, std::size_t> cells_;
  std::size_t total_ = 0;
  std::vector<Cell> keys_;
  std::vector<std::size_t> cumulative_;
};

JointTable fit_joint_table(const Dataset& ds, std::span<const std::size_t> vars);

}  // namespace synthkit
