#include "synthkit/joint_table.hpp"

#include <algorithm>

#include "synthkit/error.hpp"

namespace synthkit {

std::size_t JointTable::count(const Cell& cell) const {
  auto it = cells_.find(cell);
  return it == cells_.end() ? 0 : it->second;
}

const JointTable::Cell& JointTable::draw(Rng& rng) const {
  if (total_ == 0) fail(ErrorCode::InvalidArgument, "cannot draw from an empty joint table");
  const std::size_t u = uniform_index(rng, total_);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return keys_[static_cast<std::size_t>(it - cumulative_.begin())];
}

JointTable fit_joint_table(const Dataset& ds, std::span<const std::size_t> vars) {
  if (vars.empty()) fail(ErrorCode::InvalidArgument, "joint table needs at least one variable");
  for (std::size_t v : vars) {
    if (v >= ds.cols()) fail(ErrorCode::InvalidArgument, "joint table variable out of range");
    if (!ds.schema()[v].kind.is_categorical()) {
      fail(ErrorCode::Schema, "joint table variable '" + ds.schema()[v].name + "' is numeric");
    }
  }
  JointTable table;
  table.variables_.assign(vars.begin(), vars.end());
  JointTable::Cell cell(vars.size());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t i = 0; i < vars.size(); ++i) cell[i] = ds.codes(vars[i])[r];
    ++table.cells_[cell];
  }
  table.total_ = ds.rows();
  std::size_t acc = 0;
  for (const auto& [key, n] : table.cells_) {
    acc += n;
    table.keys_.push_back(key);
    table.cumulative_.push_back(acc);
  }
  return table;
}

}  // namespace synthkit
