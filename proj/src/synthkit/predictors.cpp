#include "synthkit/predictors.hpp"

#include <cmath>

#include "synthkit/error.hpp"

namespace synthkit {

Predictors Predictors::gather(const Dataset& ds, std::span<const std::size_t> cols) {
  Predictors x;
  x.row_count = ds.rows();
  for (std::size_t c : cols) {
    x.columns.push_back(ds.values(c));
    x.level_counts.push_back(ds.schema()[c].kind.is_numeric() ? 0 : ds.schema()[c].kind.level_count());
    x.names.push_back(ds.schema()[c].name);
  }
  return x;
}

std::vector<double> Predictors::row(std::size_t r) const {
  std::vector<double> out(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j][r];
  return out;
}

DesignLayout::DesignLayout(std::vector<std::size_t> level_counts, std::vector<std::string> names)
    : level_counts_(std::move(level_counts)), names_(std::move(names)) {
  if (names_.size() != level_counts_.size()) names_.resize(level_counts_.size());
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j].empty()) names_[j] = "x" + std::to_string(j);
  }
  width_ = 1;
  for (std::size_t l : level_counts_) width_ += l == 0 ? 1 : l - 1;
}

void DesignLayout::encode(std::span<const double> raw, Eigen::Ref<Eigen::VectorXd> out) const {
  if (raw.size() != level_counts_.size()) {
    fail(ErrorCode::InvalidArgument, "predictor layout mismatch: expected " + std::to_string(level_counts_.size()) +
                                         " values, got " + std::to_string(raw.size()));
  }
  out.setZero();
  out[0] = 1.0;
  Eigen::Index pos = 1;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const std::size_t levels = level_counts_[j];
    if (levels == 0) {
      out[pos++] = raw[j];
      continue;
    }
    const double v = raw[j];
    if (!(v >= 0) || v != std::floor(v) || v >= static_cast<double>(levels)) {
      fail(ErrorCode::InvalidArgument, "predictor layout mismatch: bad level code for '" + names_[j] + "'");
    }
    const auto code = static_cast<std::size_t>(v);
    if (code > 0) out[pos + static_cast<Eigen::Index>(code - 1)] = 1.0;
    pos += static_cast<Eigen::Index>(levels - 1);
  }
}

Eigen::VectorXd DesignLayout::encode(std::span<const double> raw) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(width_));
  encode(raw, out);
  return out;
}

Eigen::MatrixXd DesignLayout::design(const Predictors& x) const {
  if (x.width() != level_counts_.size()) {
    fail(ErrorCode::InvalidArgument, "predictor layout mismatch: wrong predictor count");
  }
  const std::size_t n = x.rows();
  Eigen::MatrixXd d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width_));
  Eigen::VectorXd buf(static_cast<Eigen::Index>(width_));
  std::vector<double> raw(x.width());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < x.width(); ++j) raw[j] = x.columns[j][r];
    encode(raw, buf);
    d.row(static_cast<Eigen::Index>(r)) = buf.transpose();
  }
  return d;
}

std::vector<std::string> DesignLayout::coefficient_names(const std::vector<std::vector<std::string>>& schema_levels) const {
  std::vector<std::string> out{"(Intercept)"};
  for (std::size_t j = 0; j < level_counts_.size(); ++j) {
    if (level_counts_[j] == 0) {
      out.push_back(names_[j]);
      continue;
    }
    for (std::size_t l = 1; l < level_counts_[j]; ++l) {
      const bool labelled = j < schema_levels.size() && l < schema_levels[j].size();
      out.push_back(names_[j] + "=" + (labelled ? schema_levels[j][l] : "#" + std::to_string(l)));
    }
  }
  return out;
}

}  // namespace synthkit
