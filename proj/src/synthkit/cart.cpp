#include "synthkit/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthkit/error.hpp"

namespace synthkit {
namespace {

// Sufficient statistics of the target over a row set.
struct TargetStats {
  std::size_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;
  std::vector<double> counts;  // categorical only
  double count_sumsq = 0.0;    // sum of counts^2, categorical only

  explicit TargetStats(std::size_t levels = 0) : counts(levels, 0.0) {}

  bool categorical() const noexcept { return !counts.empty(); }

  void add(double y) {
    ++n;
    if (categorical()) {
      double& c = counts[static_cast<std::size_t>(y)];
      count_sumsq += 2.0 * c + 1.0;
      c += 1.0;
    } else {
      sum += y;
      sumsq += y * y;
    }
  }

  void remove(double y) {
    --n;
    if (categorical()) {
      double& c = counts[static_cast<std::size_t>(y)];
      count_sumsq -= 2.0 * c - 1.0;
      c -= 1.0;
    } else {
      sum -= y;
      sumsq -= y * y;
    }
  }

  void merge(const TargetStats& o) {
    n += o.n;
    if (categorical()) {
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
      count_sumsq = 0.0;
      for (double c : counts) count_sumsq += c * c;
    } else {
      sum += o.sum;
      sumsq += o.sumsq;
    }
  }

  // Node impurity weighted by size: SSE for numeric, n * Gini for categorical.
  double impurity() const {
    if (n == 0) return 0.0;
    const double dn = static_cast<double>(n);
    if (categorical()) return dn - count_sumsq / dn;
    return std::max(0.0, sumsq - sum * sum / dn);
  }
};

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  std::vector<std::uint8_t> left_levels;
};

class Builder {
 public:
  Builder(const Predictors& x, std::span<const double> y, std::size_t y_levels, const CartOptions& opt)
      : x_(x), y_levels_(y_levels), opt_(opt) {
    // Center a numeric target so the running-sum impurities stay well conditioned.
    y_.assign(y.begin(), y.end());
    if (y_levels_ == 0 && !y_.empty()) {
      const double mean = std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
      for (double& v : y_) v -= mean;
    }
  }

  TargetStats stats_of(const std::vector<std::size_t>& rows) const {
    TargetStats s(y_levels_);
    for (std::size_t r : rows) s.add(y_[r]);
    return s;
  }

  Candidate best_split(const std::vector<std::size_t>& rows, const TargetStats& parent, double min_gain) const {
    Candidate best;
    best.gain = min_gain;
    const double parent_imp = parent.impurity();
    for (std::size_t j = 0; j < x_.width(); ++j) {
      if (x_.level_counts[j] == 0) {
        numeric_split(j, rows, parent, parent_imp, best);
      } else {
        categorical_split(j, rows, parent, parent_imp, best);
      }
    }
    return best;
  }

 private:
  void numeric_split(std::size_t j, const std::vector<std::size_t>& rows, const TargetStats& parent,
                     double parent_imp, Candidate& best) const {
    const auto& col = x_.columns[j];
    std::vector<std::size_t> order(rows);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
    TargetStats left(y_levels_);
    TargetStats right = parent;
    const std::size_t n = order.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double yv = y_[order[i]];
      left.add(yv);
      right.remove(yv);
      const double lo = col[order[i]];
      const double hi = col[order[i + 1]];
      if (!(lo < hi)) continue;
      if (left.n < opt_.min_leaf || right.n < opt_.min_leaf) continue;
      const double gain = parent_imp - left.impurity() - right.impurity();
      if (gain > best.gain) {
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        best.gain = gain;
        best.feature = static_cast<int>(j);
        best.threshold = threshold;
        best.left_levels.clear();
      }
    }
  }

  void categorical_split(std::size_t j, const std::vector<std::size_t>& rows, const TargetStats& parent,
                         double parent_imp, Candidate& best) const {
    const auto& col = x_.columns[j];
    const std::size_t levels = x_.level_counts[j];
    std::vector<TargetStats> per_level(levels, TargetStats(y_levels_));
    for (std::size_t r : rows) per_level[static_cast<std::size_t>(col[r])].add(y_[r]);
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < levels; ++l) {
      if (per_level[l].n > 0) present.push_back(l);
    }
    if (present.size() < 2) return;

    auto consider = [&](const std::vector<std::size_t>& left_set) {
      TargetStats left(y_levels_);
      for (std::size_t l : left_set) left.merge(per_level[l]);
      const std::size_t right_n = parent.n - left.n;
      if (left.n < opt_.min_leaf || right_n < opt_.min_leaf) return;
      TargetStats right(y_levels_);
      for (std::size_t l : present) {
        if (std::find(left_set.begin(), left_set.end(), l) == left_set.end()) right.merge(per_level[l]);
      }
      const double gain = parent_imp - left.impurity() - right.impurity();
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<int>(j);
        best.threshold = 0.0;
        best.left_levels.assign(levels, 0);
        for (std::size_t l : left_set) best.left_levels[l] = 1;
      }
    };

    std::vector<std::size_t> left_set;
    if (present.size() <= opt_.max_exhaustive_levels) {
      // The first present level always goes left, which removes mirrored subsets.
      const std::size_t free_bits = present.size() - 1;
      const std::uint64_t full = (std::uint64_t{1} << free_bits) - 1;
      for (std::uint64_t mask = 0; mask < full; ++mask) {
        left_set.assign(1, present[0]);
        for (std::size_t b = 0; b < free_bits; ++b) {
          if (mask & (std::uint64_t{1} << b)) left_set.push_back(present[b + 1]);
        }
        consider(left_set);
      }
      return;
    }

    // Order levels by target mean (numeric) or by the share of the node's
    // majority class (categorical), then try each prefix.
    std::vector<double> score(levels, 0.0);
    std::size_t majority = 0;
    if (y_levels_ > 0) {
      majority = static_cast<std::size_t>(
          std::max_element(parent.counts.begin(), parent.counts.end()) - parent.counts.begin());
    }
    for (std::size_t l : present) {
      const auto& s = per_level[l];
      score[l] = y_levels_ == 0 ? s.sum / static_cast<double>(s.n) : s.counts[majority] / static_cast<double>(s.n);
    }
    std::vector<std::size_t> ordered(present);
    std::stable_sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    left_set.clear();
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
      left_set.push_back(ordered[i]);
      consider(left_set);
    }
  }

  const Predictors& x_;
  std::vector<double> y_;
  std::size_t y_levels_;
  const CartOptions& opt_;
};

bool goes_left(const CartNode& node, double v) {
  if (node.left_levels.empty()) return v <= node.threshold;
  const auto code = static_cast<std::size_t>(v);
  return code < node.left_levels.size() && node.left_levels[code] != 0;
}

}  // namespace

std::size_t CartTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const CartNode& n) { return n.is_leaf(); }));
}

std::size_t CartTree::leaf_of(std::span<const double> x_row) const {
  if (x_row.size() != level_counts_.size()) {
    fail(ErrorCode::InvalidArgument, "predictor layout mismatch: tree expects " + std::to_string(level_counts_.size()) +
                                         " predictors, got " + std::to_string(x_row.size()));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    const double v = x_row[static_cast<std::size_t>(node.feature)];
    if (!node.left_levels.empty()) {
      if (!(v >= 0) || v != std::floor(v) || v >= static_cast<double>(node.left_levels.size())) {
        fail(ErrorCode::InvalidArgument, "predictor layout mismatch: bad level code");
      }
    }
    i = static_cast<std::size_t>(goes_left(node, v) ? node.left : node.right);
  }
  return i;
}

const std::vector<std::size_t>& CartTree::donors_at(std::span<const double> x_row) const {
  return nodes_[leaf_of(x_row)].donors;
}

CartTree fit_cart(const Predictors& x, std::span<const double> y, std::size_t y_levels, const CartOptions& options) {
  if (options.min_leaf < 1) fail(ErrorCode::InvalidArgument, "min_leaf must be at least 1");
  const std::size_t n = y.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "cannot fit a tree on empty data");
  if (x.width() > 0 && x.rows() != n) fail(ErrorCode::InvalidArgument, "predictor and target row counts differ");
  if (n < options.min_leaf) fail(ErrorCode::InvalidArgument, "fewer rows than min_leaf");
  if (options.max_exhaustive_levels > 62) {
    fail(ErrorCode::InvalidArgument, "exhaustive categorical search is limited to 62 levels");
  }
  if (y_levels > 0) {
    for (double v : y) {
      if (!(v >= 0) || v >= static_cast<double>(y_levels) || v != std::floor(v)) {
        fail(ErrorCode::InvalidArgument, "categorical target holds an invalid level code");
      }
    }
  }

  CartTree tree;
  tree.level_counts_ = x.level_counts;
  tree.min_leaf_ = options.min_leaf;
  tree.training_rows_ = n;

  Builder builder(x, y, y_levels, options);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const TargetStats root = builder.stats_of(all);
  const double min_gain = 1e-10 * root.impurity();

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes_.emplace_back();
  stack.push_back({0, std::move(all)});
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const TargetStats stats = builder.stats_of(job.rows);
    Candidate split;
    if (stats.impurity() > 0.0 && job.rows.size() >= 2 * options.min_leaf) {
      split = builder.best_split(job.rows, stats, min_gain);
    }
    if (split.feature < 0) {
      tree.nodes_[job.node].donors = std::move(job.rows);
      continue;
    }
    CartNode& node = tree.nodes_[job.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left_levels = std::move(split.left_levels);

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    const auto& col = x.columns[static_cast<std::size_t>(split.feature)];
    for (std::size_t r : job.rows) (goes_left(node, col[r]) ? left_rows : right_rows).push_back(r);

    const auto left_id = static_cast<std::int32_t>(tree.nodes_.size());
    node.left = left_id;
    node.right = left_id + 1;
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    // Right first so the left subtree is expanded first (depth-first node order).
    stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right_rows)});
    stack.push_back({static_cast<std::size_t>(left_id), std::move(left_rows)});
  }
  return tree;
}

double draw_leaf(const CartTree& tree, std::span<const double> x_row, std::span<const double> training_y, Rng& rng) {
  if (training_y.size() != tree.training_rows()) {
    fail(ErrorCode::InvalidArgument, "training target does not match the tree's training rows");
  }
  const auto& donors = tree.donors_at(x_row);
  return training_y[donors[uniform_index(rng, donors.size())]];
}

std::int32_t predict_class(const CartTree& tree, std::span<const double> x_row, std::span<const double> training_y,
                           std::size_t y_levels) {
  const auto& donors = tree.donors_at(x_row);
  std::vector<std::size_t> counts(y_levels, 0);
  for (std::size_t d : donors) ++counts[static_cast<std::size_t>(training_y[d])];
  return static_cast<std::int32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace synthkit
