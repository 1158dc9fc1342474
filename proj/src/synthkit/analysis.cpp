#include "synthkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "synthkit/cart.hpp"
#include "synthkit/csv.hpp"
#include "synthkit/error.hpp"
#include "synthkit/predictors.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

namespace {

struct Classifier {
  CartTree tree;
  std::vector<double> y;
  std::size_t levels = 0;
  std::vector<std::size_t> predictors;
};

Classifier train(const Dataset& ds, std::size_t target, const ClassifyOptions& options) {
  Classifier c;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    if (j != target) c.predictors.push_back(j);
  }
  c.y = ds.values(target);
  c.levels = ds.schema()[target].kind.level_count();
  c.tree = fit_cart(Predictors::gather(ds, c.predictors), c.y, c.levels, CartOptions{.min_leaf = options.min_leaf});
  return c;
}

std::vector<std::uint8_t> correctness(const Classifier& c, const Dataset& eval, std::size_t target) {
  std::vector<std::uint8_t> ok(eval.rows());
  std::vector<double> row(c.predictors.size());
  const auto truth = eval.codes(target);
  for (std::size_t r = 0; r < eval.rows(); ++r) {
    for (std::size_t j = 0; j < c.predictors.size(); ++j) row[j] = eval.value(c.predictors[j], r);
    ok[r] = predict_class(c.tree, row, c.y, c.levels) == truth[r] ? 1 : 0;
  }
  return ok;
}

double share(const std::vector<std::uint8_t>& v) {
  return static_cast<double>(std::count(v.begin(), v.end(), std::uint8_t{1})) / static_cast<double>(v.size());
}

}  // namespace

ClassificationResult classify_compare(const Dataset& original, std::span<const Dataset> synthetic,
                                      const std::string& target, const ClassifyOptions& options,
                                      const std::string& label) {
  if (synthetic.empty()) fail(ErrorCode::InvalidArgument, "classification needs at least one synthetic dataset");
  const std::size_t t = original.schema().index_of(target);
  if (!original.schema()[t].kind.is_categorical()) {
    fail(ErrorCode::Schema, "classification target '" + target + "' is not categorical");
  }
  for (const auto& s : synthetic) {
    if (!(s.schema() == original.schema())) fail(ErrorCode::Schema, "synthetic dataset schema differs from the original");
  }

  Dataset train_set = original;
  Dataset eval_set = original;
  if (options.holdout) {
    if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0)) {
      fail(ErrorCode::InvalidArgument, "holdout fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> rows(original.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(derive_seed(options.seed, 0, hash_string("holdout")));
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_eval = static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(rows.size())));
    std::vector<std::size_t> eval_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_eval));
    std::vector<std::size_t> train_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_eval), rows.end());
    std::sort(eval_rows.begin(), eval_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    eval_set = select_rows(original, eval_rows);
    train_set = select_rows(original, train_rows);
  }

  ClassificationResult result;
  result.label = label;
  const auto baseline = correctness(train(train_set, t, options), eval_set, t);
  result.baseline_accuracy = share(baseline);
  for (const auto& s : synthetic) {
    const auto ok = correctness(train(s, t, options), eval_set, t);
    result.accuracies.push_back(share(ok));
    std::size_t same = 0;
    for (std::size_t r = 0; r < ok.size(); ++r) same += ok[r] == baseline[r] ? 1 : 0;
    result.agreement += static_cast<double>(same) / static_cast<double>(ok.size());
  }
  const double m = static_cast<double>(synthetic.size());
  result.mean_accuracy = std::accumulate(result.accuracies.begin(), result.accuracies.end(), 0.0) / m;
  result.agreement /= m;
  return result;
}

namespace {

const char* op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
  }
  return "?";
}

CompareOp parse_op(const std::string& s) {
  if (s == "eq") return CompareOp::Eq;
  if (s == "le") return CompareOp::Le;
  if (s == "ge") return CompareOp::Ge;
  if (s == "lt") return CompareOp::Lt;
  if (s == "gt") return CompareOp::Gt;
  fail(ErrorCode::Config, "unknown comparison operator '" + s + "'");
}

bool compare(double a, CompareOp op, double b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Ge: return a >= b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Gt: return a > b;
  }
  return false;
}

}  // namespace

std::string Predicate::describe() const {
  std::string s;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (i) s += " & ";
    s += conditions[i].column + " " + op_text(conditions[i].op) + " " + conditions[i].value;
  }
  if (s.empty()) s = "TRUE";
  return negated ? "!(" + s + ")" : s;
}

double adhoc_proportion(const Dataset& ds, const Predicate& predicate) {
  struct Bound {
    std::size_t col;
    bool numeric;
    CompareOp op;
    double value;
  };
  std::vector<Bound> bounds;
  for (const auto& c : predicate.conditions) {
    const std::size_t col = ds.schema().index_of(c.column);
    const auto& kind = ds.schema()[col].kind;
    if (kind.is_numeric()) {
      double v = 0;
      if (!csv::parse_double(c.value, v)) {
        fail(ErrorCode::InvalidArgument, "condition on '" + c.column + "' needs a numeric value, got '" + c.value + "'");
      }
      bounds.push_back({col, true, c.op, v});
    } else {
      if (c.op != CompareOp::Eq) {
        fail(ErrorCode::InvalidArgument, "categorical column '" + c.column + "' only supports eq");
      }
      auto code = kind.code_of(c.value);
      if (!code) fail(ErrorCode::InvalidArgument, "unknown level '" + c.value + "' of column '" + c.column + "'");
      bounds.push_back({col, false, c.op, static_cast<double>(*code)});
    }
  }
  if (ds.rows() == 0) fail(ErrorCode::InvalidArgument, "proportion of an empty dataset");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    bool all = true;
    for (const auto& b : bounds) {
      if (!compare(ds.value(b.col, r), b.op, b.value)) {
        all = false;
        break;
      }
    }
    if (all != predicate.negated) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.rows());
}

AdhocResult adhoc_compare(const Dataset& original, std::span<const Dataset> synthetic, const Predicate& predicate,
                          const std::string& label) {
  if (synthetic.empty()) fail(ErrorCode::InvalidArgument, "ad-hoc comparison needs synthetic data");
  AdhocResult res;
  res.id = predicate.id;
  res.description = predicate.describe();
  res.original = adhoc_proportion(original, predicate);
  double mean = 0.0;
  for (const auto& s : synthetic) mean += adhoc_proportion(s, predicate);
  mean /= static_cast<double>(synthetic.size());
  res.synthetic.emplace_back(label, mean);
  res.deviations.push_back(std::abs(mean - res.original));
  return res;
}

std::vector<Predicate> parse_predicates(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("ad-hoc analyses: ") + e.what());
  }
  const nlohmann::json& list = doc.is_object() ? doc.at("analyses") : doc;
  if (!list.is_array()) fail(ErrorCode::Config, "ad-hoc analyses must be an array");
  std::vector<Predicate> out;
  for (const auto& e : list) {
    Predicate p;
    p.id = e.value("id", "");
    if (p.id.empty()) fail(ErrorCode::Config, "every ad-hoc analysis needs an id");
    p.negated = e.value("negated", false);
    for (const auto& c : e.value("conditions", nlohmann::json::array())) {
      Condition cond;
      cond.column = c.at("column").get<std::string>();
      cond.op = parse_op(c.value("op", "eq"));
      const auto& v = c.at("value");
      cond.value = v.is_string() ? v.get<std::string>() : csv::format_double(v.get<double>());
      p.conditions.push_back(std::move(cond));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Predicate> load_predicates(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open ad-hoc analyses '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_predicates(ss.str());
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys, const std::string& x_name,
                          const std::string& y_name) {
  if (xs.size() != ys.size()) fail(ErrorCode::InvalidArgument, "pearson: series lengths differ");
  const std::size_t n = xs.size();
  if (n < 3) fail(ErrorCode::InvalidArgument, "pearson: needs at least 3 pairs");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::InvalidArgument, "pearson: constant series");
  const double r = sxy / std::sqrt(sxx * syy);
  return CorrelationResult{x_name, y_name, std::clamp(r, -1.0, 1.0), n};
}

std::vector<std::pair<std::string, std::string>> default_correlation_pairs() {
  return {
      {"avg_cio", "class_dev"},
      {"apo90", "class_dev"},
      {"avg_cio", "kl_norm_avg"},
      {"avg_cio", "apo90"},
      {"avg_cio", "adhoc_dev_avg"},
      {"apo90", "adhoc_dev_avg"},
  };
}

BatteryResult correlation_battery(const MetricTable& table,
                                  const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (table.size() < 3) {
    fail(ErrorCode::InvalidArgument, "correlation battery needs at least 3 synthesizer combinations, got " +
                                         std::to_string(table.size()));
  }
  BatteryResult out;
  for (const auto& [xn, yn] : pairs) {
    const std::string key = xn + "~" + yn;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [combo, metrics] : table) {
      auto xi = metrics.find(xn);
      auto yi = metrics.find(yn);
      if (xi == metrics.end() || yi == metrics.end()) continue;
      if (!std::isfinite(xi->second) || !std::isfinite(yi->second)) continue;
      xs.push_back(xi->second);
      ys.push_back(yi->second);
    }
    if (xs.size() < 3) {
      out.skipped.emplace_back(key, "fewer than 3 aligned combinations");
      continue;
    }
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
    };
    if (constant(xs) || constant(ys)) {
      out.skipped.emplace_back(key, std::string("constant series: ") + (constant(xs) ? xn : yn));
      continue;
    }
    out.results.push_back(pearson(xs, ys, xn, yn));
  }
  return out;
}

}  // namespace synthkit
