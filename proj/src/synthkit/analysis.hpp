#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthkit/dataset.hpp"

namespace synthkit {

struct ClassifyOptions {
  std::size_t min_leaf = 5;
  // Off: every model is trained on its own data and scored on the full
  // original. On: the original is split, and scoring uses the held-out part.
  bool holdout = false;
  double holdout_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct ClassificationResult {
  std::string label;
  std::vector<double> accuracies;  // per synthetic dataset, scored on the original
  double mean_accuracy = 0.0;
  double baseline_accuracy = 0.0;  // model trained on the original
  double agreement = 0.0;          // share of records both models get right or both get wrong

  double deviation() const { return baseline_accuracy > mean_accuracy ? baseline_accuracy - mean_accuracy
                                                                      : mean_accuracy - baseline_accuracy; }
};

// CART classifiers for `target` using every other column as predictors.
ClassificationResult classify_compare(const Dataset& original, std::span<const Dataset> synthetic,
                                      const std::string& target, const ClassifyOptions& options = {},
                                      const std::string& label = {});

enum class CompareOp { Eq, Le, Ge, Lt, Gt };

struct Condition {
  std::string column;
  CompareOp op = CompareOp::Eq;
  std::string value;  // level label, or a decimal number for numeric columns
};

// Conjunction of conditions; `negated` flips the whole conjunction.
struct Predicate {
  std::string id;
  std::vector<Condition> conditions;
  bool negated = false;

  std::string describe() const;
};

double adhoc_proportion(const Dataset& ds, const Predicate& predicate);

struct AdhocResult {
  std::string id;
  std::string description;
  double original = 0.0;
  std::vector<std::pair<std::string, double>> synthetic;  // label -> mean proportion over the set
  std::vector<double> deviations;                          // |synthetic - original|, same order
};

AdhocResult adhoc_compare(const Dataset& original, std::span<const Dataset> synthetic, const Predicate& predicate,
                          const std::string& label);

// {"analyses": [{"id": "...", "conditions": [{"column": "sex", "op": "eq", "value": "Male"}]}]}
std::vector<Predicate> parse_predicates(const std::string& json_text);
std::vector<Predicate> load_predicates(const std::string& path);

struct CorrelationResult {
  std::string x_name;
  std::string y_name;
  double r = 0.0;
  std::size_t n = 0;
};

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys, const std::string& x_name = "x",
                          const std::string& y_name = "y");

// Synthesizer combination -> metric name -> value.
using MetricTable = std::map<std::string, std::map<std::string, double>>;

struct BatteryResult {
  std::vector<CorrelationResult> results;
  std::vector<std::pair<std::string, std::string>> skipped;  // "x~y", reason
};

std::vector<std::pair<std::string, std::string>> default_correlation_pairs();

BatteryResult correlation_battery(const MetricTable& table,
                                  const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace synthkit
