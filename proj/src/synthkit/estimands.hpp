#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "synthkit/dataset.hpp"

namespace synthkit {

// Point and variance estimates of one estimand across m synthetic datasets.
struct EstimateSet {
  std::string id;
  std::vector<double> q;
  std::vector<double> v;
  std::size_t n = 0;
};

enum class CombiningRule { Tp, Ts };

CombiningRule parse_rule(const std::string& text);

struct CombinedEstimate {
  double q_bar = 0.0;
  double v_bar = 0.0;
  std::optional<double> b;    // between-dataset variance, m >= 2 only
  std::optional<double> t_p;  // v_bar + b / m, m >= 2 only
  double t_s = 0.0;           // (1 + 1/m) v_bar
  CombiningRule rule = CombiningRule::Ts;
  std::size_t m = 0;

  double variance() const { return rule == CombiningRule::Tp ? *t_p : t_s; }
};

CombinedEstimate combine(const EstimateSet& es, CombiningRule rule = CombiningRule::Ts);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double center = 0.0;

  double width() const noexcept { return upper - lower; }
};

// Two-sided standard-normal quantile z_{(1+level)/2}.
double normal_critical_value(double level);

ConfidenceInterval confidence_interval(double center, double variance, double level = 0.95);
ConfidenceInterval confidence_interval(const CombinedEstimate& ce, double level = 0.95);

struct PointEstimate {
  double q = 0.0;
  double v = 0.0;
};

// Sample mean and s^2 / n.
PointEstimate mean_point_estimand(const Dataset& ds, std::size_t col);

enum class Family { Linear, Logistic };

struct FitSpec {
  std::string id;
  Family family = Family::Linear;
  std::string target;
  std::vector<std::string> predictors;
};

struct CoefficientEstimate {
  std::string name;
  double q = 0.0;
  double v = 0.0;
};

// One entry per encoded coefficient (intercept included); v is the squared
// standard error. Logistic coefficients are named "<class>:<coefficient>".
std::vector<CoefficientEstimate> regression_estimands(const Dataset& ds, const FitSpec& fit);

// {"fits": [{"id": "f1", "family": "linear", "target": "y", "predictors": ["x"]}, ...]}
// A bare array of fit objects is accepted too.
std::vector<FitSpec> parse_fitspecs(const std::string& json_text);
std::vector<FitSpec> load_fitspecs(const std::string& path);

}  // namespace synthkit
