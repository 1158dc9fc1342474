#include "synthkit/estimands.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "synthkit/error.hpp"
#include "synthkit/linear.hpp"
#include "synthkit/logistic.hpp"
#include "synthkit/predictors.hpp"

namespace synthkit {

CombiningRule parse_rule(const std::string& text) {
  if (text == "Ts" || text == "ts" || text == "raab") return CombiningRule::Ts;
  if (text == "Tp" || text == "tp") return CombiningRule::Tp;
  fail(ErrorCode::InvalidArgument, "unknown combining rule '" + text + "'");
}

CombinedEstimate combine(const EstimateSet& es, CombiningRule rule) {
  const std::size_t m = es.q.size();
  if (m == 0) fail(ErrorCode::InvalidArgument, "estimate set '" + es.id + "' is empty");
  if (es.v.size() != m) fail(ErrorCode::InvalidArgument, "estimate set '" + es.id + "': q and v lengths differ");
  for (double v : es.v) {
    if (!(v >= 0.0)) fail(ErrorCode::InvalidArgument, "estimate set '" + es.id + "': negative variance");
  }
  if (rule == CombiningRule::Tp && m < 2) {
    fail(ErrorCode::InvalidArgument, "the Tp rule needs at least two synthetic datasets");
  }
  const double dm = static_cast<double>(m);
  CombinedEstimate ce;
  ce.m = m;
  ce.rule = rule;
  // Work in offsets from q_1 so that equal estimates give exactly b = 0.
  const double q0 = es.q[0];
  double shift = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    shift += es.q[i] - q0;
    ce.v_bar += es.v[i];
  }
  shift /= dm;
  ce.q_bar = q0 + shift;
  ce.v_bar /= dm;
  if (m >= 2) {
    double ss = 0.0;
    for (double q : es.q) ss += (q - q0 - shift) * (q - q0 - shift);
    ce.b = ss / (dm - 1.0);
    ce.t_p = ce.v_bar + *ce.b / dm;
  }
  ce.t_s = (1.0 + 1.0 / dm) * ce.v_bar;
  return ce;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorCode::InvalidArgument, "confidence level must lie strictly between 0 and 1");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), (1.0 + level) / 2.0);
}

ConfidenceInterval confidence_interval(double center, double variance, double level) {
  const double z = normal_critical_value(level);
  if (!(variance >= 0.0)) fail(ErrorCode::InvalidArgument, "variance must be non-negative");
  const double half = z * std::sqrt(variance);
  return ConfidenceInterval{center - half, center + half, level, center};
}

ConfidenceInterval confidence_interval(const CombinedEstimate& ce, double level) {
  if (ce.rule == CombiningRule::Tp && !ce.t_p) fail(ErrorCode::InvalidArgument, "Tp undefined for m = 1");
  return confidence_interval(ce.q_bar, ce.variance(), level);
}

PointEstimate mean_point_estimand(const Dataset& ds, std::size_t col) {
  const auto x = ds.numeric(col);
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "mean estimate needs at least two rows");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double s2 = ss / static_cast<double>(n - 1);
  return PointEstimate{mean, s2 / static_cast<double>(n)};
}

std::vector<CoefficientEstimate> regression_estimands(const Dataset& ds, const FitSpec& fit) {
  try {
    const Schema& schema = ds.schema();
    const std::size_t target = schema.index_of(fit.target);
    std::vector<std::size_t> cols;
    std::vector<std::vector<std::string>> levels;
    for (const auto& name : fit.predictors) {
      const std::size_t c = schema.index_of(name);
      if (c == target) fail(ErrorCode::InvalidArgument, "target '" + name + "' listed as its own predictor");
      cols.push_back(c);
      levels.push_back(schema[c].kind.levels);
    }
    const Predictors x = Predictors::gather(ds, cols);
    const DesignLayout layout = DesignLayout::of(x);
    const auto names = layout.coefficient_names(levels);
    std::vector<CoefficientEstimate> out;

    if (fit.family == Family::Linear) {
      if (!schema[target].kind.is_numeric()) fail(ErrorCode::Schema, "linear fit target '" + fit.target + "' is not numeric");
      const auto y = ds.numeric(target);
      const LinearModel model = fit_ols(x, y);
      for (std::size_t j = 0; j < names.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out.push_back({names[j], model.coefficients[jj], model.standard_errors[jj] * model.standard_errors[jj]});
      }
      return out;
    }

    if (!schema[target].kind.is_categorical()) {
      fail(ErrorCode::Schema, "logistic fit target '" + fit.target + "' is not categorical");
    }
    const auto& target_levels = schema[target].kind.levels;
    const LogisticModel model = fit_logistic(x, ds.codes(target), target_levels.size());
    for (Eigen::Index k = 0; k < model.coefficients.rows(); ++k) {
      const std::string cls = target_levels[static_cast<std::size_t>(model.classes[static_cast<std::size_t>(k) + 1])];
      for (std::size_t j = 0; j < names.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double se = model.standard_errors(k, jj);
        out.push_back({cls + ":" + names[j], model.coefficients(k, jj), se * se});
      }
    }
    return out;
  } catch (...) {
    rethrow_with_context("fit '" + fit.id + "'");
  }
}

std::vector<FitSpec> parse_fitspecs(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("fit specification: ") + e.what());
  }
  const nlohmann::json& list = doc.is_object() ? doc.at("fits") : doc;
  if (!list.is_array()) fail(ErrorCode::Config, "fit specification must be an array of fits");
  std::vector<FitSpec> fits;
  std::set<std::string> ids;
  for (const auto& e : list) {
    FitSpec f;
    f.id = e.value("id", "");
    if (f.id.empty()) fail(ErrorCode::Config, "every fit needs an id");
    if (!ids.insert(f.id).second) fail(ErrorCode::Config, "duplicate fit id '" + f.id + "'");
    const std::string family = e.value("family", "linear");
    if (family == "linear") {
      f.family = Family::Linear;
    } else if (family == "logistic") {
      f.family = Family::Logistic;
    } else {
      fail(ErrorCode::Config, "fit '" + f.id + "': family must be linear or logistic");
    }
    f.target = e.value("target", "");
    if (f.target.empty()) fail(ErrorCode::Config, "fit '" + f.id + "' has no target");
    f.predictors = e.value("predictors", std::vector<std::string>{});
    fits.push_back(std::move(f));
  }
  return fits;
}

std::vector<FitSpec> load_fitspecs(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open fit specification '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fitspecs(ss.str());
}

}  // namespace synthkit
