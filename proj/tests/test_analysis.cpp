#include <doctest.h>

#include <cmath>

#include "synthkit/analysis.hpp"
#include "synthkit/error.hpp"
#include "synthkit/fixture.hpp"
#include "synthkit/synthesis.hpp"

using namespace synthkit;

namespace {

Dataset four_rows() {
  Schema s({{"A", ColumnKind::categorical({"x", "y"}), false}, {"B", ColumnKind::numeric(), false}});
  return Dataset::from_values(s, {{0, 0, 1, 1}, {1, 7, 2, 9}});
}

Predicate pred(std::vector<Condition> c, bool neg = false) { return Predicate{"p", std::move(c), neg}; }

}  // namespace

TEST_CASE("adhoc proportions") {
  const auto ds = four_rows();
  CHECK(adhoc_proportion(ds, pred({})) == 1.0);
  CHECK(adhoc_proportion(ds, pred({{"B", CompareOp::Gt, "100"}})) == 0.0);
  CHECK(adhoc_proportion(ds, pred({{"A", CompareOp::Eq, "x"}, {"B", CompareOp::Lt, "5"}})) == 0.25);
  CHECK(adhoc_proportion(ds, pred({{"B", CompareOp::Le, "2"}})) == 0.5);
  CHECK(adhoc_proportion(ds, pred({{"B", CompareOp::Ge, "7"}})) == 0.5);
  CHECK(adhoc_proportion(ds, pred({{"B", CompareOp::Eq, "9"}})) == 0.25);

  CHECK_THROWS_AS(adhoc_proportion(ds, pred({{"Z", CompareOp::Eq, "x"}})), Error);
  CHECK_THROWS_AS(adhoc_proportion(ds, pred({{"A", CompareOp::Eq, "w"}})), Error);
  CHECK_THROWS_AS(adhoc_proportion(ds, pred({{"A", CompareOp::Lt, "x"}})), Error);
  CHECK_THROWS_AS(adhoc_proportion(ds, pred({{"B", CompareOp::Lt, "abc"}})), Error);
}

TEST_CASE("negation complements exactly") {
  const auto ds = fixture_a(777, 3);
  const std::vector<Condition> c{{"a", CompareOp::Eq, "a1"}, {"x", CompareOp::Ge, "3.5"}};
  CHECK(adhoc_proportion(ds, pred(c)) + adhoc_proportion(ds, pred(c, true)) == 1.0);
}

TEST_CASE("adhoc compare and parsing") {
  const auto ds = fixture_a(500, 2);
  const auto preds = parse_predicates(fixture_a_adhoc_json());
  REQUIRE(preds.size() == 3);
  const std::vector<Dataset> copies{ds, ds};
  const auto r = adhoc_compare(ds, copies, preds[0], "copy");
  CHECK(r.deviations.size() == 1);
  CHECK(r.deviations[0] == 0.0);
  CHECK_FALSE(r.description.empty());

  CHECK_THROWS_AS(parse_predicates(R"({"analyses":[{"id":"q","conditions":[{"column":"x","op":"ne","value":"1"}]}]})"),
                  Error);
  const auto neg = parse_predicates(R"({"analyses":[{"id":"q","conditions":[],"negated":true}]})");
  CHECK(neg[0].negated);
  CHECK(adhoc_proportion(ds, neg[0]) == 0.0);
}

TEST_CASE("pearson") {
  const std::vector<double> xs{1, 2, 3}, ys{1, 3, 2};
  CHECK(std::abs(pearson(xs, ys).r - 0.5) < 1e-12);
  const std::vector<double> lin{3, 5, 7}, neg{-1, -2, -3};
  CHECK(std::abs(pearson(xs, lin).r - 1.0) < 1e-12);
  CHECK(std::abs(pearson(xs, neg).r + 1.0) < 1e-12);

  const std::vector<double> a{0.3, 1.7, 2.2, 5.1, 4.0}, b{1.0, 0.4, 2.9, 3.3, 6.1};
  const double r = pearson(a, b).r;
  std::vector<double> a2, nb;
  for (double v : a) a2.push_back(10.0 + 3.0 * v);
  for (double v : b) nb.push_back(-v);
  CHECK(std::abs(pearson(a2, b).r - r) < 1e-12);
  CHECK(std::abs(pearson(a, nb).r + r) < 1e-12);

  const std::vector<double> flat{2, 2, 2};
  CHECK_THROWS_AS(pearson(xs, flat), Error);
  CHECK_THROWS_AS(pearson(xs, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}), Error);
}

TEST_CASE("correlation battery") {
  MetricTable t;
  const double cios[] = {0.95, 0.8, 0.6, 0.4};
  for (int i = 0; i < 4; ++i) {
    auto& m = t["s" + std::to_string(i)];
    m["avg_cio"] = cios[i];
    m["apo90"] = cios[i];
    m["class_dev"] = 1.0 - cios[i];
    m["kl_norm_avg"] = 0.5;
  }
  const auto res = correlation_battery(t, {{"avg_cio", "apo90"}, {"avg_cio", "class_dev"}, {"avg_cio", "kl_norm_avg"},
                                           {"avg_cio", "adhoc_dev_avg"}});
  REQUIRE(res.results.size() == 2);
  CHECK(std::abs(res.results[0].r - 1.0) < 1e-12);
  CHECK(std::abs(res.results[1].r + 1.0) < 1e-12);
  CHECK(res.results[1].n == 4);
  REQUIRE(res.skipped.size() == 2);
  CHECK(res.skipped[0].first == "avg_cio~kl_norm_avg");
  CHECK_FALSE(res.skipped[0].second.empty());

  MetricTable small{{"a", {{"avg_cio", 1.0}}}, {"b", {{"avg_cio", 2.0}}}};
  CHECK_THROWS_AS(correlation_battery(small, default_correlation_pairs()), Error);
}

TEST_CASE("classification on copies agrees with the original model") {
  const auto ds = fixture_a(600, 4);
  const std::vector<Dataset> copies{ds, ds, ds};
  const auto r = classify_compare(ds, copies, "c");
  CHECK(r.agreement == 1.0);
  for (double a : r.accuracies) CHECK(a == r.baseline_accuracy);
  CHECK(r.deviation() == doctest::Approx(0.0));

  ClassifyOptions ho;
  ho.holdout = true;
  ho.seed = 5;
  const auto h1 = classify_compare(ds, copies, "c", ho);
  const auto h2 = classify_compare(ds, copies, "c", ho);
  CHECK(h1.mean_accuracy == h2.mean_accuracy);
  CHECK(h1.agreement == h2.agreement);
}

TEST_CASE("sample synthesis reduces accuracy to the majority rate") {
  const auto ds = fixture_a(2000, 6, true);
  const auto codes = ds.codes(4);
  double high = 0;
  for (auto c : codes) high += c == 1 ? 1.0 : 0.0;
  const double majority = std::max(high, static_cast<double>(codes.size()) - high) / static_cast<double>(codes.size());
  const auto set = synthesize(ds, spec_from_label(ds.schema(), "S", 5, 8));
  const auto r = classify_compare(ds, set.datasets, "c");
  CHECK(r.baseline_accuracy > 0.95);
  CHECK(std::abs(r.mean_accuracy - majority) < 0.05);
}

TEST_CASE("classification errors") {
  const auto ds = fixture_a(200, 1);
  const std::vector<Dataset> none;
  CHECK_THROWS_AS(classify_compare(ds, none, "c"), Error);
  const std::vector<Dataset> one{ds};
  CHECK_THROWS_AS(classify_compare(ds, one, "x"), Error);
  CHECK_THROWS_AS(classify_compare(ds, one, "nope"), Error);
  const std::vector<Dataset> other{mixed_fixture(200, 1)};
  CHECK_THROWS_AS(classify_compare(ds, other, "c"), Error);
}
