#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "synthkit/error.hpp"
#include "synthkit/estimands.hpp"
#include "synthkit/rng.hpp"

using namespace synthkit;

namespace {

EstimateSet make(std::vector<double> q, std::vector<double> v) {
  EstimateSet es;
  es.id = "t";
  es.q = std::move(q);
  es.v = std::move(v);
  return es;
}

Dataset numeric_frame(std::vector<std::vector<double>> cols, std::vector<std::string> names) {
  std::vector<ColumnSpec> specs;
  for (auto& n : names) specs.push_back({n, ColumnKind::numeric(), false});
  return Dataset::from_values(Schema(specs), cols);
}

}  // namespace

TEST_CASE("combine examples") {
  const auto a = combine(make({2, 2, 2}, {1, 1, 1}));
  CHECK(a.q_bar == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a.t_s == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  const auto b = combine(make({1, 2, 3}, {0, 0, 0}), CombiningRule::Tp);
  CHECK(std::abs(b.q_bar - 2.0) < 1e-12);
  REQUIRE(b.b);
  CHECK(std::abs(*b.b - 1.0) < 1e-12);
  CHECK(std::abs(*b.t_p - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(b.variance() - 1.0 / 3.0) < 1e-12);

  CHECK_THROWS_AS(combine(make({4}, {0.7}), CombiningRule::Tp), Error);
  const auto one = combine(make({4}, {0.7}));
  CHECK(one.t_s == 2.0 * 0.7);
  CHECK_FALSE(one.b);

  CHECK_THROWS_AS(combine(make({}, {})), Error);
  CHECK_THROWS_AS(combine(make({1, 2}, {1})), Error);
  CHECK(parse_rule("Tp") == CombiningRule::Tp);
  CHECK(parse_rule("Ts") == CombiningRule::Ts);
  CHECK_THROWS_AS(parse_rule("tq"), Error);
}

TEST_CASE("combine properties") {
  Rng rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> q(7), v(7);
  for (auto& x : q) x = nd(rng);
  for (auto& x : v) x = std::abs(nd(rng));
  const auto base = combine(make(q, v), CombiningRule::Tp);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> idx(q.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> pq, pv;
    for (auto i : idx) {
      pq.push_back(q[i]);
      pv.push_back(v[i]);
    }
    const auto p = combine(make(pq, pv), CombiningRule::Tp);
    CHECK(p.q_bar == doctest::Approx(base.q_bar).epsilon(1e-13));
    CHECK(*p.b == doctest::Approx(*base.b).epsilon(1e-13));
    CHECK(p.t_s == doctest::Approx(base.t_s).epsilon(1e-13));
  }

  const auto equal = combine(make({1.5, 1.5, 1.5, 1.5}, {0.2, 0.4, 0.1, 0.3}), CombiningRule::Tp);
  CHECK(*equal.b == 0.0);
  CHECK(*equal.t_p == equal.v_bar);
  CHECK(*base.b > 0.0);

  for (std::size_t m : {1, 2, 5, 10, 50}) {
    const std::vector<double> vv(m, 0.37);
    const auto ce = combine(make(std::vector<double>(m, 1.0), vv));
    CHECK(ce.t_s == doctest::Approx((1.0 + 1.0 / double(m)) * ce.v_bar).epsilon(1e-15));
  }
}

TEST_CASE("confidence intervals") {
  const auto ci = confidence_interval(0.0, 1.0, 0.95);
  CHECK(std::abs(ci.upper - 1.95996) < 1e-4);
  CHECK(std::abs(ci.lower + 1.95996) < 1e-4);
  const auto d = confidence_interval(3.0, 0.0);
  CHECK(d.lower == 3.0);
  CHECK(d.upper == 3.0);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 0.0), Error);

  const auto w1 = confidence_interval(2.0, 0.8).width();
  const auto w2 = confidence_interval(2.0, 1.6).width();
  CHECK(std::abs(w2 / w1 - std::sqrt(2.0)) < 1e-12);

  // Replicated dataset: combined center equals the single estimate.
  const auto ce = combine(make({0.4, 0.4, 0.4}, {0.01, 0.01, 0.01}));
  CHECK(confidence_interval(ce).center == doctest::Approx(0.4));
  CHECK(normal_critical_value(0.9) == doctest::Approx(1.644854).epsilon(1e-6));
}

TEST_CASE("mean point estimand") {
  const auto ds = numeric_frame({{1, 2, 3}, {5, 5, 5}}, {"a", "b"});
  const auto pe = mean_point_estimand(ds, 0);
  CHECK(pe.q == doctest::Approx(2.0));
  CHECK(pe.v == doctest::Approx(1.0 / 3.0));
  CHECK(mean_point_estimand(ds, 1).v == 0.0);
  CHECK_THROWS_AS(mean_point_estimand(numeric_frame({{1}}, {"a"}), 0), Error);
}

TEST_CASE("regression estimands") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 + 2.0 * i);
  }
  const auto ds = numeric_frame({x, y}, {"x", "y"});
  const auto est = regression_estimands(ds, FitSpec{"f", Family::Linear, "y", {"x"}});
  REQUIRE(est.size() == 2);
  CHECK(est[0].q == doctest::Approx(3.0));
  CHECK(est[1].name == "x");
  CHECK(est[1].q == doctest::Approx(2.0));
  CHECK(est[0].v < 1e-12);
  CHECK(est[1].v < 1e-12);

  CHECK_THROWS_AS(regression_estimands(ds, FitSpec{"bad", Family::Linear, "y", {"nope"}}), Error);
  try {
    regression_estimands(ds, FitSpec{"bad", Family::Linear, "y", {"nope"}});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
}

TEST_CASE("logistic null coefficients sit near zero") {
  Rng rng(17);
  const std::size_t n = 3000;
  std::vector<double> x(n), c(n);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    c[i] = static_cast<double>(uniform_index(rng, 2));
  }
  Schema s({{"x", ColumnKind::numeric(), false}, {"c", ColumnKind::categorical({"n", "p"}), false}});
  const auto ds = Dataset::from_values(s, {x, c});
  const auto est = regression_estimands(ds, FitSpec{"lg", Family::Logistic, "c", {"x"}});
  REQUIRE_FALSE(est.empty());
  for (const auto& e : est) {
    CAPTURE(e.name);
    CHECK(e.name.find(':') != std::string::npos);
    if (e.name.find("x") != std::string::npos) CHECK(std::abs(e.q) < 3.0 * std::sqrt(e.v));
  }
}

TEST_CASE("fitspec parsing") {
  const auto fits = parse_fitspecs(R"({"fits":[{"id":"f1","family":"linear","target":"y","predictors":["x"]},
                                               {"id":"f2","family":"logistic","target":"c","predictors":[]}]})");
  REQUIRE(fits.size() == 2);
  CHECK(fits[1].family == Family::Logistic);
  CHECK(parse_fitspecs(R"([{"id":"a","family":"linear","target":"y","predictors":["x"]}])").size() == 1);
  CHECK_THROWS_AS(parse_fitspecs(R"({"fits":[{"id":"a","family":"probit","target":"y","predictors":[]}]})"), Error);
  CHECK_THROWS_AS(parse_fitspecs("{not json"), Error);
}
