#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "synthkit/error.hpp"
#include "synthkit/fixture.hpp"
#include "synthkit/synthesis.hpp"
#include "test_util.hpp"

using namespace synthkit;

namespace {

double pearson_r(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Schema mixed_levels_schema() {
  return Schema({{"n", ColumnKind::numeric(), false},
                 {"big", ColumnKind::categorical({"a", "b", "c", "d", "e", "f", "g"}), false},
                 {"small", ColumnKind::categorical({"x", "y", "z"}), false}});
}

const Dataset& fixture() {
  static const Dataset ds = fixture_a(2000, 7);
  return ds;
}

std::vector<std::size_t> identity_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

TEST_CASE("make_order") {
  const Schema s = mixed_levels_schema();
  CHECK(make_order(s, OrderKind::Original) == VisitSequence{0, 1, 2});
  CHECK(make_order(s, OrderKind::Opposite) == VisitSequence{2, 1, 0});
  CHECK(make_order(s, OrderKind::LargestCategoricalLast) == VisitSequence{0, 2, 1});
  CHECK(make_order(s, OrderKind::LargestCategoricalFirst) == VisitSequence{1, 0, 2});
  CHECK(make_order(s, OrderKind::Own, {2, 0, 1}) == VisitSequence{2, 0, 1});
  CHECK_THROWS_AS(make_order(s, OrderKind::Own, {1, 1, 2}), Error);

  Schema numeric_only({{"p", ColumnKind::numeric(), false}, {"q", ColumnKind::numeric(), false}});
  CHECK_THROWS_AS(make_order(numeric_only, OrderKind::LargestCategoricalFirst), Error);
}

TEST_CASE("largest categorical ties go to the earlier column") {
  Schema s({{"a", ColumnKind::categorical({"1", "2"}), false},
            {"b", ColumnKind::categorical({"1", "2"}), false},
            {"c", ColumnKind::numeric(), false}});
  CHECK(make_order(s, OrderKind::LargestCategoricalLast) == VisitSequence{1, 2, 0});
}

TEST_CASE("predictor matrices") {
  const VisitSequence visit{0, 1, 2};
  const auto simple = make_simple_predictors(visit);
  CHECK(simple.predictors_of(0).empty());
  CHECK(simple.predictors_of(1) == std::vector<std::size_t>{0});
  CHECK(simple.predictors_of(2) == std::vector<std::size_t>{0, 1});

  const auto sel = make_selective_predictors(visit, {{2, {0}}});
  CHECK(sel.predictors_of(0).empty());
  CHECK(sel.predictors_of(1).empty());
  CHECK(sel.predictors_of(2) == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(make_selective_predictors(visit, {{1, {2}}}), Error);
  CHECK_THROWS_AS(make_selective_predictors(visit, {{1, {1}}}), Error);

  const auto reversed = make_simple_predictors(VisitSequence{2, 0, 1});
  CHECK(reversed.predictors_of(2).empty());
  CHECK(reversed.predictors_of(1) == std::vector<std::size_t>{0, 2});
  for (std::size_t i = 0; i < 3; ++i) CHECK_FALSE(reversed.get(i, i));
}

TEST_CASE("labels") {
  const auto l = parse_label("POT");
  CHECK(l.base == BaseSynthesizer::Parametric);
  CHECK(l.order == 'O');
  CHECK(l.proper);
  CHECK(l.str() == "POT");
  CHECK(parse_label("CC").base == BaseSynthesizer::CatallCart);
  CHECK(parse_label("CPH").base == BaseSynthesizer::CatallPmm);
  CHECK(parse_label("DT").proper);
  CHECK_FALSE(parse_label("S").proper);
  for (const char* bad : {"", "X", "DTT", "DQ", "PTO", "C"}) CHECK_THROWS_AS(parse_label(bad), Error);
}

TEST_CASE("spec validation") {
  const Dataset& ds = fixture();
  auto spec = spec_from_label(ds.schema(), "P", 1, 1);
  spec.methods[2] = Method::ParametricNumeric;  // 'a' is categorical
  CHECK_THROWS_AS(spec.validate(ds.schema()), Error);

  auto spec2 = spec_from_label(ds.schema(), "D", 1, 1);
  spec2.predictors.set(0, 4);  // 'c' is visited after 'x'
  CHECK_THROWS_AS(spec2.validate(ds.schema()), Error);

  auto spec3 = spec_from_label(ds.schema(), "D", 1, 1);
  spec3.m = 0;
  CHECK_THROWS_AS(spec3.validate(ds.schema()), Error);

  CHECK_THROWS_AS(spec_from_label(ds.schema(), "DV", 1, 1), Error);
}

TEST_CASE("catall puts the categorical group first") {
  const Dataset& ds = fixture();
  const auto spec = spec_from_label(ds.schema(), "CP", 1, 1);
  CHECK(spec.visit == VisitSequence{2, 3, 4, 0, 1});
  CHECK(spec.methods[0] == Method::Pmm);
  CHECK(spec.methods[2] == Method::CatallGroup);
  const auto cc = spec_from_label(ds.schema(), "CCO", 1, 1);
  CHECK(cc.visit == VisitSequence{4, 3, 2, 1, 0});
  CHECK(cc.methods[1] == Method::Cart);
}

TEST_CASE("sample synthesis draws from the original columns") {
  const Dataset& ds = fixture();
  const auto set = synthesize(ds, spec_from_label(ds.schema(), "S", 1, 3));
  REQUIRE(set.datasets.size() == 1);
  const Dataset& syn = set.datasets[0];
  CHECK(syn.rows() == ds.rows());
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    const auto orig = ds.values(c);
    const std::set<double> support(orig.begin(), orig.end());
    for (double v : syn.values(c)) CHECK(support.count(v) == 1);
  }
  const auto x = ds.numeric(0);
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const auto sx = syn.numeric(0);
  const double smean = std::accumulate(sx.begin(), sx.end(), 0.0) / n;
  CHECK(std::abs(smean - mean) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("catall never emits unseen combinations") {
  Schema s({{"A", ColumnKind::categorical({"p", "q", "r"}), false},
            {"B", ColumnKind::categorical({"p", "q", "r"}), false},
            {"v", ColumnKind::numeric(), false}});
  Rng rng(12);
  std::vector<std::vector<double>> v(3, std::vector<double>(300));
  for (std::size_t i = 0; i < 300; ++i) {
    v[0][i] = v[1][i] = static_cast<double>(uniform_index(rng, 3));
    v[2][i] = v[0][i] + standard_normal(rng);
  }
  const auto ds = Dataset::from_values(s, v);
  for (const char* label : {"CC", "CP"}) {
    const auto set = synthesize(ds, spec_from_label(s, label, 5, 4));
    for (const auto& syn : set.datasets) {
      for (std::size_t r = 0; r < syn.rows(); ++r) CHECK(syn.codes(0)[r] == syn.codes(1)[r]);
    }
  }
}

TEST_CASE("synthesis is deterministic and independent of workers") {
  const Dataset& ds = fixture();
  const auto spec = spec_from_label(ds.schema(), "D", 5, 77);
  const auto a = synthesize(ds, spec, 1);
  const auto b = synthesize(ds, spec, 1);
  const auto c = synthesize(ds, spec, 4);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.datasets[i] == b.datasets[i]);
    CHECK(a.datasets[i] == c.datasets[i]);
  }
  CHECK_FALSE(a.datasets[0] == a.datasets[1]);
}

TEST_CASE("each dataset depends only on its own index") {
  const Dataset& ds = fixture();
  const auto spec = spec_from_label(ds.schema(), "P", 3, 5);
  const auto set = synthesize(ds, spec);
  const auto rows = identity_rows(ds.rows());
  CHECK(synthesize_one(ds, spec, 2, rows) == set.datasets[2]);
  CHECK(synthesize_one(ds, spec, 0, rows) == set.datasets[0]);
}

TEST_CASE("proper with an identity resample matches non-proper") {
  const Dataset& ds = fixture();
  const auto plain = spec_from_label(ds.schema(), "D", 2, 9);
  const auto proper = spec_from_label(ds.schema(), "DT", 2, 9);
  CHECK(proper.proper);
  const auto rows = identity_rows(ds.rows());
  CHECK(synthesize_one(ds, proper, 1, rows) == synthesize_one(ds, plain, 1, rows));
  CHECK_FALSE(synthesize(ds, proper).datasets[1] == synthesize(ds, plain).datasets[1]);
}

TEST_CASE("bootstrap rows") {
  const auto rows = bootstrap_rows(1000, 3, 0);
  CHECK(rows.size() == 1000);
  for (auto r : rows) CHECK(r < 1000);
  CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() < 1000);
  CHECK(rows == bootstrap_rows(1000, 3, 0));
  CHECK(rows != bootstrap_rows(1000, 3, 1));
}

TEST_CASE("outputs stay on observed levels and values") {
  const Dataset& ds = fixture();
  const std::set<double> xs(ds.numeric(0).begin(), ds.numeric(0).end());
  const std::set<double> ys(ds.numeric(1).begin(), ds.numeric(1).end());
  for (const char* label : {"S", "P", "D", "CP", "CC", "DT", "PO", "CCH", "DL"}) {
    CAPTURE(label);
    const auto set = synthesize(ds, spec_from_label(ds.schema(), label, 2, 11));
    const auto spec = spec_from_label(ds.schema(), label, 2, 11);
    for (const auto& syn : set.datasets) {
      CHECK(syn.schema() == ds.schema());
      for (std::size_t c = 2; c < 5; ++c) {
        std::set<std::int32_t> seen(ds.codes(c).begin(), ds.codes(c).end());
        for (auto code : syn.codes(c)) CHECK(seen.count(code) == 1);
      }
      for (std::size_t c = 0; c < 2; ++c) {
        if (spec.methods[c] != Method::Cart && spec.methods[c] != Method::Pmm && spec.methods[c] != Method::Sample) continue;
        const auto& support = c == 0 ? xs : ys;
        for (double v : syn.numeric(c)) CHECK(support.count(v) == 1);
      }
    }
  }
}

TEST_CASE("x-y correlation survives D and P but not S") {
  const Dataset& ds = fixture();
  const double r0 = pearson_r(ds.numeric(0), ds.numeric(1));
  for (const char* label : {"D", "P"}) {
    const auto syn = synthesize(ds, spec_from_label(ds.schema(), label, 1, 21)).datasets[0];
    CHECK(std::abs(pearson_r(syn.numeric(0), syn.numeric(1)) - r0) < 0.1);
  }
  const auto s = synthesize(ds, spec_from_label(ds.schema(), "S", 1, 21)).datasets[0];
  CHECK(std::abs(pearson_r(s.numeric(0), s.numeric(1))) < 0.1);
}

TEST_CASE("selective predictors limit what a variable sees") {
  const Dataset& ds = fixture();
  LabelOptions lo;
  lo.selective = SelectiveSets{{1, {}}};  // y ignores x
  const auto spec = spec_from_label(ds.schema(), "D", 1, 4, lo);
  CHECK(spec.predictors.predictors_of(1).empty());
  const auto syn = synthesize(ds, spec).datasets[0];
  CHECK(std::abs(pearson_r(syn.numeric(0), syn.numeric(1))) < 0.1);
}

TEST_CASE("pmm donors") {
  LinearModel model;
  model.layout = DesignLayout({0}, {"x"});
  model.coefficients = Eigen::Vector2d(0.0, 1.0);
  Predictors fx;
  fx.columns = {{0, 1, 2, 3, 10, 20}};
  fx.level_counts = {0};
  fx.names = {"x"};
  fx.row_count = 6;
  const std::vector<double> fy{1, 2, 3, 4, 5, 6};
  Rng rng(31);

  SUBCASE("k = 1 returns the nearest row") {
    const double row[] = {9.0};
    for (int i = 0; i < 50; ++i) CHECK(pmm_draw(model, fx, fy, row, 1, rng) == 5.0);
  }
  SUBCASE("ties break by row index") {
    PmmMatcher m(model, fx, fy, 3);
    const double row[] = {1.5};
    // nearest first: rows 1 and 2 at 0.5, then row 0 beats row 3 at 1.5
    CHECK(m.donors(row) == std::vector<std::size_t>{1, 2, 0});
  }
  SUBCASE("k = 3 donors are uniform") {
    const double row[] = {1.5};
    std::array<int, 3> counts{};
    const int draws = 100000;
    PmmMatcher m(model, fx, fy, 3);
    for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(m.draw(row, rng)) - 1]++;
    for (int c : counts) CHECK(std::abs(c / double(draws) - 1.0 / 3.0) < 0.01);
  }
  SUBCASE("constant target") {
    const std::vector<double> same(6, 2.5);
    const double row[] = {4.0};
    for (int i = 0; i < 50; ++i) CHECK(pmm_draw(model, fx, same, row, 3, rng) == 2.5);
  }
  SUBCASE("too few fitting rows") {
    const double row[] = {4.0};
    CHECK_THROWS_AS(pmm_draw(model, fx, fy, row, 7, rng), Error);
  }
}

TEST_CASE("synthetic sets persist") {
  const Dataset& ds = fixture();
  const auto set = synthesize(ds, spec_from_label(ds.schema(), "CC", 2, 8));
  TempDir tmp("syn");
  save_synthetic_set(set, tmp.file("set"));
  CHECK(std::filesystem::exists(tmp.path / "set" / "manifest.json"));
  const auto back = load_synthetic_set(tmp.file("set"), ds.schema());
  CHECK(back.label == "CC");
  CHECK(back.seed == 8);
  REQUIRE(back.datasets.size() == 2);
  CHECK(back.datasets[1] == set.datasets[1]);
}
