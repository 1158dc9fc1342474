#include <doctest.h>

#include <cmath>
#include <random>

#include "synthkit/error.hpp"
#include "synthkit/rng.hpp"
#include "synthkit/utility.hpp"

using namespace synthkit;

namespace {

ConfidenceInterval iv(double lo, double hi) { return {lo, hi, 0.95, 0.5 * (lo + hi)}; }

KlScore score(const std::string& v, double raw) {
  KlScore s;
  s.variable = v;
  s.raw = raw;
  return s;
}

}  // namespace

TEST_CASE("cio worked examples") {
  CHECK(std::abs(cio(iv(0, 2), iv(0, 2)) - 1.0) < 1e-12);
  CHECK(std::abs(cio(iv(0, 1), iv(2, 3))) < 1e-12);
  CHECK(std::abs(cio(iv(0, 2), iv(1, 3)) - 0.5) < 1e-12);
  // overlap 1, own widths 2 and 4
  CHECK(cio(iv(0, 2), iv(1, 5)) == doctest::Approx(0.5 * (0.5 + 0.25)));
}

TEST_CASE("cio printed variant") {
  // denominators U_o - L_s = 2 - 1 and U_s - L_o = 3 - 0
  CHECK(cio(iv(0, 2), iv(1, 3), CioVariant::Printed) == doctest::Approx(0.5 * (1.0 / 1.0 + 1.0 / 3.0)));
  // same as own-width when the intervals coincide
  CHECK(cio(iv(0, 2), iv(0, 2), CioVariant::Printed) == 1.0);
}

TEST_CASE("cio degenerate intervals") {
  CHECK(cio(iv(1, 1), iv(1, 1)) == 1.0);
  CHECK(cio(iv(1, 1), iv(2, 2)) == 0.0);
  CHECK(cio(iv(1, 1), iv(0, 2)) == 0.0);
}

TEST_CASE("cio properties") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 500; ++t) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    if (b - a < 1e-6 || d - c < 1e-6) continue;
    const double base = cio(iv(a, b), iv(c, d));
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
    CHECK(cio(iv(c, d), iv(a, b)) == doctest::Approx(base).epsilon(1e-12));
    const double s = 7.3, k = 2.5;
    CHECK(cio(iv(a + s, b + s), iv(c + s, d + s)) == doctest::Approx(base).epsilon(1e-9));
    CHECK(cio(iv(a * k, b * k), iv(c * k, d * k)) == doctest::Approx(base).epsilon(1e-9));
  }
  // equal-width intervals reach 1 only when identical
  CHECK(cio(iv(0, 2), iv(0.01, 2.01)) < 1.0);
}

TEST_CASE("apo") {
  const std::vector<double> a{0.95, 0.85, 0.91};
  CHECK(apo(a) == doctest::Approx(2.0 / 3.0));
  CHECK(apo(std::vector<double>(4, 1.0)) == 1.0);
  CHECK(apo(std::vector<double>(4, 0.0)) == 0.0);
  const std::vector<double> edge{0.9, 0.9};
  CHECK(apo(edge) == 0.0);
  CHECK(apo(edge, ApoOptions{0.9, true}) == 1.0);
  CHECK_THROWS_AS(apo(std::vector<double>{}), Error);
  std::vector<double> m{0.5, 0.89};
  const double before = apo(m);
  m[1] = 0.91;
  CHECK(apo(m) >= before);
}

TEST_CASE("kl between distributions") {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(std::abs(kl_between(p, q) - expected) < 1e-9);
  CHECK(std::abs(expected - 0.14384) < 1e-5);
}

TEST_CASE("kl on columns") {
  const auto cat = ColumnKind::categorical({"a", "b"});
  const std::vector<double> orig{0, 1, 0, 1};
  const std::vector<double> syn{0, 1, 1, 1};
  KlOptions off;
  off.smoothing = false;
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(std::abs(kl_divergence(orig, syn, cat, off).raw - expected) < 1e-9);

  CHECK(kl_divergence(orig, orig, cat).raw <= 1e-12);

  const std::vector<double> missing_level{1, 1, 1, 1};
  const auto smoothed = kl_divergence(orig, missing_level, cat);
  CHECK(std::isfinite(smoothed.raw));
  CHECK(smoothed.raw > 0.0);

  KlOptions sym;
  sym.direction = KlDirection::Symmetric;
  const double pq = kl_divergence(orig, syn, cat).raw;
  const double qp = kl_divergence(syn, orig, cat).raw;
  CHECK(kl_divergence(orig, syn, cat, sym).raw == doctest::Approx(0.5 * (pq + qp)));

  CHECK_THROWS_AS(kl_divergence(std::vector<double>{}, syn, cat), Error);
  KlOptions one_bin;
  one_bin.bins = 1;
  CHECK_THROWS_AS(kl_divergence(orig, syn, ColumnKind::numeric(), one_bin), Error);
}

TEST_CASE("numeric kl is affine invariant and non-negative") {
  Rng rng(9);
  std::normal_distribution<double> nd;
  std::vector<double> a(500), b(500), a2(500), b2(500);
  for (std::size_t i = 0; i < 500; ++i) {
    a[i] = nd(rng);
    b[i] = 0.3 + 1.2 * nd(rng);
    a2[i] = 4.0 + 3.0 * a[i];
    b2[i] = 4.0 + 3.0 * b[i];
  }
  const auto num = ColumnKind::numeric();
  const double k1 = kl_divergence(a, b, num).raw;
  CHECK(k1 > 0.0);
  CHECK(kl_divergence(a2, b2, num).raw == doctest::Approx(k1).epsilon(1e-9));
}

TEST_CASE("normalize kl") {
  const std::vector<KlScore> base{score("x", 0.2), score("y", 0.4)};
  const auto same = normalize_kl(base, base);
  CHECK(same.average == doctest::Approx(1.0));
  for (const auto& s : same.scores) CHECK(*s.normalized == doctest::Approx(1.0));

  const std::vector<KlScore> half{score("x", 0.1), score("y", 0.2)};
  CHECK(normalize_kl(half, base).average == doctest::Approx(0.5));

  const std::vector<KlScore> zero{score("x", 0.0), score("y", 0.4)};
  CHECK_THROWS_AS(normalize_kl(half, zero), Error);
  const std::vector<KlScore> other{score("x", 0.1), score("z", 0.2)};
  CHECK_THROWS_AS(normalize_kl(other, base), Error);
}

TEST_CASE("aggregate") {
  const std::vector<std::vector<FitOverlaps>> one{{{"f1", {1.0, 0.8}}}};
  const auto a = aggregate(one);
  CHECK(a.repetitions[0].fit_averages[0] == doctest::Approx(0.9));

  const std::vector<std::vector<FitOverlaps>> two{{{"f1", {0.9}}, {"f2", {0.6, 0.8}}}};
  CHECK(aggregate(two).average_cio == doctest::Approx(0.8));

  const std::vector<std::vector<FitOverlaps>> pooled{{{"f1", {0.91}}, {"f2", {0.89}}}};
  CHECK(aggregate(pooled).apo == doctest::Approx(0.5));

  const std::vector<std::vector<FitOverlaps>> reps{{{"f", {1.0}}}, {{"f", {0.5}}}};
  const auto r = aggregate(reps);
  CHECK(r.average_cio == doctest::Approx(0.75));
  CHECK(r.apo == doctest::Approx(0.5));

  CHECK_THROWS_AS(aggregate({}), Error);
  CHECK_THROWS_AS(aggregate({{{"f", {}}}}), Error);
}
