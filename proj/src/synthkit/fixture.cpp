#include "synthkit/fixture.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "synthkit/error.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

namespace fs = std::filesystem;

namespace {

Schema fixture_a_schema() {
  return Schema({
      {"x", ColumnKind::numeric(), false},
      {"y", ColumnKind::numeric(), false},
      {"a", ColumnKind::categorical({"a0", "a1", "a2", "a3"}), false},
      {"b", ColumnKind::categorical({"b0", "b1", "b2", "b3"}), false},
      {"c", ColumnKind::categorical({"low", "high"}), false},
  });
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

Dataset fixture_a(std::size_t n, std::uint64_t seed, bool deterministic_c) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "fixture needs at least one row");
  Rng rng(derive_seed(seed, 0, hash_string("fixture-a")));
  std::vector<std::vector<double>> v(5, std::vector<double>(n));
  std::normal_distribution<double> noise(0.0, 2.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double x = 10.0 * uniform01(rng);
    v[0][r] = x;
    v[1][r] = 2.0 * x + noise(rng);
    const auto a = uniform_index(rng, 4);
    v[2][r] = static_cast<double>(a);
    v[3][r] = static_cast<double>(uniform01(rng) < 0.9 ? a : uniform_index(rng, 4));
    const double p_high = 1.0 / (1.0 + std::exp(-1.5 * (x - 5.0)));
    const double u = uniform01(rng);
    v[4][r] = deterministic_c ? (x > 5.0 ? 1.0 : 0.0) : (u < p_high ? 1.0 : 0.0);
  }
  return Dataset::from_values(fixture_a_schema(), v);
}

Dataset mixed_fixture(std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "fixture needs at least one row");
  std::vector<ColumnSpec> cols;
  for (int i = 1; i <= 5; ++i) cols.push_back({"x" + std::to_string(i), ColumnKind::numeric(), false});
  for (int i = 1; i <= 5; ++i) {
    cols.push_back({"c" + std::to_string(i), ColumnKind::categorical({"l0", "l1", "l2"}), false});
  }
  Rng rng(derive_seed(seed, 0, hash_string("mixed")));
  std::vector<std::vector<double>> v(10, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    double prev = standard_normal(rng);
    for (int i = 0; i < 5; ++i) {
      v[i][r] = i == 0 ? prev : 0.7 * v[i - 1][r] + standard_normal(rng);
    }
    for (int i = 0; i < 5; ++i) {
      const double driver = v[i][r];
      const std::size_t base = driver < -0.5 ? 0 : (driver < 0.5 ? 1 : 2);
      v[5 + i][r] = static_cast<double>(uniform01(rng) < 0.8 ? base : uniform_index(rng, 3));
    }
  }
  return Dataset::from_values(Schema(std::move(cols)), v);
}

std::vector<FitSpec> fixture_a_fits() {
  return {
      {"f1", Family::Linear, "y", {"x"}},
      {"f2", Family::Linear, "y", {"x", "a"}},
      {"f3", Family::Linear, "x", {"y", "c"}},
      {"f4", Family::Linear, "y", {"c", "b"}},
  };
}

std::string fixture_a_fits_json() {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : fixture_a_fits()) {
    fits.push_back({{"id", f.id}, {"family", "linear"}, {"target", f.target}, {"predictors", f.predictors}});
  }
  return nlohmann::json{{"fits", fits}}.dump(2) + "\n";
}

std::string fixture_a_adhoc_json() {
  nlohmann::json doc = {
      {"analyses",
       {
           {{"id", "a0_high"},
            {"conditions", {{{"column", "a"}, {"op", "eq"}, {"value", "a0"}}, {{"column", "c"}, {"op", "eq"}, {"value", "high"}}}}},
           {{"id", "b1_small_x"},
            {"conditions", {{{"column", "b"}, {"op", "eq"}, {"value", "b1"}}, {{"column", "x"}, {"op", "le"}, {"value", 3}}}}},
           {{"id", "y_over_15"}, {"conditions", {{{"column", "y"}, {"op", "gt"}, {"value", 15}}}}},
       }},
  };
  return doc.dump(2) + "\n";
}

DemoFiles write_demo(const std::string& dir, std::size_t n, std::uint64_t seed) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());

  const Dataset ds = fixture_a(n, seed);
  DemoFiles files{(root / "fixture_a.csv").string(), (root / "fixture_a.schema.json").string(),
                  (root / "fits.json").string(), (root / "adhoc.json").string(),
                  (root / "experiment.json").string()};
  write_csv(ds, files.data);
  write_text(files.schema, schema_to_json(ds.schema()));
  write_text(files.fits, fixture_a_fits_json());
  write_text(files.adhoc, fixture_a_adhoc_json());

  nlohmann::json cfg = {
      {"dataset", "fixture_a.csv"},
      {"schema", "fixture_a.schema.json"},
      {"grid", {{{"label", "S"}}, {{"label", "P"}}, {{"label", "D"}}, {{"label", "CC"}}}},
      {"m", {1, 5}},
      {"proper", {false}},
      {"k", 2},
      {"fits", "fits.json"},
      {"adhoc", "adhoc.json"},
      {"metrics",
       {{"mean_point", true},
        {"regression", true},
        {"kl", true},
        {"kl_normalize", true},
        {"classification", {{"target", "c"}}},
        {"adhoc", true}}},
      {"seed", seed},
      {"out", "out"},
  };
  write_text(files.config, cfg.dump(2) + "\n");
  return files;
}

}  // namespace synthkit
