#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "synthkit/synthkit.h"
#include "test_util.hpp"

TEST_CASE("status names and errors") {
  CHECK(std::string(sk_status_name(SK_OK)) == "ok");
  CHECK(std::string(sk_status_name(SK_ERR_CONFIG)) == "config");
  CHECK(std::string(sk_version()).size() > 0);

  sk_dataset* ds = nullptr;
  CHECK(sk_dataset_load_csv("/nonexistent.csv", "/nonexistent.json", &ds) == SK_ERR_IO);
  CHECK(ds == nullptr);
  CHECK(std::string(sk_last_error()).size() > 0);
  CHECK(sk_dataset_fixture(10, 1, nullptr) == SK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("metric helpers") {
  double v = -1;
  REQUIRE(sk_cio({0, 2}, {1, 3}, 0, &v) == SK_OK);
  CHECK(std::abs(v - 0.5) < 1e-12);
  REQUIRE(sk_cio({0, 2}, {1, 3}, 1, &v) == SK_OK);
  CHECK(v == doctest::Approx(2.0 / 3.0));

  const double q[] = {1, 2, 3}, var[] = {0, 0, 0};
  sk_combined c{};
  REQUIRE(sk_combine(q, var, 3, &c) == SK_OK);
  CHECK(c.has_b == 1);
  CHECK(std::abs(c.b - 1.0) < 1e-12);
  CHECK(std::abs(c.t_p - 1.0 / 3.0) < 1e-12);
  REQUIRE(sk_combine(q, var, 1, &c) == SK_OK);
  CHECK(c.has_b == 0);
  CHECK(sk_combine(q, var, 0, &c) != SK_OK);
}

TEST_CASE("synthesize through handles") {
  sk_dataset* orig = nullptr;
  REQUIRE(sk_dataset_fixture(400, 5, &orig) == SK_OK);
  size_t rows = 0, cols = 0;
  REQUIRE(sk_dataset_shape(orig, &rows, &cols) == SK_OK);
  CHECK(rows == 400);
  CHECK(cols == 5);

  sk_synthetic_set* set = nullptr;
  REQUIRE(sk_synthesize(orig, "D", 3, 11, 2, &set) == SK_OK);
  size_t m = 0;
  REQUIRE(sk_synthetic_count(set, &m) == SK_OK);
  CHECK(m == 3);
  sk_dataset* first = nullptr;
  REQUIRE(sk_synthetic_get(set, 0, &first) == SK_OK);
  double kl = -1;
  REQUIRE(sk_kl_column(orig, first, "y", 20, 1, &kl) == SK_OK);
  CHECK(kl >= 0.0);
  CHECK(sk_kl_column(orig, first, "nope", 20, 1, &kl) == SK_ERR_SCHEMA);
  sk_dataset* none = nullptr;
  CHECK(sk_synthetic_get(set, 3, &none) == SK_ERR_INVALID_ARGUMENT);

  TempDir tmp("capi");
  CHECK(sk_synthetic_save(set, tmp.file("set").c_str()) == SK_OK);
  CHECK(sk_dataset_write_csv(first, tmp.file("one.csv").c_str()) == SK_OK);
  CHECK(std::filesystem::exists(tmp.file("one.csv")));

  sk_synthetic_set* bad = nullptr;
  CHECK(sk_synthesize(orig, "ZZ", 1, 1, 1, &bad) != SK_OK);
  CHECK(sk_synthesize(orig, "D", 0, 1, 1, &bad) == SK_ERR_INVALID_ARGUMENT);

  sk_dataset_free(first);
  sk_synthetic_free(set);
  sk_dataset_free(orig);
  sk_dataset_free(nullptr);
}

TEST_CASE("harness through the C API") {
  TempDir tmp("capi_run");
  REQUIRE(sk_write_demo(tmp.path.string().c_str(), 300, 2) == SK_OK);
  const std::string cfg = tmp.file("experiment.json");

  size_t needed = 0;
  REQUIRE(sk_config_out_dir(cfg.c_str(), nullptr, 0, &needed) == SK_OK);
  std::string out(needed, '\0');
  REQUIRE(sk_config_out_dir(cfg.c_str(), out.data(), out.size(), nullptr) == SK_OK);
  out.resize(needed - 1);
  CHECK(out == tmp.file("out"));

  sk_run_options opts;
  sk_run_options_init(&opts);
  opts.jobs = 2;
  sk_run_summary s{};
  REQUIRE(sk_experiment_run(cfg.c_str(), &opts, &s) == SK_OK);
  CHECK(s.cells == 4 * 2 * 2);
  CHECK(s.exit_code == 0);
  CHECK(std::filesystem::exists(tmp.file("out/report.csv")));

  size_t files = 0;
  REQUIRE(sk_report(out.c_str(), tmp.file("tables").c_str(), nullptr, 0, &files) == SK_OK);
  CHECK(files >= 5);

  double secs = 0;
  REQUIRE(sk_generate(cfg.c_str(), "D", 2, &opts, tmp.file("gen").c_str(), &secs) == SK_OK);
  const std::string gen = tmp.file("gen");
  const char* dirs[] = {gen.c_str()};
  size_t err_rows = 99;
  REQUIRE(sk_evaluate(cfg.c_str(), dirs, 1, tmp.file("eval.csv").c_str(), &err_rows) == SK_OK);
  CHECK(err_rows == 0);
  REQUIRE(sk_bench(cfg.c_str(), "S", 1, &opts, &secs) == SK_OK);
  CHECK(sk_bench(cfg.c_str(), "S", 0, &opts, &secs) != SK_OK);

  CHECK(sk_experiment_run(tmp.file("missing.json").c_str(), &opts, &s) != SK_OK);
  tmp.write("broken.json", "{");
  CHECK(sk_experiment_run(tmp.file("broken.json").c_str(), &opts, &s) == SK_ERR_CONFIG);
}
