#include "synthkit/synthkit.h"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <new>
#include <string>

#include "synthkit/dataset.hpp"
#include "synthkit/error.hpp"
#include "synthkit/estimands.hpp"
#include "synthkit/experiment.hpp"
#include "synthkit/fixture.hpp"
#include "synthkit/synthesis.hpp"
#include "synthkit/utility.hpp"

struct sk_dataset {
  synthkit::Dataset ds;
};

struct sk_synthetic_set {
  synthkit::SyntheticSet set;
};

namespace {

thread_local std::string g_last_error;

sk_status map_code(synthkit::ErrorCode code) {
  using synthkit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SK_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return SK_ERR_IO;
    case ErrorCode::Parse: return SK_ERR_PARSE;
    case ErrorCode::Schema: return SK_ERR_SCHEMA;
    case ErrorCode::Fit: return SK_ERR_FIT;
    case ErrorCode::Config: return SK_ERR_CONFIG;
  }
  return SK_ERR_INTERNAL;
}

template <class Fn>
sk_status guard(Fn&& fn) noexcept {
  g_last_error.clear();
  try {
    fn();
    return SK_OK;
  } catch (const synthkit::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SK_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) synthkit::fail(synthkit::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

synthkit::ExperimentConfig config_with(const char* path, const sk_run_options* options) {
  require(path, "config path");
  auto cfg = synthkit::load_config(path);
  if (options) {
    if (options->has_seed) cfg.seed = options->seed;
    if (options->out_dir) cfg.out_dir = options->out_dir;
  }
  return cfg;
}

}  // namespace

extern "C" {

const char* sk_last_error(void) { return g_last_error.c_str(); }

const char* sk_status_name(sk_status status) {
  switch (status) {
    case SK_OK: return "ok";
    case SK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SK_ERR_IO: return "io";
    case SK_ERR_PARSE: return "parse";
    case SK_ERR_SCHEMA: return "schema";
    case SK_ERR_FIT: return "fit";
    case SK_ERR_CONFIG: return "config";
    case SK_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sk_version(void) { return "0.1.0"; }

sk_status sk_dataset_load_csv(const char* csv_path, const char* schema_path, sk_dataset** out) {
  return guard([&] {
    require(csv_path && schema_path && out, "arguments");
    auto schema = synthkit::load_schema(schema_path);
    *out = new sk_dataset{synthkit::load_csv(csv_path, schema)};
  });
}

sk_status sk_dataset_fixture(size_t rows, uint64_t seed, sk_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = new sk_dataset{synthkit::fixture_a(rows, seed)};
  });
}

sk_status sk_dataset_shape(const sk_dataset* ds, size_t* rows, size_t* cols) {
  return guard([&] {
    require(ds, "dataset");
    if (rows) *rows = ds->ds.rows();
    if (cols) *cols = ds->ds.cols();
  });
}

sk_status sk_dataset_write_csv(const sk_dataset* ds, const char* path) {
  return guard([&] {
    require(ds && path, "arguments");
    synthkit::write_csv(ds->ds, path);
  });
}

void sk_dataset_free(sk_dataset* ds) { delete ds; }

sk_status sk_synthesize(const sk_dataset* original, const char* label, size_t m, uint64_t seed, unsigned jobs,
                        sk_synthetic_set** out) {
  return guard([&] {
    require(original && label && out, "arguments");
    if (m == 0) synthkit::fail(synthkit::ErrorCode::InvalidArgument, "m must be at least 1");
    const auto spec = synthkit::spec_from_label(original->ds.schema(), label, m, seed);
    *out = new sk_synthetic_set{synthkit::synthesize(original->ds, spec, jobs)};
  });
}

sk_status sk_synthetic_count(const sk_synthetic_set* set, size_t* m) {
  return guard([&] {
    require(set && m, "arguments");
    *m = set->set.datasets.size();
  });
}

sk_status sk_synthetic_get(const sk_synthetic_set* set, size_t i, sk_dataset** out) {
  return guard([&] {
    require(set && out, "arguments");
    if (i >= set->set.datasets.size()) synthkit::fail(synthkit::ErrorCode::InvalidArgument, "index out of range");
    *out = new sk_dataset{set->set.datasets[i]};
  });
}

sk_status sk_synthetic_save(const sk_synthetic_set* set, const char* dir) {
  return guard([&] {
    require(set && dir, "arguments");
    synthkit::save_synthetic_set(set->set, dir);
  });
}

void sk_synthetic_free(sk_synthetic_set* set) { delete set; }

sk_status sk_cio(sk_interval orig, sk_interval syn, int printed_variant, double* out) {
  return guard([&] {
    require(out, "out");
    synthkit::ConfidenceInterval a{orig.lower, orig.upper, 0.95, 0.5 * (orig.lower + orig.upper)};
    synthkit::ConfidenceInterval b{syn.lower, syn.upper, 0.95, 0.5 * (syn.lower + syn.upper)};
    *out = synthkit::cio(a, b, printed_variant ? synthkit::CioVariant::Printed : synthkit::CioVariant::OwnWidth);
  });
}

sk_status sk_combine(const double* q, const double* v, size_t m, sk_combined* out) {
  return guard([&] {
    require(q && v && out, "arguments");
    synthkit::EstimateSet es;
    es.q.assign(q, q + m);
    es.v.assign(v, v + m);
    const auto ce = synthkit::combine(es);
    out->q_bar = ce.q_bar;
    out->v_bar = ce.v_bar;
    out->t_s = ce.t_s;
    out->has_b = ce.b ? 1 : 0;
    out->b = ce.b.value_or(0.0);
    out->t_p = ce.t_p.value_or(0.0);
  });
}

sk_status sk_kl_column(const sk_dataset* orig, const sk_dataset* syn, const char* column, size_t bins, int smoothing,
                       double* out) {
  return guard([&] {
    require(orig && syn && column && out, "arguments");
    const std::size_t c = orig->ds.schema().index_of(column);
    const std::size_t s = syn->ds.schema().index_of(column);
    synthkit::KlOptions opts;
    opts.bins = bins;
    opts.smoothing = smoothing != 0;
    *out = synthkit::kl_divergence(orig->ds.values(c), syn->ds.values(s), orig->ds.schema()[c].kind, opts, column).raw;
  });
}

void sk_run_options_init(sk_run_options* options) {
  if (!options) return;
  options->jobs = 1;
  options->resume = 0;
  options->has_seed = 0;
  options->seed = 0;
  options->out_dir = nullptr;
}

sk_status sk_config_out_dir(const char* config_path, char* buffer, size_t size, size_t* needed) {
  return guard([&] {
    const auto cfg = config_with(config_path, nullptr);
    if (needed) *needed = cfg.out_dir.size() + 1;
    if (buffer && size) {
      const size_t n = std::min(size - 1, cfg.out_dir.size());
      cfg.out_dir.copy(buffer, n);
      buffer[n] = '\0';
    }
  });
}

sk_status sk_experiment_run(const char* config_path, const sk_run_options* options, sk_run_summary* out) {
  return guard([&] {
    const auto cfg = config_with(config_path, options);
    synthkit::RunOptions ro;
    if (options) {
      ro.jobs = options->jobs ? options->jobs : 1;
      ro.resume = options->resume != 0;
    }
    const auto s = synthkit::run_experiment(cfg, ro);
    if (out) {
      out->cells = s.cells;
      out->cells_run = s.cells_run;
      out->cells_skipped = s.cells_skipped;
      out->error_rows = s.error_rows;
      out->datasets_generated = s.datasets_generated;
      out->datasets_recorded = s.datasets_recorded;
      out->exit_code = s.exit_code();
    }
  });
}

sk_status sk_generate(const char* config_path, const char* spec, size_t m, const sk_run_options* options,
                      const char* dir, double* seconds) {
  return guard([&] {
    require(spec && dir, "arguments");
    const auto cfg = config_with(config_path, options);
    std::optional<std::uint64_t> seed;
    if (options && options->has_seed) seed = options->seed;
    const auto t = synthkit::generate(cfg, spec, m, dir, seed, options && options->jobs ? options->jobs : 1);
    if (seconds) *seconds = t.seconds;
  });
}

sk_status sk_evaluate(const char* config_path, const char* const* dirs, size_t n_dirs, const char* out_path,
                      size_t* error_rows) {
  return guard([&] {
    require(dirs && out_path, "arguments");
    const auto cfg = config_with(config_path, nullptr);
    std::vector<std::string> list;
    for (size_t i = 0; i < n_dirs; ++i) {
      require(dirs[i], "directory");
      list.emplace_back(dirs[i]);
    }
    const auto rows = synthkit::evaluate_sets(cfg, list, out_path);
    if (error_rows) {
      *error_rows = 0;
      for (const auto& r : rows) *error_rows += r.metric == "error" ? 1 : 0;
    }
  });
}

sk_status sk_bench(const char* config_path, const char* spec, size_t count, const sk_run_options* options,
                   double* seconds) {
  return guard([&] {
    require(spec, "spec");
    const auto cfg = config_with(config_path, options);
    const auto t = synthkit::benchmark_generation(cfg, spec, count);
    if (seconds) *seconds = t.seconds;
  });
}

sk_status sk_report(const char* report_dir, const char* out_dir, const char* const* tables, size_t n_tables,
                    size_t* files_written) {
  return guard([&] {
    require(report_dir && out_dir, "arguments");
    synthkit::TableOptions opts;
    if (tables) {
      for (size_t i = 0; i < n_tables; ++i) opts.tables.emplace_back(tables[i]);
    }
    const auto files = synthkit::emit_tables(report_dir, out_dir, opts);
    if (files_written) *files_written = files.size();
  });
}

sk_status sk_write_demo(const char* dir, size_t rows, uint64_t seed) {
  return guard([&] {
    require(dir, "dir");
    synthkit::write_demo(dir, rows, seed);
  });
}

}  // extern "C"
