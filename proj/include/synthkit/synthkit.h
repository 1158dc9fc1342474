#ifndef SYNTHKIT_SYNTHKIT_H
#define SYNTHKIT_SYNTHKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SYNTHKIT_BUILDING_LIBRARY)
#    define SK_API __declspec(dllexport)
#  else
#    define SK_API __declspec(dllimport)
#  endif
#else
#  define SK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sk_status {
  SK_OK = 0,
  SK_ERR_INVALID_ARGUMENT = 1,
  SK_ERR_IO = 2,
  SK_ERR_PARSE = 3,
  SK_ERR_SCHEMA = 4,
  SK_ERR_FIT = 5,
  SK_ERR_CONFIG = 6,
  SK_ERR_INTERNAL = 99
} sk_status;

/* Message of the last failure on the calling thread; "" if none. */
SK_API const char* sk_last_error(void);
SK_API const char* sk_status_name(sk_status status);
SK_API const char* sk_version(void);

/* ---- datasets ---- */

typedef struct sk_dataset sk_dataset;

SK_API sk_status sk_dataset_load_csv(const char* csv_path, const char* schema_path, sk_dataset** out);
/* The generated test fixture (x, y, a, b, c). */
SK_API sk_status sk_dataset_fixture(size_t rows, uint64_t seed, sk_dataset** out);
SK_API sk_status sk_dataset_shape(const sk_dataset* ds, size_t* rows, size_t* cols);
SK_API sk_status sk_dataset_write_csv(const sk_dataset* ds, const char* path);
SK_API void sk_dataset_free(sk_dataset* ds);

/* ---- synthesis ---- */

typedef struct sk_synthetic_set sk_synthetic_set;

/* label: synthesizer name such as "D", "CPO" or "DT". */
SK_API sk_status sk_synthesize(const sk_dataset* original, const char* label, size_t m, uint64_t seed,
                               unsigned jobs, sk_synthetic_set** out);
SK_API sk_status sk_synthetic_count(const sk_synthetic_set* set, size_t* m);
/* Copy of member i; free with sk_dataset_free. */
SK_API sk_status sk_synthetic_get(const sk_synthetic_set* set, size_t i, sk_dataset** out);
SK_API sk_status sk_synthetic_save(const sk_synthetic_set* set, const char* dir);
SK_API void sk_synthetic_free(sk_synthetic_set* set);

/* ---- metrics ---- */

typedef struct sk_interval {
  double lower;
  double upper;
} sk_interval;

/* printed_variant != 0 selects the cross-denominator form. */
SK_API sk_status sk_cio(sk_interval orig, sk_interval syn, int printed_variant, double* out);

typedef struct sk_combined {
  double q_bar;
  double v_bar;
  double b;   /* valid when has_b */
  double t_p; /* valid when has_b */
  double t_s;
  int has_b;
} sk_combined;

SK_API sk_status sk_combine(const double* q, const double* v, size_t m, sk_combined* out);

/* Original-to-synthetic KL (nats) for one column, 0.5 pseudo-count smoothing when enabled. */
SK_API sk_status sk_kl_column(const sk_dataset* orig, const sk_dataset* syn, const char* column, size_t bins,
                              int smoothing, double* out);

/* ---- harness ---- */

typedef struct sk_run_options {
  unsigned jobs;
  int resume;
  int has_seed;
  uint64_t seed;
  const char* out_dir; /* NULL keeps the config's value */
} sk_run_options;

typedef struct sk_run_summary {
  size_t cells;
  size_t cells_run;
  size_t cells_skipped;
  size_t error_rows;
  size_t datasets_generated;
  size_t datasets_recorded;
  int exit_code; /* 0 clean, 2 when the report holds error rows */
} sk_run_summary;

SK_API void sk_run_options_init(sk_run_options* options);

/* Output directory named by a config, resolved against the config's location.
   Writes at most `size` bytes including the terminator; `needed` gets the full length. */
SK_API sk_status sk_config_out_dir(const char* config_path, char* buffer, size_t size, size_t* needed);

SK_API sk_status sk_experiment_run(const char* config_path, const sk_run_options* options, sk_run_summary* out);
SK_API sk_status sk_generate(const char* config_path, const char* spec, size_t m, const sk_run_options* options,
                             const char* dir, double* seconds);
SK_API sk_status sk_evaluate(const char* config_path, const char* const* dirs, size_t n_dirs, const char* out_path,
                             size_t* error_rows);
SK_API sk_status sk_bench(const char* config_path, const char* spec, size_t count, const sk_run_options* options,
                          double* seconds);
/* tables may be NULL (every table the report supports). */
SK_API sk_status sk_report(const char* report_dir, const char* out_dir, const char* const* tables, size_t n_tables,
                           size_t* files_written);
/* Fixture CSV, schema, fit and ad-hoc batteries and a sample config. */
SK_API sk_status sk_write_demo(const char* dir, size_t rows, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif
