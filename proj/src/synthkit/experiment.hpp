#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "synthkit/analysis.hpp"
#include "synthkit/dataset.hpp"
#include "synthkit/estimands.hpp"
#include "synthkit/synthesis.hpp"
#include "synthkit/utility.hpp"

namespace synthkit {

struct PreprocessStep {
  enum class Op { Drop, Coarsen, Head, ReplaceMissing };
  Op op = Op::Drop;
  std::string column;   // drop, coarsen
  LevelMapping mapping; // coarsen
  std::size_t n = 0;    // head
  std::uint64_t seed = 0;  // replace_missing
};

struct GridTemplate {
  std::string label;  // e.g. "D", "PO", "CCV"
  bool selective = false;
  std::map<std::string, std::vector<std::string>> selective_sets;  // target -> predictors
  std::vector<std::string> own_order;                               // V suffix
};

// One synthesizer of the expanded grid (before m and repetitions).
struct GridEntry {
  std::string key;    // label, plus "+sel" for selective predictors
  std::string label;  // label including the proper suffix
  GridTemplate source;
};

struct MetricToggles {
  bool mean_point = true;
  bool regression = true;
  bool kl = true;
  bool kl_normalize = true;
  std::optional<std::string> class_target;
  bool class_holdout = false;
  bool adhoc = true;
};

struct ExperimentConfig {
  std::string base_dir;
  std::string dataset_path;
  std::string schema_path;
  std::set<std::string> missing_tokens = default_missing_tokens();
  std::vector<PreprocessStep> preprocess;

  std::vector<GridTemplate> grid;
  std::vector<std::size_t> m_values;
  std::vector<bool> proper_values{false};
  std::size_t k = 5;

  std::vector<FitSpec> fits;
  std::vector<Predicate> adhoc;
  MetricToggles metrics;

  CombiningRule rule = CombiningRule::Ts;
  double level = 0.95;
  KlOptions kl;
  ApoOptions apo;
  CioVariant cio_variant = CioVariant::OwnWidth;
  std::size_t k_donors = 5;
  std::size_t min_leaf = 5;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::string canonical;  // normalized JSON of the parsed document

  std::vector<GridEntry> entries() const;
  GridEntry entry(const std::string& key) const;
  void validate() const;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir);
ExperimentConfig load_config(const std::string& path);

// Loads the dataset and applies the preprocessing steps in order.
Dataset load_original(const ExperimentConfig& cfg);

// Synthesizer spec for a grid entry; the seed depends only on (master seed,
// key, m, repetition).
SynthesizerSpec build_spec(const ExperimentConfig& cfg, const Schema& schema, const GridEntry& entry, std::size_t m,
                           std::size_t rep);
std::uint64_t cell_seed(std::uint64_t master, const std::string& key, std::size_t m, std::size_t rep);

struct ReportRow {
  std::string spec_label;
  std::size_t m = 0;
  std::size_t k = 0;
  std::string metric;
  std::string scope;
  double value = 0.0;
};

std::string report_header();
std::string format_row(const ReportRow& row);
std::vector<ReportRow> parse_report(const std::string& csv_text);
std::vector<ReportRow> load_report(const std::string& path);

// Original-data estimates shared by every cell.
class Evaluator {
 public:
  Evaluator(const ExperimentConfig& cfg, const Dataset& original);

  // Metric rows for one synthetic set; failures become "error" rows.
  std::vector<ReportRow> evaluate(const std::string& key, std::size_t m, std::size_t rep,
                                  std::span<const Dataset> synthetic, std::uint64_t seed) const;

 private:
  struct FitBaseline {
    FitSpec fit;
    std::vector<CoefficientEstimate> coefficients;
    std::string error;
  };

  const ExperimentConfig& cfg_;
  const Dataset& original_;
  std::vector<std::pair<std::size_t, ConfidenceInterval>> mean_ci_;
  std::vector<FitBaseline> fits_;
};

// kl_norm rows for every cell with kl_raw rows, against the "S" cell of the
// same m and repetition.
std::vector<ReportRow> normalize_kl_rows(const std::vector<ReportRow>& rows);

struct TimingRecord {
  std::string spec_label;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t datasets = 0;
  double seconds = 0.0;

  double per_dataset() const { return datasets ? seconds / static_cast<double>(datasets) : 0.0; }
};

struct RunOptions {
  unsigned jobs = 1;
  bool resume = false;
};

struct RunSummary {
  std::size_t cells = 0;
  std::size_t cells_run = 0;
  std::size_t cells_skipped = 0;
  std::size_t error_rows = 0;
  std::size_t datasets_generated = 0;  // this invocation
  std::size_t datasets_recorded = 0;   // whole manifest
  std::string report_path;

  int exit_code() const { return error_rows ? 2 : 0; }
};

// Writes <out>/report.csv, summary.csv, timings.csv and manifest.json. Cell
// results live in <out>/cells so a resumed run only computes missing cells.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// Serial generation of `count` datasets for one grid entry, CSV writes included
// in the timing. Appends the record to <out>/bench_timings.csv.
TimingRecord benchmark_generation(const ExperimentConfig& cfg, const std::string& key, std::size_t count);

// One synthetic set for a grid entry saved under `dir` (repetition 1 seed
// unless `seed` is given).
TimingRecord generate(const ExperimentConfig& cfg, const std::string& key, std::size_t m, const std::string& dir,
                      std::optional<std::uint64_t> seed = std::nullopt, unsigned jobs = 1);

// Metric rows for previously generated synthetic sets; written to `out_path`.
std::vector<ReportRow> evaluate_sets(const ExperimentConfig& cfg, const std::vector<std::string>& dirs,
                                     const std::string& out_path);

struct TableOptions {
  // Empty: every table whose metrics are present.
  std::vector<std::string> tables;
  ApoOptions apo;
};

// Plot-ready tables from a report directory (report.csv and timings.csv).
std::vector<std::string> emit_tables(const std::string& report_dir, const std::string& out_dir,
                                     const TableOptions& options = {});

}  // namespace synthkit
