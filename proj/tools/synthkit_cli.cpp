// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthkit/synthkit.h"

namespace {

int report_failure(sk_status st) {
  std::fprintf(stderr, "synthkit: %s error: %s\n", sk_status_name(st), sk_last_error());
  return 1;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 1;
  bool resume = false;

  sk_run_options options() const {
    sk_run_options o;
    sk_run_options_init(&o);
    o.jobs = jobs;
    o.resume = resume ? 1 : 0;
    if (seed) {
      o.has_seed = 1;
      o.seed = *seed;
    }
    o.out_dir = out.empty() ? nullptr : out.c_str();
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic tabular data: generation, utility metrics and experiment grids"};
  app.set_version_flag("--version", std::string(sk_version()));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", common.config, "experiment config (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "master seed override");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  };

  auto* experiment = app.add_subcommand("experiment", "run the full synthesizer grid");
  add_common(experiment, true);
  experiment->add_option("--out", common.out, "output directory override");
  experiment->add_flag("--resume", common.resume, "skip cells already recorded in the manifest");

  std::string spec;
  std::size_t m = 1;
  auto* generate = app.add_subcommand("generate", "generate one synthetic set");
  add_common(generate, true);
  generate->add_option("--spec", spec, "grid entry, e.g. D or CPT")->required();
  generate->add_option("--m", m, "number of synthetic datasets")->check(CLI::PositiveNumber);
  generate->add_option("--out", common.out, "directory for the synthetic CSVs")->required();

  std::vector<std::string> syn_dirs;
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "utility metrics for existing synthetic sets");
  add_common(evaluate, true);
  evaluate->add_option("--syn", syn_dirs, "synthetic set directories")->required();
  evaluate->add_option("--out", eval_out, "report CSV path")->required();

  std::size_t count = 100;
  auto* bench = app.add_subcommand("bench", "time serial generation of COUNT datasets");
  add_common(bench, true);
  bench->add_option("--spec", spec, "grid entry")->required();
  bench->add_option("--count", count, "datasets to generate");
  bench->add_option("--out", common.out, "output directory override");

  std::string report_dir;
  std::vector<std::string> tables;
  auto* report = app.add_subcommand("report", "plot-ready tables from an experiment report");
  report->add_option("--config", common.config, "config whose output directory holds report.csv");
  report->add_option("--from", report_dir, "directory holding report.csv (default: the config's output)");
  report->add_option("--out", common.out, "table directory (default: <report dir>/tables)");
  report->add_option("--table", tables, "mpe_apo, series, kl, simple_vs_selective, apo_vs_time, correlations");

  std::size_t rows = 2000;
  std::uint64_t fixture_seed = 1;
  auto* fixture = app.add_subcommand("fixture", "write the demo fixture, batteries and config");
  fixture->add_option("--out", common.out, "target directory")->required();
  fixture->add_option("--rows", rows, "row count")->check(CLI::PositiveNumber);
  fixture->add_option("--seed", fixture_seed, "fixture seed");

  CLI11_PARSE(app, argc, argv);

  if (*experiment) {
    const auto o = common.options();
    sk_run_summary s{};
    const sk_status st = sk_experiment_run(common.config.c_str(), &o, &s);
    if (st != SK_OK) return report_failure(st);
    std::printf("cells: %zu (run %zu, resumed %zu); datasets generated: %zu; recorded: %zu; error rows: %zu\n",
                s.cells, s.cells_run, s.cells_skipped, s.datasets_generated, s.datasets_recorded, s.error_rows);
    return s.exit_code;
  }
  if (*generate) {
    const auto o = common.options();
    double secs = 0.0;
    const sk_status st = sk_generate(common.config.c_str(), spec.c_str(), m, &o, common.out.c_str(), &secs);
    if (st != SK_OK) return report_failure(st);
    std::printf("%s: %zu datasets in %.3f s -> %s\n", spec.c_str(), m, secs, common.out.c_str());
    return 0;
  }
  if (*evaluate) {
    std::vector<const char*> dirs;
    for (const auto& d : syn_dirs) dirs.push_back(d.c_str());
    std::size_t errors = 0;
    const sk_status st = sk_evaluate(common.config.c_str(), dirs.data(), dirs.size(), eval_out.c_str(), &errors);
    if (st != SK_OK) return report_failure(st);
    std::printf("wrote %s (%zu error rows)\n", eval_out.c_str(), errors);
    return errors ? 2 : 0;
  }
  if (*bench) {
    const auto o = common.options();
    double secs = 0.0;
    const sk_status st = sk_bench(common.config.c_str(), spec.c_str(), count, &o, &secs);
    if (st != SK_OK) return report_failure(st);
    std::printf("%s: %zu datasets in %.3f s (%.4f s each)\n", spec.c_str(), count, secs,
                secs / static_cast<double>(count));
    return 0;
  }
  if (*report) {
    std::string from = report_dir;
    if (from.empty()) {
      if (common.config.empty()) {
        std::fprintf(stderr, "synthkit: report needs --from or --config\n");
        return 1;
      }
      std::size_t needed = 0;
      sk_status st = sk_config_out_dir(common.config.c_str(), nullptr, 0, &needed);
      if (st != SK_OK) return report_failure(st);
      std::vector<char> buf(needed);
      st = sk_config_out_dir(common.config.c_str(), buf.data(), buf.size(), nullptr);
      if (st != SK_OK) return report_failure(st);
      from = buf.data();
    }
    const std::string out = common.out.empty() ? from + "/tables" : common.out;
    std::vector<const char*> names;
    for (const auto& t : tables) names.push_back(t.c_str());
    std::size_t written = 0;
    const sk_status st = sk_report(from.c_str(), out.c_str(), names.empty() ? nullptr : names.data(), names.size(), &written);
    if (st != SK_OK) return report_failure(st);
    std::printf("wrote %zu files to %s\n", written, out.c_str());
    return 0;
  }
  if (*fixture) {
    const sk_status st = sk_write_demo(common.out.c_str(), rows, fixture_seed);
    if (st != SK_OK) return report_failure(st);
    std::printf("wrote fixture and sample config to %s\n", common.out.c_str());
    return 0;
  }
  return 0;
}
