#include "synthkit/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "synthkit/csv.hpp"
#include "synthkit/error.hpp"
#include "synthkit/parallel.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so an interrupted run never leaves a half-written file.
void write_atomic(const fs::path& p, const std::string& text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) fail(ErrorCode::Io, "cannot rename '" + tmp.string() + "': " + ec.message());
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

std::string safe_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

std::string cell_name(const std::string& key, std::size_t m, std::size_t rep) {
  return safe_name(key) + "_m" + std::to_string(m) + "_k" + std::to_string(rep);
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

KlDirection parse_direction(const std::string& s) {
  if (s == "orig_to_syn") return KlDirection::OrigToSyn;
  if (s == "syn_to_orig") return KlDirection::SynToOrig;
  if (s == "symmetric") return KlDirection::Symmetric;
  fail(ErrorCode::Config, "unknown KL direction '" + s + "'");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end()) {
      fail(ErrorCode::Config, "unknown key '" + k + "' in " + where);
    }
  }
}

}  // namespace

// ---- config ---------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("experiment config: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::Config, "experiment config must be an object");
  check_keys(doc,
             {"dataset", "schema", "missing_tokens", "preprocess", "grid", "m", "proper", "k", "fits", "adhoc",
              "metrics", "rule", "level", "kl", "apo", "cio_variant", "k_donors", "min_leaf", "seed", "out"},
             "experiment config");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    cfg.dataset_path = resolve(base_dir, doc.at("dataset").get<std::string>());
    cfg.schema_path = resolve(base_dir, doc.at("schema").get<std::string>());
    if (doc.contains("missing_tokens")) {
      const auto tokens = doc["missing_tokens"].get<std::vector<std::string>>();
      cfg.missing_tokens = std::set<std::string>(tokens.begin(), tokens.end());
    }

    for (const auto& s : doc.value("preprocess", json::array())) {
      PreprocessStep step;
      const std::string op = s.at("op").get<std::string>();
      if (op == "drop") {
        step.op = PreprocessStep::Op::Drop;
        step.column = s.at("column").get<std::string>();
      } else if (op == "coarsen") {
        step.op = PreprocessStep::Op::Coarsen;
        step.column = s.at("column").get<std::string>();
        step.mapping.column = step.column;
        for (const auto& [from, to] : s.at("mapping").items()) step.mapping.mapping.emplace_back(from, to.get<std::string>());
      } else if (op == "head") {
        step.op = PreprocessStep::Op::Head;
        step.n = s.at("n").get<std::size_t>();
      } else if (op == "replace_missing") {
        step.op = PreprocessStep::Op::ReplaceMissing;
        step.seed = s.value("seed", std::uint64_t{0});
      } else {
        fail(ErrorCode::Config, "unknown preprocessing op '" + op + "'");
      }
      cfg.preprocess.push_back(std::move(step));
    }

    for (const auto& g : doc.at("grid")) {
      GridTemplate t;
      if (g.is_string()) {
        t.label = g.get<std::string>();
      } else {
        check_keys(g, {"label", "predictors", "selective", "order"}, "grid entry");
        t.label = g.at("label").get<std::string>();
        const std::string preds = g.value("predictors", "simple");
        if (preds != "simple" && preds != "selective") {
          fail(ErrorCode::Config, "grid predictors must be 'simple' or 'selective'");
        }
        t.selective = preds == "selective";
        if (t.selective) {
          for (const auto& [target, list] : g.at("selective").items()) {
            t.selective_sets[target] = list.get<std::vector<std::string>>();
          }
        }
        t.own_order = g.value("order", std::vector<std::string>{});
      }
      cfg.grid.push_back(std::move(t));
    }

    cfg.m_values = scalar_or_list<std::size_t>(doc.at("m"));
    if (doc.contains("proper")) cfg.proper_values = scalar_or_list<bool>(doc["proper"]);
    cfg.k = doc.value("k", std::size_t{5});

    if (doc.contains("fits")) {
      const auto& f = doc["fits"];
      cfg.fits = f.is_string() ? load_fitspecs(resolve(base_dir, f.get<std::string>())) : parse_fitspecs(f.dump());
    }
    if (doc.contains("adhoc")) {
      const auto& a = doc["adhoc"];
      cfg.adhoc = a.is_string() ? load_predicates(resolve(base_dir, a.get<std::string>())) : parse_predicates(a.dump());
    }

    if (doc.contains("metrics")) {
      const auto& mt = doc["metrics"];
      check_keys(mt, {"mean_point", "regression", "kl", "kl_normalize", "classification", "adhoc"}, "metrics");
      cfg.metrics.mean_point = mt.value("mean_point", true);
      cfg.metrics.regression = mt.value("regression", true);
      cfg.metrics.kl = mt.value("kl", true);
      cfg.metrics.kl_normalize = mt.value("kl_normalize", cfg.metrics.kl);
      cfg.metrics.adhoc = mt.value("adhoc", !cfg.adhoc.empty());
      if (mt.contains("classification") && mt["classification"].is_object()) {
        cfg.metrics.class_target = mt["classification"].at("target").get<std::string>();
        cfg.metrics.class_holdout = mt["classification"].value("holdout", false);
      }
    }

    cfg.rule = parse_rule(doc.value("rule", "Ts"));
    cfg.level = doc.value("level", 0.95);
    if (doc.contains("kl")) {
      const auto& k = doc["kl"];
      check_keys(k, {"bins", "smoothing", "pseudo_count", "direction"}, "kl");
      cfg.kl.bins = k.value("bins", cfg.kl.bins);
      cfg.kl.smoothing = k.value("smoothing", cfg.kl.smoothing);
      cfg.kl.pseudo_count = k.value("pseudo_count", cfg.kl.pseudo_count);
      cfg.kl.direction = parse_direction(k.value("direction", "orig_to_syn"));
    }
    if (doc.contains("apo")) {
      cfg.apo.threshold = doc["apo"].value("threshold", cfg.apo.threshold);
      cfg.apo.inclusive = doc["apo"].value("inclusive", cfg.apo.inclusive);
    }
    const std::string variant = doc.value("cio_variant", "own_width");
    if (variant == "own_width") {
      cfg.cio_variant = CioVariant::OwnWidth;
    } else if (variant == "printed") {
      cfg.cio_variant = CioVariant::Printed;
    } else {
      fail(ErrorCode::Config, "unknown cio_variant '" + variant + "'");
    }
    cfg.k_donors = doc.value("k_donors", cfg.k_donors);
    cfg.min_leaf = doc.value("min_leaf", cfg.min_leaf);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = resolve(base_dir, doc.value("out", std::string("out")));
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("experiment config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, std::string("experiment config: ") + e.what());
  }

  // Output location and seed overrides do not change the fingerprint body.
  json body = doc;
  body.erase("out");
  body.erase("seed");
  cfg.canonical = body.dump();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const fs::path p(path);
  return parse_config(read_text(p), p.parent_path().string());
}

std::vector<GridEntry> ExperimentConfig::entries() const {
  std::vector<GridEntry> out;
  for (const auto& t : grid) {
    const bool already_proper = parse_label(t.label).proper;
    std::vector<bool> variants = already_proper ? std::vector<bool>{true} : proper_values;
    for (bool proper : variants) {
      GridEntry e;
      e.label = already_proper || !proper ? t.label : t.label + "T";
      e.key = e.label + (t.selective ? "+sel" : "");
      e.source = t;
      out.push_back(std::move(e));
    }
  }
  return out;
}

GridEntry ExperimentConfig::entry(const std::string& key) const {
  for (auto& e : entries()) {
    if (e.key == key) return e;
  }
  fail(ErrorCode::InvalidArgument, "spec '" + key + "' is not in the grid");
}

void ExperimentConfig::validate() const {
  if (k < 1) fail(ErrorCode::Config, "k must be at least 1");
  if (m_values.empty()) fail(ErrorCode::Config, "m list must be non-empty");
  for (auto m : m_values) {
    if (m < 1) fail(ErrorCode::Config, "every m must be at least 1");
    if (rule == CombiningRule::Tp && m < 2) fail(ErrorCode::Config, "the Tp rule needs m >= 2");
  }
  if (std::set<std::size_t>(m_values.begin(), m_values.end()).size() != m_values.size()) {
    fail(ErrorCode::Config, "m list has duplicates");
  }
  if (proper_values.empty()) fail(ErrorCode::Config, "proper list must be non-empty");
  if (grid.empty()) fail(ErrorCode::Config, "grid must be non-empty");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::Config, "level must lie in (0, 1)");
  if (k_donors < 1) fail(ErrorCode::Config, "k_donors must be at least 1");
  if (min_leaf < 1) fail(ErrorCode::Config, "min_leaf must be at least 1");
  std::set<std::string> keys;
  for (const auto& t : grid) {
    try {
      parse_label(t.label);
    } catch (const Error& e) {
      fail(ErrorCode::Config, e.what());
    }
  }
  bool has_sample = false;
  for (const auto& e : entries()) {
    if (!keys.insert(e.key).second) fail(ErrorCode::Config, "duplicate grid label '" + e.key + "'");
    has_sample = has_sample || e.key == "S";
  }
  if (metrics.kl && metrics.kl_normalize && !has_sample) {
    fail(ErrorCode::Config, "KL normalization needs the Sample synthesizer 'S' in the grid");
  }
}

Dataset load_original(const ExperimentConfig& cfg) {
  const Schema schema = load_schema(cfg.schema_path);
  Dataset ds = load_csv(cfg.dataset_path, schema, cfg.missing_tokens);
  for (const auto& step : cfg.preprocess) {
    switch (step.op) {
      case PreprocessStep::Op::Drop: ds = drop_column(ds, step.column); break;
      case PreprocessStep::Op::Coarsen: ds = coarsen_levels(ds, step.mapping); break;
      case PreprocessStep::Op::Head: ds = head_n(ds, step.n); break;
      case PreprocessStep::Op::ReplaceMissing: ds = replace_missing(ds, step.seed); break;
    }
  }
  if (ds.has_missing()) {
    fail(ErrorCode::Config, "dataset has missing cells; add a replace_missing preprocessing step");
  }
  return ds;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& key, std::size_t m, std::size_t rep) {
  return derive_seed(mix64(master ^ hash_string(key)), m, rep);
}

SynthesizerSpec build_spec(const ExperimentConfig& cfg, const Schema& schema, const GridEntry& entry, std::size_t m,
                           std::size_t rep) {
  LabelOptions lo;
  lo.min_leaf = cfg.min_leaf;
  lo.k_donors = cfg.k_donors;
  for (const auto& name : entry.source.own_order) lo.own_order.push_back(schema.index_of(name));
  if (entry.source.selective) {
    SelectiveSets sets;
    for (const auto& [target, preds] : entry.source.selective_sets) {
      auto& dst = sets[schema.index_of(target)];
      for (const auto& p : preds) dst.push_back(schema.index_of(p));
    }
    lo.selective = std::move(sets);
  }
  return spec_from_label(schema, entry.label, m, cell_seed(cfg.seed, entry.key, m, rep), lo);
}

// ---- report rows ------------------------------------------------------------

std::string report_header() { return "spec_label,m,k,metric,scope,value\n"; }

std::string format_row(const ReportRow& row) {
  std::ostringstream out;
  csv::write_record(out, {row.spec_label, std::to_string(row.m), std::to_string(row.k), row.metric, row.scope,
                          csv::format_double(row.value)});
  return out.str();
}

std::vector<ReportRow> parse_report(const std::string& csv_text) {
  std::istringstream in(csv_text);
  const auto records = csv::read(in);
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (i == 0 && !r.empty() && r[0] == "spec_label") continue;
    if (r.size() != 6) fail(ErrorCode::Parse, "report line " + std::to_string(i + 1) + ": expected 6 fields");
    ReportRow row;
    row.spec_label = r[0];
    double m = 0;
    double k = 0;
    if (!csv::parse_double(r[1], m) || !csv::parse_double(r[2], k) || !csv::parse_double(r[5], row.value)) {
      fail(ErrorCode::Parse, "report line " + std::to_string(i + 1) + ": bad number");
    }
    row.m = static_cast<std::size_t>(m);
    row.k = static_cast<std::size_t>(k);
    row.metric = r[3];
    row.scope = r[4];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> load_report(const std::string& path) { return parse_report(read_text(path)); }

// ---- evaluation -----------------------------------------------------------

Evaluator::Evaluator(const ExperimentConfig& cfg, const Dataset& original) : cfg_(cfg), original_(original) {
  const Schema& schema = original.schema();
  if (cfg.metrics.mean_point) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (!schema[c].kind.is_numeric()) continue;
      const auto pe = mean_point_estimand(original, c);
      mean_ci_.emplace_back(c, confidence_interval(pe.q, pe.v, cfg.level));
    }
  }
  if (cfg.metrics.regression) {
    for (const auto& f : cfg.fits) {
      FitBaseline b;
      b.fit = f;
      try {
        b.coefficients = regression_estimands(original, f);
      } catch (const std::exception& e) {
        b.error = e.what();
      }
      fits_.push_back(std::move(b));
    }
  }
  if (cfg.metrics.class_target) {
    const auto c = schema.find(*cfg.metrics.class_target);
    if (!c || !schema[*c].kind.is_categorical()) {
      fail(ErrorCode::Config, "classification target '" + *cfg.metrics.class_target + "' is not a categorical column");
    }
  }
  if (cfg.metrics.adhoc) {
    for (const auto& p : cfg.adhoc) {
      try {
        adhoc_proportion(original, p);
      } catch (const Error& e) {
        fail(ErrorCode::Config, "ad-hoc analysis '" + p.id + "': " + e.what());
      }
    }
  }
}

std::vector<ReportRow> Evaluator::evaluate(const std::string& key, std::size_t m, std::size_t rep,
                                           std::span<const Dataset> synthetic, std::uint64_t seed) const {
  std::vector<ReportRow> rows;
  auto add = [&](const std::string& metric, const std::string& scope, double value) {
    rows.push_back(ReportRow{key, m, rep, metric, scope, value});
  };
  auto add_error = [&](const std::string& scope, const std::string& message) { add("error", scope + ": " + message, kNaN); };
  const Schema& schema = original_.schema();

  auto synthetic_ci = [&](const EstimateSet& es) { return confidence_interval(combine(es, cfg_.rule), cfg_.level); };

  if (cfg_.metrics.mean_point && !mean_ci_.empty()) {
    try {
      std::vector<double> overlaps;
      for (const auto& [col, oci] : mean_ci_) {
        EstimateSet es;
        es.id = schema[col].name;
        for (const auto& ds : synthetic) {
          const auto pe = mean_point_estimand(ds, col);
          es.q.push_back(pe.q);
          es.v.push_back(pe.v);
        }
        const double o = cio(oci, synthetic_ci(es), cfg_.cio_variant);
        add("cio", "mean_point:" + schema[col].name, o);
        overlaps.push_back(o);
      }
      add("avg_cio", "mean_point", std::accumulate(overlaps.begin(), overlaps.end(), 0.0) / static_cast<double>(overlaps.size()));
      add("apo90", "mean_point", apo(overlaps, cfg_.apo));
    } catch (const std::exception& e) {
      add_error("mean_point", e.what());
    }
  }

  if (cfg_.metrics.regression && !fits_.empty()) {
    std::vector<FitOverlaps> done;
    for (const auto& fb : fits_) {
      const std::string scope = "fit:" + fb.fit.id;
      if (!fb.error.empty()) {
        add_error(scope, "original data: " + fb.error);
        continue;
      }
      try {
        std::vector<std::vector<CoefficientEstimate>> per;
        for (const auto& ds : synthetic) per.push_back(regression_estimands(ds, fb.fit));
        FitOverlaps fo{fb.fit.id, {}};
        std::vector<ReportRow> coef_rows;
        for (const auto& coef : fb.coefficients) {
          EstimateSet es;
          es.id = coef.name;
          for (std::size_t i = 0; i < per.size(); ++i) {
            auto it = std::find_if(per[i].begin(), per[i].end(), [&](const CoefficientEstimate& c) { return c.name == coef.name; });
            if (it == per[i].end()) {
              fail(ErrorCode::Fit, "coefficient '" + coef.name + "' absent in synthetic dataset " + std::to_string(i + 1));
            }
            es.q.push_back(it->q);
            es.v.push_back(it->v);
          }
          const double o = cio(confidence_interval(coef.q, coef.v, cfg_.level), synthetic_ci(es), cfg_.cio_variant);
          coef_rows.push_back(ReportRow{key, m, rep, "cio", scope + ":" + coef.name, o});
          fo.overlaps.push_back(o);
        }
        rows.insert(rows.end(), coef_rows.begin(), coef_rows.end());
        add("fit_avg_cio", scope,
            std::accumulate(fo.overlaps.begin(), fo.overlaps.end(), 0.0) / static_cast<double>(fo.overlaps.size()));
        done.push_back(std::move(fo));
      } catch (const std::exception& e) {
        add_error(scope, e.what());
      }
    }
    if (!done.empty()) {
      const auto summary = aggregate({done}, cfg_.apo);
      add("avg_cio", "regression", summary.average_cio);
      add("apo90", "regression", summary.apo);
    }
  }

  if (cfg_.metrics.kl) {
    try {
      double total = 0.0;
      for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto orig = original_.values(c);
        double raw = 0.0;
        for (const auto& ds : synthetic) {
          const auto syn = ds.values(c);
          raw += kl_divergence(orig, syn, schema[c].kind, cfg_.kl, schema[c].name).raw;
        }
        raw /= static_cast<double>(synthetic.size());
        add("kl_raw", "var:" + schema[c].name, raw);
        total += raw;
      }
      add("kl_raw_avg", "kl", total / static_cast<double>(schema.size()));
    } catch (const std::exception& e) {
      add_error("kl", e.what());
    }
  }

  if (cfg_.metrics.class_target) {
    const std::string scope = "class:" + *cfg_.metrics.class_target;
    try {
      ClassifyOptions co;
      co.min_leaf = cfg_.min_leaf;
      co.holdout = cfg_.metrics.class_holdout;
      co.seed = seed;
      const auto r = classify_compare(original_, synthetic, *cfg_.metrics.class_target, co, key);
      add("class_acc", scope, r.mean_accuracy);
      add("class_baseline", scope, r.baseline_accuracy);
      add("class_agreement", scope, r.agreement);
      add("class_dev", scope, r.deviation());
    } catch (const std::exception& e) {
      add_error(scope, e.what());
    }
  }

  if (cfg_.metrics.adhoc && !cfg_.adhoc.empty()) {
    double dev = 0.0;
    std::size_t n = 0;
    for (const auto& p : cfg_.adhoc) {
      const std::string scope = "adhoc:" + p.id;
      try {
        const auto r = adhoc_compare(original_, synthetic, p, key);
        add("adhoc_orig", scope, r.original);
        add("adhoc_prop", scope, r.synthetic.front().second);
        add("adhoc_dev", scope, r.deviations.front());
        dev += r.deviations.front();
        ++n;
      } catch (const std::exception& e) {
        add_error(scope, e.what());
      }
    }
    if (n) add("adhoc_dev_avg", "adhoc", dev / static_cast<double>(n));
  }
  return rows;
}

std::vector<ReportRow> normalize_kl_rows(const std::vector<ReportRow>& rows) {
  struct CellKey {
    std::string label;
    std::size_t m;
    std::size_t k;
    auto operator<=>(const CellKey&) const = default;
  };
  std::vector<CellKey> order;
  std::map<CellKey, std::vector<KlScore>> scores;
  for (const auto& r : rows) {
    if (r.metric != "kl_raw") continue;
    CellKey key{r.spec_label, r.m, r.k};
    auto [it, fresh] = scores.try_emplace(key);
    if (fresh) order.push_back(key);
    KlScore s;
    s.variable = r.scope.substr(4);  // strip "var:"
    s.raw = r.value;
    it->second.push_back(std::move(s));
  }
  std::vector<ReportRow> out;
  for (const auto& key : order) {
    auto base = scores.find(CellKey{"S", key.m, key.k});
    if (base == scores.end()) {
      out.push_back({key.label, key.m, key.k, "error", "kl: no Sample baseline for this m and repetition", kNaN});
      continue;
    }
    try {
      const auto n = normalize_kl(scores.at(key), base->second);
      for (const auto& s : n.scores) out.push_back({key.label, key.m, key.k, "kl_norm", "var:" + s.variable, *s.normalized});
      out.push_back({key.label, key.m, key.k, "kl_norm_avg", "kl", n.average});
    } catch (const std::exception& e) {
      out.push_back({key.label, key.m, key.k, "error", std::string("kl: ") + e.what(), kNaN});
    }
  }
  return out;
}

// ---- experiment -----------------------------------------------------------

namespace {

struct CellTask {
  const GridEntry* entry;
  std::size_t m;
  std::size_t rep;
  std::string name;
};

std::string summarize(const std::vector<ReportRow>& rows) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  using Key = std::tuple<std::string, std::size_t, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, Acc> acc;
  for (const auto& r : rows) {
    if (r.metric == "error" || !std::isfinite(r.value)) continue;
    Key key{r.spec_label, r.m, r.metric, r.scope};
    auto [it, fresh] = acc.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.sum += r.value;
    ++it->second.n;
  }
  std::ostringstream out;
  out << "spec_label,m,metric,scope,mean,reps\n";
  for (const auto& key : order) {
    const auto& a = acc.at(key);
    csv::write_record(out, {std::get<0>(key), std::to_string(std::get<1>(key)), std::get<2>(key), std::get<3>(key),
                            csv::format_double(a.sum / static_cast<double>(a.n)), std::to_string(a.n)});
  }
  return out.str();
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const Dataset original = load_original(cfg);
  const Evaluator evaluator(cfg, original);
  const auto entries = cfg.entries();

  // Fail fast on specs that cannot be built (bad order or selective sets).
  for (const auto& e : entries) {
    try {
      build_spec(cfg, original.schema(), e, 1, 1);
    } catch (const Error& err) {
      fail(ErrorCode::Config, "grid entry '" + e.key + "': " + err.what());
    }
  }

  std::vector<CellTask> tasks;
  for (const auto& e : entries) {
    for (auto m : cfg.m_values) {
      for (std::size_t rep = 1; rep <= cfg.k; ++rep) tasks.push_back({&e, m, rep, cell_name(e.key, m, rep)});
    }
  }

  const fs::path out(cfg.out_dir);
  const fs::path cells_dir = out / "cells";
  std::error_code ec;
  fs::create_directories(cells_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + cells_dir.string() + "': " + ec.message());

  const std::string fingerprint =
      hex64(hash_string(cfg.canonical + "|" + std::to_string(cfg.seed) + "|" + read_text(cfg.dataset_path) + "|" +
                        read_text(cfg.schema_path)));
  const fs::path manifest_path = out / "manifest.json";
  json manifest{{"fingerprint", fingerprint}, {"cells", json::object()}};
  if (options.resume && fs::exists(manifest_path)) {
    try {
      json previous = json::parse(read_text(manifest_path));
      if (previous.value("fingerprint", "") == fingerprint) manifest["cells"] = previous.value("cells", json::object());
    } catch (const json::exception&) {
      // Unreadable manifest: recompute everything.
    }
  }

  RunSummary summary;
  summary.cells = tasks.size();
  std::mutex mu;
  parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
    const CellTask& t = tasks[i];
    const fs::path rows_path = cells_dir / (t.name + ".csv");
    const fs::path timing_path = cells_dir / (t.name + ".timing");
    {
      std::lock_guard lock(mu);
      if (manifest["cells"].contains(t.name) && fs::exists(rows_path)) {
        ++summary.cells_skipped;
        return;
      }
    }
    std::vector<ReportRow> rows;
    bool generated = false;
    double seconds = 0.0;
    try {
      const auto spec = build_spec(cfg, original.schema(), *t.entry, t.m, t.rep);
      const auto start = std::chrono::steady_clock::now();
      const auto set = synthesize(original, spec, 1);
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      generated = true;
      rows = evaluator.evaluate(t.entry->key, t.m, t.rep, set.datasets, spec.seed);
    } catch (const std::exception& e) {
      rows.push_back({t.entry->key, t.m, t.rep, "error", std::string("cell: ") + e.what(), kNaN});
    }
    std::string text;
    for (const auto& r : rows) text += format_row(r);
    write_atomic(rows_path, text);
    if (generated) {
      std::ostringstream timing;
      timing << t.m << ',' << csv::format_double(seconds) << '\n';
      write_atomic(timing_path, timing.str());
    }
    std::lock_guard lock(mu);
    ++summary.cells_run;
    if (generated) {
      summary.datasets_generated += t.m;
      manifest["cells"][t.name] = {{"spec", t.entry->key}, {"m", t.m}, {"k", t.rep}, {"datasets", t.m}};
      write_atomic(manifest_path, manifest.dump(2) + "\n");
    }
  });
  write_atomic(manifest_path, manifest.dump(2) + "\n");
  for (const auto& [name, cell] : manifest["cells"].items()) summary.datasets_recorded += cell.value("datasets", std::size_t{0});

  // Single-writer assembly in grid order.
  std::string report = report_header();
  std::string timings = "spec_label,m,k,datasets,seconds,seconds_per_dataset\n";
  std::vector<ReportRow> all;
  for (const auto& t : tasks) {
    const std::string text = read_text(cells_dir / (t.name + ".csv"));
    report += text;
    auto rows = parse_report(text);
    all.insert(all.end(), rows.begin(), rows.end());
    const fs::path timing_path = cells_dir / (t.name + ".timing");
    if (fs::exists(timing_path)) {
      std::istringstream in(read_text(timing_path));
      std::size_t datasets = 0;
      char comma = 0;
      std::string secs;
      in >> datasets >> comma >> secs;
      double s = 0.0;
      csv::parse_double(secs, s);
      TimingRecord tr{t.entry->key, t.m, t.rep, datasets, s};
      std::ostringstream line;
      csv::write_record(line, {tr.spec_label, std::to_string(tr.m), std::to_string(tr.k), std::to_string(tr.datasets),
                               csv::format_double(tr.seconds), csv::format_double(tr.per_dataset())});
      timings += line.str();
    }
  }
  if (cfg.metrics.kl && cfg.metrics.kl_normalize) {
    for (const auto& r : normalize_kl_rows(all)) {
      report += format_row(r);
      all.push_back(r);
    }
  }
  for (const auto& r : all) summary.error_rows += r.metric == "error" ? 1 : 0;

  summary.report_path = (out / "report.csv").string();
  write_atomic(out / "report.csv", report);
  write_atomic(out / "summary.csv", summarize(all));
  write_atomic(out / "timings.csv", timings);
  return summary;
}

TimingRecord benchmark_generation(const ExperimentConfig& cfg, const std::string& key, std::size_t count) {
  if (count == 0) fail(ErrorCode::InvalidArgument, "benchmark count must be at least 1");
  const GridEntry entry = cfg.entry(key);
  const Dataset original = load_original(cfg);
  const auto spec = build_spec(cfg, original.schema(), entry, count, 1);
  spec.validate(original.schema());

  const fs::path dir = fs::path(cfg.out_dir) / "bench" / safe_name(key);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());

  const std::size_t n = original.rows();
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) {
    const auto rows = spec.proper ? bootstrap_rows(n, spec.seed, i) : identity;
    const Dataset ds = synthesize_one(original, spec, i, rows);
    write_csv(ds, (dir / ("syn_" + std::to_string(i + 1) + ".csv")).string());
  }
  TimingRecord tr{key, count, 1, count,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};

  const fs::path log = fs::path(cfg.out_dir) / "bench_timings.csv";
  const bool fresh = !fs::exists(log);
  std::ofstream out(log, std::ios::app);
  if (!out) fail(ErrorCode::Io, "cannot write '" + log.string() + "'");
  if (fresh) out << "spec_label,datasets,seconds,seconds_per_dataset\n";
  csv::write_record(out, {tr.spec_label, std::to_string(tr.datasets), csv::format_double(tr.seconds),
                          csv::format_double(tr.per_dataset())});
  return tr;
}

TimingRecord generate(const ExperimentConfig& cfg, const std::string& key, std::size_t m, const std::string& dir,
                      std::optional<std::uint64_t> seed, unsigned jobs) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "m must be at least 1");
  const GridEntry entry = cfg.entry(key);
  const Dataset original = load_original(cfg);
  auto spec = build_spec(cfg, original.schema(), entry, m, 1);
  if (seed) spec.seed = *seed;
  const auto start = std::chrono::steady_clock::now();
  const auto set = synthesize(original, spec, jobs);
  save_synthetic_set(set, dir);
  return TimingRecord{key, m, 1, m, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

std::vector<ReportRow> evaluate_sets(const ExperimentConfig& cfg, const std::vector<std::string>& dirs,
                                     const std::string& out_path) {
  if (dirs.empty()) fail(ErrorCode::InvalidArgument, "no synthetic sets to evaluate");
  const Dataset original = load_original(cfg);
  const Evaluator evaluator(cfg, original);
  std::vector<ReportRow> rows;
  for (const auto& d : dirs) {
    const auto set = load_synthetic_set(d, original.schema());
    const std::string key = set.label.empty() ? fs::path(d).filename().string() : set.label;
    auto r = evaluator.evaluate(key, set.datasets.size(), 1, set.datasets, set.seed);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const bool has_sample = std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.spec_label == "S"; });
  if (cfg.metrics.kl && cfg.metrics.kl_normalize && has_sample) {
    auto norm = normalize_kl_rows(rows);
    rows.insert(rows.end(), norm.begin(), norm.end());
  }
  std::string text = report_header();
  for (const auto& r : rows) text += format_row(r);
  if (!out_path.empty()) {
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_atomic(out_path, text);
  }
  return rows;
}

}  // namespace synthkit
