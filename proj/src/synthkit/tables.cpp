#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "synthkit/analysis.hpp"
#include "synthkit/csv.hpp"
#include "synthkit/error.hpp"
#include "synthkit/experiment.hpp"

namespace synthkit {

namespace fs = std::filesystem;

namespace {

using Combo = std::pair<std::string, std::size_t>;  // (spec label, m)

// Means over repetitions, keyed by combination then "metric@scope".
struct Means {
  std::vector<Combo> order;
  std::map<Combo, std::map<std::string, std::pair<double, std::size_t>>> values;

  explicit Means(const std::vector<ReportRow>& rows) {
    for (const auto& r : rows) {
      if (r.metric == "error" || !std::isfinite(r.value)) continue;
      Combo c{r.spec_label, r.m};
      auto [it, fresh] = values.try_emplace(c);
      if (fresh) order.push_back(c);
      auto& acc = it->second[r.metric + "@" + r.scope];
      acc.first += r.value;
      ++acc.second;
    }
  }

  std::optional<double> get(const Combo& c, const std::string& metric, const std::string& scope) const {
    auto it = values.find(c);
    if (it == values.end()) return std::nullopt;
    auto jt = it->second.find(metric + "@" + scope);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second.first / static_cast<double>(jt->second.second);
  }

  bool has(const std::string& metric, const std::string& scope = {}) const {
    for (const auto& [c, m] : values) {
      for (const auto& [key, v] : m) {
        if (scope.empty() ? key.rfind(metric + "@", 0) == 0 : key == metric + "@" + scope) return true;
      }
    }
    return false;
  }
};

std::string num(std::optional<double> v) { return v ? csv::format_double(*v) : std::string("NA"); }

void write_file(const fs::path& p, const std::string& text, std::vector<std::string>& written) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + p.string() + "'");
  out << text;
  written.push_back(p.string());
}

std::string line(std::initializer_list<std::string> fields) {
  std::ostringstream out;
  csv::write_record(out, csv::Record(fields));
  return out.str();
}

struct Timing {
  double seconds = 0.0;
  std::size_t datasets = 0;
};

std::map<Combo, Timing> read_timings(const fs::path& dir) {
  std::map<Combo, Timing> out;
  const fs::path p = dir / "timings.csv";
  if (!fs::exists(p)) return out;
  const auto records = csv::read_file(p.string());
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() < 5) continue;
    double m = 0;
    double datasets = 0;
    double secs = 0;
    if (!csv::parse_double(r[1], m) || !csv::parse_double(r[3], datasets) || !csv::parse_double(r[4], secs)) continue;
    auto& t = out[{r[0], static_cast<std::size_t>(m)}];
    t.seconds += secs;
    t.datasets += static_cast<std::size_t>(datasets);
  }
  return out;
}

}  // namespace

std::vector<std::string> emit_tables(const std::string& report_dir, const std::string& out_dir,
                                     const TableOptions& options) {
  const fs::path dir(report_dir);
  const auto rows = load_report((dir / "report.csv").string());
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "report is empty");
  const Means means(rows);
  if (means.order.empty()) fail(ErrorCode::InvalidArgument, "report holds only error rows");

  static const std::vector<std::string> all_tables{"mpe_apo", "series", "kl", "simple_vs_selective", "apo_vs_time",
                                                   "correlations"};
  const bool automatic = options.tables.empty();
  const std::vector<std::string> requested = automatic ? all_tables : options.tables;
  for (const auto& t : requested) {
    if (std::find(all_tables.begin(), all_tables.end(), t) == all_tables.end()) {
      fail(ErrorCode::InvalidArgument, "unknown table '" + t + "'");
    }
  }
  auto wanted = [&](const std::string& t) { return std::find(requested.begin(), requested.end(), t) != requested.end(); };
  // Explicit requests fail loudly on missing metrics; automatic mode skips.
  auto available = [&](bool ok, const std::string& table, const std::string& what) {
    if (ok) return true;
    if (!automatic) fail(ErrorCode::InvalidArgument, "table '" + table + "' needs metric " + what + " in the report");
    return false;
  };

  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + out_dir + "': " + ec.message());
  std::vector<std::string> written;

  if (wanted("mpe_apo") && available(means.has("apo90", "mean_point"), "mpe_apo", "apo90 (mean_point)")) {
    std::string text = "spec_label,m,apo90,avg_cio\n";
    for (const auto& c : means.order) {
      text += line({c.first, std::to_string(c.second), num(means.get(c, "apo90", "mean_point")),
                    num(means.get(c, "avg_cio", "mean_point"))});
    }
    write_file(out / "mpe_apo.csv", text, written);
  }

  if (wanted("series") && available(means.has("avg_cio", "regression"), "series", "avg_cio (regression)")) {
    std::vector<Combo> sorted = means.order;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const Combo& a, const Combo& b) {
      auto rank = [&](const std::string& s) {
        return std::find_if(means.order.begin(), means.order.end(), [&](const Combo& c) { return c.first == s; }) -
               means.order.begin();
      };
      return rank(a.first) != rank(b.first) ? rank(a.first) < rank(b.first) : a.second < b.second;
    });
    std::string text = "series,x,avg_cio,apo90\n";
    for (const auto& c : sorted) {
      if (!means.get(c, "avg_cio", "regression")) continue;
      text += line({c.first, std::to_string(c.second), num(means.get(c, "avg_cio", "regression")),
                    num(means.get(c, "apo90", "regression"))});
    }
    write_file(out / "series.csv", text, written);
  }

  if (wanted("kl") && available(means.has("kl_norm"), "kl", "kl_norm")) {
    std::string text = "spec_label,m,variable,kl_norm\n";
    for (const auto& c : means.order) {
      for (const auto& [key, acc] : means.values.at(c)) {
        if (key.rfind("kl_norm@var:", 0) != 0) continue;
        text += line({c.first, std::to_string(c.second), key.substr(12),
                      csv::format_double(acc.first / static_cast<double>(acc.second))});
      }
      if (auto avg = means.get(c, "kl_norm_avg", "kl")) {
        text += line({c.first, std::to_string(c.second), "(average)", csv::format_double(*avg)});
      }
    }
    write_file(out / "kl.csv", text, written);
  }

  if (wanted("simple_vs_selective")) {
    std::vector<std::pair<Combo, Combo>> pairs;
    for (const auto& c : means.order) {
      const std::string suffix = "+sel";
      if (c.first.size() <= suffix.size() || c.first.compare(c.first.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
      const Combo simple{c.first.substr(0, c.first.size() - suffix.size()), c.second};
      if (means.values.count(simple)) pairs.emplace_back(simple, c);
    }
    if (available(!pairs.empty(), "simple_vs_selective", "pairs of simple and '+sel' specs")) {
      std::string text = "spec_label,m,simple_apo,selective_apo,fits,simple_wins,selective_wins,simple_ratio,selective_ratio\n";
      for (const auto& [simple, sel] : pairs) {
        double sw = 0.0;
        double lw = 0.0;
        std::size_t fits = 0;
        for (const auto& [key, acc] : means.values.at(simple)) {
          if (key.rfind("fit_avg_cio@", 0) != 0) continue;
          const std::string scope = key.substr(12);
          auto other = means.get(sel, "fit_avg_cio", scope);
          if (!other) continue;
          const double mine = acc.first / static_cast<double>(acc.second);
          ++fits;
          if (mine > *other) {
            sw += 1.0;
          } else if (*other > mine) {
            lw += 1.0;
          } else {
            sw += 0.5;
            lw += 0.5;
          }
        }
        const double f = static_cast<double>(fits);
        text += line({simple.first, std::to_string(simple.second), num(means.get(simple, "apo90", "regression")),
                      num(means.get(sel, "apo90", "regression")), std::to_string(fits), csv::format_double(sw),
                      csv::format_double(lw), fits ? csv::format_double(sw / f) : "NA",
                      fits ? csv::format_double(lw / f) : "NA"});
      }
      write_file(out / "simple_vs_selective.csv", text, written);
    }
  }

  if (wanted("apo_vs_time")) {
    const auto timings = read_timings(dir);
    if (available(!timings.empty() && means.has("apo90"), "apo_vs_time", "apo90 and timings.csv")) {
      std::string text = "spec_label,m,apo90,seconds_per_dataset,seconds_per_100\n";
      for (const auto& c : means.order) {
        auto t = timings.find(c);
        if (t == timings.end() || t->second.datasets == 0) continue;
        auto a = means.get(c, "apo90", "regression");
        if (!a) a = means.get(c, "apo90", "mean_point");
        const double per = t->second.seconds / static_cast<double>(t->second.datasets);
        text += line({c.first, std::to_string(c.second), num(a), csv::format_double(per), csv::format_double(100.0 * per)});
      }
      write_file(out / "apo_vs_time.csv", text, written);
    }
  }

  if (wanted("correlations")) {
    MetricTable table;
    for (const auto& c : means.order) {
      auto& m = table[c.first + "@m=" + std::to_string(c.second)];
      if (auto v = means.get(c, "avg_cio", "regression")) m["avg_cio"] = *v;
      if (auto v = means.get(c, "apo90", "regression")) m["apo90"] = *v;
      if (auto v = means.get(c, "kl_norm_avg", "kl")) m["kl_norm_avg"] = *v;
      if (auto v = means.get(c, "adhoc_dev_avg", "adhoc")) m["adhoc_dev_avg"] = *v;
      for (const auto& [key, acc] : means.values.at(c)) {
        if (key.rfind("class_dev@", 0) == 0) m["class_dev"] = acc.first / static_cast<double>(acc.second);
      }
    }
    if (available(table.size() >= 3, "correlations", "at least 3 synthesizer combinations")) {
      const auto battery = correlation_battery(table, default_correlation_pairs());
      std::string text = "x,y,r,n,note\n";
      for (const auto& r : battery.results) {
        text += line({r.x_name, r.y_name, csv::format_double(r.r), std::to_string(r.n), ""});
      }
      for (const auto& [pair, reason] : battery.skipped) {
        const auto tilde = pair.find('~');
        text += line({pair.substr(0, tilde), pair.substr(tilde + 1), "NA", "0", "skipped: " + reason});
      }
      write_file(out / "correlations.csv", text, written);
    }
  }

  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : means.order) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [key, acc] : means.values.at(c)) metrics[key] = acc.first / static_cast<double>(acc.second);
    doc.push_back({{"spec_label", c.first}, {"m", c.second}, {"metrics", metrics}});
  }
  write_file(out / "summary.json", nlohmann::json{{"cells", doc}}.dump(2) + "\n", written);
  return written;
}

}  // namespace synthkit
