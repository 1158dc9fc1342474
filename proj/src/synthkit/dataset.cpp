#include "synthkit/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "synthkit/csv.hpp"
#include "synthkit/error.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

ColumnKind ColumnKind::categorical(std::vector<std::string> levels) {
  ColumnKind k;
  k.tag = Kind::Categorical;
  k.levels = std::move(levels);
  return k;
}

std::optional<std::int32_t> ColumnKind::code_of(const std::string& label) const {
  auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) return std::nullopt;
  return static_cast<std::int32_t>(it - levels.begin());
}

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) fail(ErrorCode::Schema, "schema must be non-empty");
  std::set<std::string> names;
  for (const auto& c : columns_) {
    if (c.name.empty()) fail(ErrorCode::Schema, "column name must be non-empty");
    if (!names.insert(c.name).second) fail(ErrorCode::Schema, "duplicate column name '" + c.name + "'");
    if (c.kind.is_categorical()) {
      if (c.kind.levels.empty() && !c.infer_levels) {
        fail(ErrorCode::Schema, "categorical column '" + c.name + "' has no levels");
      }
      std::set<std::string> seen(c.kind.levels.begin(), c.kind.levels.end());
      if (seen.size() != c.kind.levels.size()) {
        fail(ErrorCode::Schema, "categorical column '" + c.name + "' has duplicate levels");
      }
    } else if (!c.kind.levels.empty() || c.infer_levels) {
      fail(ErrorCode::Schema, "numeric column '" + c.name + "' cannot carry levels");
    }
  }
}

std::optional<std::size_t> Schema::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(const std::string& name) const {
  auto i = find(name);
  if (!i) fail(ErrorCode::Schema, "unknown column '" + name + "'");
  return *i;
}

Schema parse_schema(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("schema: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    fail(ErrorCode::Schema, "schema document needs a \"columns\" array");
  }
  std::vector<ColumnSpec> cols;
  for (const auto& entry : doc["columns"]) {
    ColumnSpec spec;
    spec.name = entry.value("name", "");
    const std::string kind = entry.value("kind", "");
    if (kind == "numeric") {
      spec.kind = ColumnKind::numeric();
    } else if (kind == "categorical") {
      spec.kind = ColumnKind::categorical(entry.value("levels", std::vector<std::string>{}));
      spec.infer_levels = entry.value("infer", false);
      if (spec.infer_levels && !spec.kind.levels.empty()) {
        fail(ErrorCode::Schema, "column '" + spec.name + "': \"infer\" and explicit levels are exclusive");
      }
    } else {
      fail(ErrorCode::Schema, "column '" + spec.name + "': kind must be \"numeric\" or \"categorical\"");
    }
    cols.push_back(std::move(spec));
  }
  return Schema(std::move(cols));
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open schema '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns()) {
    nlohmann::json e{{"name", c.name}};
    if (c.kind.is_numeric()) {
      e["kind"] = "numeric";
    } else {
      e["kind"] = "categorical";
      e["levels"] = c.kind.levels;
    }
    cols.push_back(std::move(e));
  }
  return nlohmann::json{{"columns", cols}}.dump(2);
}

Dataset::Dataset(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) fail(ErrorCode::Schema, "column count does not match schema");
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& spec = schema_[c];
    auto& col = columns_[c];
    const std::size_t len = spec.kind.is_numeric() ? col.numeric.size() : col.codes.size();
    if (c == 0) rows_ = len;
    if (len != rows_) fail(ErrorCode::Schema, "column '" + spec.name + "' has inconsistent length");
    if (!col.missing.empty() && col.missing.size() != len) {
      fail(ErrorCode::Schema, "column '" + spec.name + "' has a malformed missing mask");
    }
    if (std::none_of(col.missing.begin(), col.missing.end(), [](auto m) { return m != 0; })) {
      col.missing.clear();
    }
    if (spec.kind.is_categorical()) {
      const auto levels = static_cast<std::int32_t>(spec.kind.level_count());
      for (std::size_t r = 0; r < len; ++r) {
        const bool miss = !col.missing.empty() && col.missing[r];
        if (!miss && (col.codes[r] < 0 || col.codes[r] >= levels)) {
          fail(ErrorCode::Schema, "column '" + spec.name + "' holds a code outside its level set");
        }
      }
    }
  }
}

Dataset Dataset::from_values(Schema schema, const std::vector<std::vector<double>>& values) {
  if (values.size() != schema.size()) fail(ErrorCode::Schema, "column count does not match schema");
  std::vector<Column> cols(values.size());
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (schema[c].kind.is_numeric()) {
      cols[c].numeric = values[c];
    } else {
      cols[c].codes.reserve(values[c].size());
      for (double v : values[c]) cols[c].codes.push_back(static_cast<std::int32_t>(v));
    }
  }
  return Dataset(std::move(schema), std::move(cols));
}

std::span<const double> Dataset::numeric(std::size_t col) const {
  if (!schema_[col].kind.is_numeric()) fail(ErrorCode::Schema, "column '" + schema_[col].name + "' is not numeric");
  return columns_[col].numeric;
}

std::span<const std::int32_t> Dataset::codes(std::size_t col) const {
  if (!schema_[col].kind.is_categorical()) {
    fail(ErrorCode::Schema, "column '" + schema_[col].name + "' is not categorical");
  }
  return columns_[col].codes;
}

double Dataset::value(std::size_t col, std::size_t row) const {
  const auto& c = columns_[col];
  return schema_[col].kind.is_numeric() ? c.numeric[row] : static_cast<double>(c.codes[row]);
}

std::vector<double> Dataset::values(std::size_t col) const {
  const auto& c = columns_.at(col);
  if (schema_[col].kind.is_numeric()) return c.numeric;
  return std::vector<double>(c.codes.begin(), c.codes.end());
}

bool Dataset::is_missing(std::size_t col, std::size_t row) const {
  const auto& m = columns_.at(col).missing;
  return !m.empty() && m.at(row) != 0;
}

bool Dataset::has_missing() const {
  return std::any_of(columns_.begin(), columns_.end(), [](const Column& c) { return !c.missing.empty(); });
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (!(a.schema_ == b.schema_) || a.rows_ != b.rows_) return false;
  for (std::size_t c = 0; c < a.columns_.size(); ++c) {
    const auto& x = a.columns_[c];
    const auto& y = b.columns_[c];
    if (x.codes != y.codes || x.missing != y.missing || x.numeric.size() != y.numeric.size()) return false;
    for (std::size_t r = 0; r < x.numeric.size(); ++r) {
      if (std::bit_cast<std::uint64_t>(x.numeric[r]) != std::bit_cast<std::uint64_t>(y.numeric[r])) return false;
    }
  }
  return true;
}

namespace {

Dataset build_from_records(const std::vector<csv::Record>& records, const Schema& schema,
                           const std::set<std::string>& missing_tokens) {
  if (records.empty()) fail(ErrorCode::Parse, "malformed CSV: missing header row");
  const auto& header = records.front();
  std::vector<std::size_t> field_of(schema.size(), SIZE_MAX);
  for (std::size_t f = 0; f < header.size(); ++f) {
    auto idx = schema.find(header[f]);
    if (!idx) fail(ErrorCode::Schema, "unknown column '" + header[f] + "' in CSV header");
    if (field_of[*idx] != SIZE_MAX) fail(ErrorCode::Parse, "duplicate column '" + header[f] + "' in CSV header");
    field_of[*idx] = f;
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (field_of[c] == SIZE_MAX) fail(ErrorCode::Schema, "column '" + schema[c].name + "' missing from CSV header");
  }

  std::vector<ColumnSpec> specs = schema.columns();
  std::vector<Dataset::Column> cols(schema.size());
  const std::size_t n = records.size() - 1;
  for (auto& col : cols) col.missing.assign(n, 0);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (specs[c].kind.is_numeric()) {
      cols[c].numeric.resize(n);
    } else {
      cols[c].codes.resize(n);
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.size() != header.size()) {
      fail(ErrorCode::Parse, "malformed CSV: record " + std::to_string(r + 2) + " has " +
                                 std::to_string(rec.size()) + " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = rec[field_of[c]];
      auto& col = cols[c];
      auto& spec = specs[c];
      if (missing_tokens.count(cell)) {
        col.missing[r] = 1;
        if (spec.kind.is_numeric()) {
          col.numeric[r] = std::nan("");
        } else {
          col.codes[r] = -1;
        }
        continue;
      }
      if (spec.kind.is_numeric()) {
        double v = 0;
        if (!csv::parse_double(cell, v)) {
          fail(ErrorCode::Parse, "column '" + spec.name + "', row " + std::to_string(r + 1) +
                                     ": cannot parse '" + cell + "' as a number");
        }
        col.numeric[r] = v;
      } else {
        auto code = spec.kind.code_of(cell);
        if (!code) {
          if (!spec.infer_levels) {
            fail(ErrorCode::Schema, "column '" + spec.name + "': unknown level '" + cell + "'");
          }
          spec.kind.levels.push_back(cell);
          code = static_cast<std::int32_t>(spec.kind.levels.size() - 1);
        }
        col.codes[r] = *code;
      }
    }
  }
  for (auto& spec : specs) {
    if (spec.infer_levels) {
      if (spec.kind.levels.empty()) fail(ErrorCode::Schema, "column '" + spec.name + "': no levels observed");
      spec.infer_levels = false;
    }
  }
  return Dataset(Schema(std::move(specs)), std::move(cols));
}

}  // namespace

Dataset load_csv(const std::string& path, const Schema& schema, const std::set<std::string>& missing_tokens) {
  return build_from_records(csv::read_file(path), schema, missing_tokens);
}

Dataset parse_csv(const std::string& text, const Schema& schema, const std::set<std::string>& missing_tokens) {
  std::istringstream in(text);
  return build_from_records(csv::read(in), schema, missing_tokens);
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream out;
  csv::Record rec;
  for (const auto& c : ds.schema().columns()) rec.push_back(c.name);
  csv::write_record(out, rec);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    rec.clear();
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      if (ds.is_missing(c, r)) {
        rec.emplace_back("NA");
      } else if (ds.schema()[c].kind.is_numeric()) {
        rec.push_back(csv::format_double(ds.column(c).numeric[r]));
      } else {
        rec.push_back(ds.schema()[c].kind.levels[static_cast<std::size_t>(ds.column(c).codes[r])]);
      }
    }
    csv::write_record(out, rec);
  }
  return out.str();
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << to_csv(ds);
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

Dataset replace_missing(const Dataset& ds, std::uint64_t seed) {
  if (!ds.has_missing()) return ds;
  std::vector<Dataset::Column> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    Dataset::Column col = ds.column(c);
    if (!col.missing.empty()) {
      std::vector<std::size_t> donors;
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        if (!col.missing[r]) donors.push_back(r);
      }
      if (donors.empty()) {
        fail(ErrorCode::InvalidArgument, "column '" + ds.schema()[c].name + "' is entirely missing");
      }
      Rng rng(derive_seed(seed, 0, c));
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        if (!col.missing[r]) continue;
        const std::size_t d = donors[uniform_index(rng, donors.size())];
        if (ds.schema()[c].kind.is_numeric()) {
          col.numeric[r] = col.numeric[d];
        } else {
          col.codes[r] = col.codes[d];
        }
      }
      col.missing.clear();
    }
    cols.push_back(std::move(col));
  }
  return Dataset(ds.schema(), std::move(cols));
}

Dataset coarsen_levels(const Dataset& ds, const LevelMapping& map) {
  const std::size_t target = ds.schema().index_of(map.column);
  const auto& spec = ds.schema()[target];
  if (!spec.kind.is_categorical()) fail(ErrorCode::Schema, "column '" + map.column + "' is not categorical");

  std::unordered_map<std::string, std::string> lookup;
  for (const auto& [from, to] : map.mapping) {
    if (!lookup.emplace(from, to).second) {
      fail(ErrorCode::InvalidArgument, "level '" + from + "' mapped more than once");
    }
  }
  std::vector<std::string> coarse;
  std::vector<std::int32_t> recode(spec.kind.level_count());
  for (std::size_t l = 0; l < spec.kind.level_count(); ++l) {
    auto it = lookup.find(spec.kind.levels[l]);
    if (it == lookup.end()) {
      fail(ErrorCode::InvalidArgument, "unmapped level '" + spec.kind.levels[l] + "' in column '" + map.column + "'");
    }
    auto pos = std::find(coarse.begin(), coarse.end(), it->second);
    if (pos == coarse.end()) {
      coarse.push_back(it->second);
      pos = coarse.end() - 1;
    }
    recode[l] = static_cast<std::int32_t>(pos - coarse.begin());
  }
  for (const auto& [from, to] : map.mapping) {
    if (!spec.kind.code_of(from)) {
      fail(ErrorCode::InvalidArgument, "mapping names unknown level '" + from + "' of column '" + map.column + "'");
    }
  }

  std::vector<ColumnSpec> specs = ds.schema().columns();
  specs[target].kind = ColumnKind::categorical(coarse);
  std::vector<Dataset::Column> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) cols.push_back(ds.column(c));
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto& code = cols[target].codes[r];
    if (!ds.is_missing(target, r)) code = recode[static_cast<std::size_t>(code)];
  }
  return Dataset(Schema(std::move(specs)), std::move(cols));
}

Dataset head_n(const Dataset& ds, std::size_t n) {
  if (n > ds.rows()) {
    fail(ErrorCode::InvalidArgument,
         "head_n: requested " + std::to_string(n) + " rows but dataset has " + std::to_string(ds.rows()));
  }
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return select_rows(ds, rows);
}

Dataset drop_column(const Dataset& ds, const std::string& name) {
  const std::size_t target = ds.schema().index_of(name);
  if (ds.cols() == 1) fail(ErrorCode::Schema, "schema must be non-empty");
  std::vector<ColumnSpec> specs;
  std::vector<Dataset::Column> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    if (c == target) continue;
    specs.push_back(ds.schema()[c]);
    cols.push_back(ds.column(c));
  }
  return Dataset(Schema(std::move(specs)), std::move(cols));
}

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<Dataset::Column> cols(ds.cols());
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    const auto& src = ds.column(c);
    auto& dst = cols[c];
    const bool numeric = ds.schema()[c].kind.is_numeric();
    if (numeric) {
      dst.numeric.reserve(rows.size());
    } else {
      dst.codes.reserve(rows.size());
    }
    if (!src.missing.empty()) dst.missing.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= ds.rows()) fail(ErrorCode::InvalidArgument, "row index out of range");
      if (numeric) {
        dst.numeric.push_back(src.numeric[r]);
      } else {
        dst.codes.push_back(src.codes[r]);
      }
      if (!src.missing.empty()) dst.missing.push_back(src.missing[r]);
    }
  }
  return Dataset(ds.schema(), std::move(cols));
}

}  // namespace synthkit
