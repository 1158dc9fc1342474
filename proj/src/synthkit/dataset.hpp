#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace synthkit {

enum class Kind { Numeric, Categorical };

struct ColumnKind {
  Kind tag = Kind::Numeric;
  std::vector<std::string> levels;  // categorical only, in code order

  static ColumnKind numeric() { return {}; }
  static ColumnKind categorical(std::vector<std::string> levels);

  bool is_numeric() const noexcept { return tag == Kind::Numeric; }
  bool is_categorical() const noexcept { return tag == Kind::Categorical; }
  std::size_t level_count() const noexcept { return levels.size(); }
  std::optional<std::int32_t> code_of(const std::string& label) const;

  friend bool operator==(const ColumnKind&, const ColumnKind&) = default;
};

struct ColumnSpec {
  std::string name;
  ColumnKind kind;
  // Categorical levels are discovered from the data in first-appearance order.
  bool infer_levels = false;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns);

  std::size_t size() const noexcept { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns_.at(i); }
  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;  // throws on unknown

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<ColumnSpec> columns_;
};

// Reads the JSON schema document:
//   {"columns": [{"name": "x", "kind": "numeric"},
//                {"name": "c", "kind": "categorical", "levels": ["a", "b"]},
//                {"name": "d", "kind": "categorical", "infer": true}]}
Schema parse_schema(const std::string& json_text);
Schema load_schema(const std::string& path);
std::string schema_to_json(const Schema& schema);

// Column-major table. Numeric cells are doubles; categorical cells are level
// codes. Missing cells are flagged and carry NaN / -1 until replace_missing.
class Dataset {
 public:
  struct Column {
    std::vector<double> numeric;
    std::vector<std::int32_t> codes;
    std::vector<std::uint8_t> missing;  // empty means none missing
  };

  Dataset() = default;
  Dataset(Schema schema, std::vector<Column> columns);

  // Builds from raw values (categorical codes stored as exact doubles).
  static Dataset from_values(Schema schema, const std::vector<std::vector<double>>& values);

  const Schema& schema() const noexcept { return schema_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return schema_.size(); }

  std::span<const double> numeric(std::size_t col) const;
  std::span<const std::int32_t> codes(std::size_t col) const;
  const Column& column(std::size_t col) const { return columns_.at(col); }

  // Numeric value, or level code as a double.
  double value(std::size_t col, std::size_t row) const;
  std::vector<double> values(std::size_t col) const;

  bool is_missing(std::size_t col, std::size_t row) const;
  bool has_missing() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

struct LevelMapping {
  std::string column;
  std::vector<std::pair<std::string, std::string>> mapping;  // original -> coarse
};

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"", "NA"};
  return tokens;
}

Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::set<std::string>& missing_tokens = default_missing_tokens());
Dataset parse_csv(const std::string& text, const Schema& schema,
                  const std::set<std::string>& missing_tokens = default_missing_tokens());

// Missing cells are written as "NA".
void write_csv(const Dataset& ds, const std::string& path);
std::string to_csv(const Dataset& ds);

Dataset replace_missing(const Dataset& ds, std::uint64_t seed);
Dataset coarsen_levels(const Dataset& ds, const LevelMapping& map);
Dataset head_n(const Dataset& ds, std::size_t n);
Dataset drop_column(const Dataset& ds, const std::string& name);

// Row subset with repetition allowed (bootstrap resamples, holdout splits).
Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows);

}  // namespace synthkit
