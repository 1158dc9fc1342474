#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthkit/dataset.hpp"
#include "synthkit/linear.hpp"
#include "synthkit/predictors.hpp"
#include "synthkit/rng.hpp"

namespace synthkit {

enum class Method { Sample, ParametricNumeric, ParametricCategorical, Cart, Pmm, CatallGroup };

const char* to_string(Method m) noexcept;

using VisitSequence = std::vector<std::size_t>;

enum class OrderKind { Original, Opposite, Own, LargestCategoricalFirst, LargestCategoricalLast };

VisitSequence make_order(const Schema& schema, OrderKind kind, const std::vector<std::size_t>& own = {});
void validate_visit(const VisitSequence& visit, std::size_t columns);

// Entry (i, j) set means column j is a predictor when synthesizing column i.
class PredictorMatrix {
 public:
  PredictorMatrix() = default;
  explicit PredictorMatrix(std::size_t p) : p_(p), cells_(p * p, 0) {}

  std::size_t size() const noexcept { return p_; }
  bool get(std::size_t target, std::size_t predictor) const { return cells_.at(target * p_ + predictor) != 0; }
  void set(std::size_t target, std::size_t predictor, bool on = true) {
    cells_.at(target * p_ + predictor) = on ? 1 : 0;
  }
  // Predictor columns of `target`, ascending column index.
  std::vector<std::size_t> predictors_of(std::size_t target) const;

  friend bool operator==(const PredictorMatrix&, const PredictorMatrix&) = default;

 private:
  std::size_t p_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Selective predictor sets: target column -> predictor columns.
using SelectiveSets = std::map<std::size_t, std::vector<std::size_t>>;

PredictorMatrix make_simple_predictors(const VisitSequence& visit);
PredictorMatrix make_selective_predictors(const VisitSequence& visit, const SelectiveSets& sets);

// Naming grammar: base in {P, D, CP, CC, S}, optional order in {O, V, H, L},
// optional trailing T for proper synthesis. E.g. "D", "POT", "CCT".
enum class BaseSynthesizer { Parametric, Cart, CatallPmm, CatallCart, Sample };

struct Label {
  BaseSynthesizer base = BaseSynthesizer::Cart;
  std::optional<char> order;
  bool proper = false;

  std::string str() const;
};

Label parse_label(const std::string& text);

struct SynthesizerSpec {
  std::vector<Method> methods;  // one per column
  VisitSequence visit;
  PredictorMatrix predictors;
  bool proper = false;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::string label;
  std::size_t min_leaf = 5;   // CART leaf size
  std::size_t k_donors = 5;   // PMM donor pool

  void validate(const Schema& schema) const;
};

struct LabelOptions {
  std::vector<std::size_t> own_order;       // for the V suffix
  std::optional<SelectiveSets> selective;   // absent means simple
  std::size_t min_leaf = 5;
  std::size_t k_donors = 5;
};

// Builds the method plan, visit sequence and predictor matrix a label names.
// Catall bases put the categorical group at the front of the visit sequence.
SynthesizerSpec spec_from_label(const Schema& schema, const std::string& label, std::size_t m, std::uint64_t seed,
                                const LabelOptions& options = {});

struct SyntheticSet {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<Dataset> datasets;
  std::vector<double> seconds;  // wall time per dataset
};

// Bootstrap resample indices for dataset `index` (same n, with replacement).
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t index);

// One synthetic dataset whose models are fitted on `fitting_rows` of the original.
Dataset synthesize_one(const Dataset& original, const SynthesizerSpec& spec, std::size_t index,
                       std::span<const std::size_t> fitting_rows);

// m datasets; identical output for any `jobs`.
SyntheticSet synthesize(const Dataset& original, const SynthesizerSpec& spec, unsigned jobs = 1);

void save_synthetic_set(const SyntheticSet& set, const std::string& dir);
SyntheticSet load_synthetic_set(const std::string& dir, const Schema& schema);

// Predictive mean matching: donors are the k fitting rows whose predicted value
// is nearest the prediction at x_row (ties by row index).
class PmmMatcher {
 public:
  PmmMatcher(const LinearModel& model, const Predictors& fitting_x, std::span<const double> fitting_y,
             std::size_t k_donors);

  std::vector<std::size_t> donors(std::span<const double> x_row) const;
  double draw(std::span<const double> x_row, Rng& rng) const;

 private:
  const LinearModel& model_;
  std::vector<double> y_;
  std::vector<std::pair<double, std::size_t>> sorted_;  // (prediction, row)
  std::size_t k_;
};

double pmm_draw(const LinearModel& model, const Predictors& fitting_x, std::span<const double> fitting_y,
                std::span<const double> x_row, std::size_t k_donors, Rng& rng);

}  // namespace synthkit
