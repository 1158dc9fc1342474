#include "synthkit/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "synthkit/cart.hpp"
#include "synthkit/error.hpp"
#include "synthkit/joint_table.hpp"
#include "synthkit/logistic.hpp"
#include "synthkit/parallel.hpp"

namespace synthkit {

namespace {
constexpr std::uint64_t kBootstrapStream = 0xB0075742A9ULL;

bool is_catall_base(BaseSynthesizer b) {
  return b == BaseSynthesizer::CatallPmm || b == BaseSynthesizer::CatallCart;
}
}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::Sample: return "sample";
    case Method::ParametricNumeric: return "linear";
    case Method::ParametricCategorical: return "logistic";
    case Method::Cart: return "cart";
    case Method::Pmm: return "pmm";
    case Method::CatallGroup: return "catall";
  }
  return "?";
}

void validate_visit(const VisitSequence& visit, std::size_t columns) {
  if (visit.size() != columns) {
    fail(ErrorCode::InvalidArgument, "visit sequence has " + std::to_string(visit.size()) + " entries for " +
                                         std::to_string(columns) + " columns");
  }
  std::vector<std::uint8_t> seen(columns, 0);
  for (std::size_t v : visit) {
    if (v >= columns || seen[v]) fail(ErrorCode::InvalidArgument, "visit sequence is not a permutation");
    seen[v] = 1;
  }
}

VisitSequence make_order(const Schema& schema, OrderKind kind, const std::vector<std::size_t>& own) {
  const std::size_t p = schema.size();
  VisitSequence visit(p);
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  switch (kind) {
    case OrderKind::Original:
      break;
    case OrderKind::Opposite:
      std::reverse(visit.begin(), visit.end());
      break;
    case OrderKind::Own:
      validate_visit(own, p);
      visit = own;
      break;
    case OrderKind::LargestCategoricalFirst:
    case OrderKind::LargestCategoricalLast: {
      std::optional<std::size_t> largest;
      for (std::size_t c = 0; c < p; ++c) {
        if (!schema[c].kind.is_categorical()) continue;
        if (!largest || schema[c].kind.level_count() > schema[*largest].kind.level_count()) largest = c;
      }
      if (!largest) fail(ErrorCode::InvalidArgument, "largest-categorical ordering needs a categorical column");
      visit.erase(visit.begin() + static_cast<std::ptrdiff_t>(*largest));
      if (kind == OrderKind::LargestCategoricalFirst) {
        visit.insert(visit.begin(), *largest);
      } else {
        visit.push_back(*largest);
      }
      break;
    }
  }
  return visit;
}

std::vector<std::size_t> PredictorMatrix::predictors_of(std::size_t target) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p_; ++j) {
    if (get(target, j)) out.push_back(j);
  }
  return out;
}

PredictorMatrix make_simple_predictors(const VisitSequence& visit) {
  validate_visit(visit, visit.size());
  PredictorMatrix pm(visit.size());
  for (std::size_t t = 0; t < visit.size(); ++t) {
    for (std::size_t s = 0; s < t; ++s) pm.set(visit[t], visit[s]);
  }
  return pm;
}

PredictorMatrix make_selective_predictors(const VisitSequence& visit, const SelectiveSets& sets) {
  validate_visit(visit, visit.size());
  const std::size_t p = visit.size();
  std::vector<std::size_t> position(p);
  for (std::size_t t = 0; t < p; ++t) position[visit[t]] = t;
  PredictorMatrix pm(p);
  for (const auto& [target, preds] : sets) {
    if (target >= p) fail(ErrorCode::InvalidArgument, "selective set names an unknown target column");
    for (std::size_t j : preds) {
      if (j >= p) fail(ErrorCode::InvalidArgument, "selective set names an unknown predictor column");
      if (j == target) fail(ErrorCode::InvalidArgument, "a variable cannot predict itself");
      if (position[j] > position[target]) {
        fail(ErrorCode::InvalidArgument, "selective predictor is visited after its target");
      }
      pm.set(target, j);
    }
  }
  return pm;
}

std::string Label::str() const {
  std::string s;
  switch (base) {
    case BaseSynthesizer::Parametric: s = "P"; break;
    case BaseSynthesizer::Cart: s = "D"; break;
    case BaseSynthesizer::CatallPmm: s = "CP"; break;
    case BaseSynthesizer::CatallCart: s = "CC"; break;
    case BaseSynthesizer::Sample: s = "S"; break;
  }
  if (order) s.push_back(*order);
  if (proper) s.push_back('T');
  return s;
}

Label parse_label(const std::string& text) {
  Label label;
  std::string_view rest = text;
  auto starts = [&](std::string_view p) { return rest.substr(0, p.size()) == p; };
  if (starts("CP")) {
    label.base = BaseSynthesizer::CatallPmm;
    rest.remove_prefix(2);
  } else if (starts("CC")) {
    label.base = BaseSynthesizer::CatallCart;
    rest.remove_prefix(2);
  } else if (starts("P")) {
    label.base = BaseSynthesizer::Parametric;
    rest.remove_prefix(1);
  } else if (starts("D")) {
    label.base = BaseSynthesizer::Cart;
    rest.remove_prefix(1);
  } else if (starts("S")) {
    label.base = BaseSynthesizer::Sample;
    rest.remove_prefix(1);
  } else {
    fail(ErrorCode::InvalidArgument, "label '" + text + "' does not start with P, D, CP, CC or S");
  }
  if (!rest.empty() && std::string_view("OVHL").find(rest.front()) != std::string_view::npos) {
    label.order = rest.front();
    rest.remove_prefix(1);
  }
  if (!rest.empty() && rest.front() == 'T') {
    label.proper = true;
    rest.remove_prefix(1);
  }
  if (!rest.empty()) fail(ErrorCode::InvalidArgument, "label '" + text + "' has trailing characters");
  return label;
}

void SynthesizerSpec::validate(const Schema& schema) const {
  const std::size_t p = schema.size();
  if (m < 1) fail(ErrorCode::InvalidArgument, "m must be at least 1");
  if (min_leaf < 1) fail(ErrorCode::InvalidArgument, "min_leaf must be at least 1");
  if (k_donors < 1) fail(ErrorCode::InvalidArgument, "k_donors must be at least 1");
  if (methods.size() != p) fail(ErrorCode::InvalidArgument, "method plan does not cover every column");
  validate_visit(visit, p);
  if (predictors.size() != p) fail(ErrorCode::InvalidArgument, "predictor matrix has the wrong size");
  if (!label.empty()) {
    const Label parsed = parse_label(label);
    if (parsed.proper != proper) fail(ErrorCode::InvalidArgument, "label '" + label + "' disagrees with the proper flag");
  }
  std::vector<std::size_t> position(p);
  for (std::size_t t = 0; t < p; ++t) position[visit[t]] = t;
  for (std::size_t c = 0; c < p; ++c) {
    const bool numeric = schema[c].kind.is_numeric();
    const Method mth = methods[c];
    if ((mth == Method::ParametricNumeric || mth == Method::Pmm) && !numeric) {
      fail(ErrorCode::InvalidArgument, "column '" + schema[c].name + "': " + to_string(mth) + " needs a numeric column");
    }
    if ((mth == Method::ParametricCategorical || mth == Method::CatallGroup) && numeric) {
      fail(ErrorCode::InvalidArgument, "column '" + schema[c].name + "': " + to_string(mth) +
                                           " needs a categorical column");
    }
    if (predictors.get(c, c)) fail(ErrorCode::InvalidArgument, "a variable cannot predict itself");
    for (std::size_t j = 0; j < p; ++j) {
      if (predictors.get(c, j) && position[j] > position[c]) {
        fail(ErrorCode::InvalidArgument, "column '" + schema[c].name + "' is predicted by a later variable");
      }
    }
  }
  // Catall members must be visited back to back.
  std::vector<std::size_t> group_positions;
  for (std::size_t c = 0; c < p; ++c) {
    if (methods[c] == Method::CatallGroup) group_positions.push_back(position[c]);
  }
  if (!group_positions.empty()) {
    std::sort(group_positions.begin(), group_positions.end());
    if (group_positions.back() - group_positions.front() + 1 != group_positions.size()) {
      fail(ErrorCode::InvalidArgument, "catall group is not contiguous in the visit sequence");
    }
  }
}

SynthesizerSpec spec_from_label(const Schema& schema, const std::string& text, std::size_t m, std::uint64_t seed,
                                const LabelOptions& options) {
  const Label label = parse_label(text);
  SynthesizerSpec spec;
  spec.label = text;
  spec.proper = label.proper;
  spec.m = m;
  spec.seed = seed;
  spec.min_leaf = options.min_leaf;
  spec.k_donors = options.k_donors;

  const std::size_t p = schema.size();
  spec.methods.resize(p);
  for (std::size_t c = 0; c < p; ++c) {
    const bool numeric = schema[c].kind.is_numeric();
    switch (label.base) {
      case BaseSynthesizer::Parametric:
        spec.methods[c] = numeric ? Method::ParametricNumeric : Method::ParametricCategorical;
        break;
      case BaseSynthesizer::Cart:
        spec.methods[c] = Method::Cart;
        break;
      case BaseSynthesizer::CatallPmm:
        spec.methods[c] = numeric ? Method::Pmm : Method::CatallGroup;
        break;
      case BaseSynthesizer::CatallCart:
        spec.methods[c] = numeric ? Method::Cart : Method::CatallGroup;
        break;
      case BaseSynthesizer::Sample:
        spec.methods[c] = Method::Sample;
        break;
    }
  }

  OrderKind order = OrderKind::Original;
  if (label.order) {
    switch (*label.order) {
      case 'O': order = OrderKind::Opposite; break;
      case 'V': order = OrderKind::Own; break;
      case 'H': order = OrderKind::LargestCategoricalFirst; break;
      case 'L': order = OrderKind::LargestCategoricalLast; break;
    }
  }
  if (order == OrderKind::Own && options.own_order.empty()) {
    fail(ErrorCode::InvalidArgument, "label '" + text + "' needs an own visit order");
  }
  spec.visit = make_order(schema, order, options.own_order);
  if (is_catall_base(label.base)) {
    std::stable_partition(spec.visit.begin(), spec.visit.end(),
                          [&](std::size_t c) { return schema[c].kind.is_categorical(); });
  }
  spec.predictors = options.selective ? make_selective_predictors(spec.visit, *options.selective)
                                      : make_simple_predictors(spec.visit);
  spec.validate(schema);
  return spec;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, index, kBootstrapStream));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = uniform_index(rng, n);
  return rows;
}

PmmMatcher::PmmMatcher(const LinearModel& model, const Predictors& fitting_x, std::span<const double> fitting_y,
                       std::size_t k_donors)
    : model_(model), y_(fitting_y.begin(), fitting_y.end()), k_(k_donors) {
  if (k_ < 1) fail(ErrorCode::InvalidArgument, "k_donors must be at least 1");
  if (y_.size() < k_) {
    fail(ErrorCode::InvalidArgument, "fitting set (" + std::to_string(y_.size()) + " rows) is smaller than k_donors (" +
                                         std::to_string(k_) + ")");
  }
  if (fitting_x.width() > 0 && fitting_x.rows() != y_.size()) {
    fail(ErrorCode::InvalidArgument, "predictor and target row counts differ");
  }
  const Eigen::VectorXd pred = fitting_x.width() > 0
                                   ? Eigen::VectorXd(model.layout.design(fitting_x) * model.coefficients)
                                   : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(y_.size()), model.coefficients[0]);
  sorted_.reserve(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) sorted_.emplace_back(pred[static_cast<Eigen::Index>(i)], i);
  std::sort(sorted_.begin(), sorted_.end());
}

std::vector<std::size_t> PmmMatcher::donors(std::span<const double> x_row) const {
  const double target = model_.predict(x_row);
  const std::size_t n = sorted_.size();
  auto dist = [&](std::size_t i) { return std::abs(sorted_[i].first - target); };
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(target, std::size_t{0})) - sorted_.begin());

  // Walk outwards to find the k-th smallest distance.
  std::size_t lo = pos;  // next candidate on the left is lo - 1
  std::size_t hi = pos;  // next candidate on the right is hi
  double kth = 0.0;
  for (std::size_t taken = 0; taken < k_; ++taken) {
    const bool take_left = hi >= n || (lo > 0 && dist(lo - 1) <= dist(hi));
    kth = take_left ? dist(--lo) : dist(hi++);
  }
  // Everything at distance <= kth is contiguous in prediction order.
  while (lo > 0 && dist(lo - 1) <= kth) --lo;
  while (hi < n && dist(hi) <= kth) ++hi;

  std::vector<std::pair<double, std::size_t>> pool;
  for (std::size_t i = lo; i < hi; ++i) pool.emplace_back(dist(i), sorted_[i].second);
  std::sort(pool.begin(), pool.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k_; ++i) out.push_back(pool[i].second);
  return out;
}

double PmmMatcher::draw(std::span<const double> x_row, Rng& rng) const {
  const auto d = donors(x_row);
  return y_[d[uniform_index(rng, d.size())]];
}

double pmm_draw(const LinearModel& model, const Predictors& fitting_x, std::span<const double> fitting_y,
                std::span<const double> x_row, std::size_t k_donors, Rng& rng) {
  return PmmMatcher(model, fitting_x, fitting_y, k_donors).draw(x_row, rng);
}

Dataset synthesize_one(const Dataset& original, const SynthesizerSpec& spec, std::size_t index,
                       std::span<const std::size_t> fitting_rows) {
  const Schema& schema = original.schema();
  const std::size_t p = schema.size();
  const std::size_t n = original.rows();
  if (n == 0) fail(ErrorCode::InvalidArgument, "cannot synthesize from an empty dataset");
  if (original.has_missing()) fail(ErrorCode::InvalidArgument, "original data still holds missing cells");
  const Dataset fitting = select_rows(original, fitting_rows);
  const std::size_t nf = fitting.rows();
  if (nf == 0) fail(ErrorCode::InvalidArgument, "empty fitting set");

  std::vector<std::vector<double>> syn(p);
  std::vector<std::uint8_t> done(p, 0);
  std::vector<std::size_t> group;
  for (std::size_t v : spec.visit) {
    if (spec.methods[v] == Method::CatallGroup) group.push_back(v);
  }

  std::vector<double> x_row;
  auto row_of = [&](const std::vector<std::size_t>& preds, std::size_t r) -> std::span<const double> {
    x_row.resize(preds.size());
    for (std::size_t j = 0; j < preds.size(); ++j) x_row[j] = syn[preds[j]][r];
    return x_row;
  };

  for (std::size_t var : spec.visit) {
    if (done[var]) continue;
    try {
      Rng rng(derive_seed(spec.seed, index, var));
      const Method method = spec.methods[var];
      auto& out = syn[var];
      out.resize(n);

      if (method == Method::CatallGroup) {
        const JointTable table = fit_joint_table(fitting, group);
        for (auto& col : group) syn[col].resize(n);
        for (std::size_t r = 0; r < n; ++r) {
          const auto& cell = table.draw(rng);
          for (std::size_t g = 0; g < group.size(); ++g) syn[group[g]][r] = cell[g];
        }
        for (auto col : group) done[col] = 1;
        continue;
      }

      const std::vector<std::size_t> preds = spec.predictors.predictors_of(var);
      const std::vector<double> y = fitting.values(var);
      if (method == Method::Sample || preds.empty()) {
        for (std::size_t r = 0; r < n; ++r) out[r] = y[uniform_index(rng, nf)];
        done[var] = 1;
        continue;
      }

      const Predictors xfit = Predictors::gather(fitting, preds);
      switch (method) {
        case Method::Cart: {
          const std::size_t levels = schema[var].kind.is_numeric() ? 0 : schema[var].kind.level_count();
          const CartTree tree = fit_cart(xfit, y, levels, CartOptions{.min_leaf = spec.min_leaf});
          for (std::size_t r = 0; r < n; ++r) out[r] = draw_leaf(tree, row_of(preds, r), y, rng);
          break;
        }
        case Method::ParametricNumeric: {
          const LinearModel model = fit_ols(xfit, y);
          for (std::size_t r = 0; r < n; ++r) out[r] = draw_linear(model, row_of(preds, r), rng);
          break;
        }
        case Method::Pmm: {
          const LinearModel model = fit_ols(xfit, y);
          const PmmMatcher matcher(model, xfit, y, spec.k_donors);
          for (std::size_t r = 0; r < n; ++r) out[r] = matcher.draw(row_of(preds, r), rng);
          break;
        }
        case Method::ParametricCategorical: {
          const auto codes = fitting.codes(var);
          const bool single_class =
              std::all_of(codes.begin(), codes.end(), [&](std::int32_t c) { return c == codes.front(); });
          if (single_class) {
            std::fill(out.begin(), out.end(), static_cast<double>(codes.front()));
            break;
          }
          const LogisticModel model = fit_logistic(xfit, codes, schema[var].kind.level_count());
          for (std::size_t r = 0; r < n; ++r) out[r] = draw_class(model, row_of(preds, r), rng);
          break;
        }
        case Method::Sample:
        case Method::CatallGroup:
          break;
      }
      done[var] = 1;
    } catch (...) {
      rethrow_with_context("variable '" + schema[var].name + "' (dataset " + std::to_string(index) + ")");
    }
  }
  return Dataset::from_values(schema, syn);
}

SyntheticSet synthesize(const Dataset& original, const SynthesizerSpec& spec, unsigned jobs) {
  spec.validate(original.schema());
  if (original.has_missing()) fail(ErrorCode::InvalidArgument, "original data still holds missing cells");
  SyntheticSet set;
  set.label = spec.label;
  set.seed = spec.seed;
  set.datasets.resize(spec.m);
  set.seconds.resize(spec.m);
  const std::size_t n = original.rows();
  parallel_for(spec.m, jobs, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> rows;
    if (spec.proper) {
      rows = bootstrap_rows(n, spec.seed, i);
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    set.datasets[i] = synthesize_one(original, spec, i, rows);
    set.seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return set;
}

namespace {
std::string member_name(std::size_t i) {
  std::ostringstream s;
  s << "syn_" << std::setw(4) << std::setfill('0') << (i + 1) << ".csv";
  return s.str();
}
}  // namespace

void save_synthetic_set(const SyntheticSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < set.datasets.size(); ++i) {
    const std::string name = member_name(i);
    write_csv(set.datasets[i], (fs::path(dir) / name).string());
    files.push_back(name);
  }
  nlohmann::json manifest{{"label", set.label},        {"seed", set.seed}, {"m", set.datasets.size()},
                          {"files", files},            {"seconds", set.seconds}};
  if (!set.datasets.empty()) manifest["schema"] = nlohmann::json::parse(schema_to_json(set.datasets.front().schema()));
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) fail(ErrorCode::Io, "cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << '\n';
}

SyntheticSet load_synthetic_set(const std::string& dir, const Schema& schema) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) fail(ErrorCode::Io, "no manifest.json in '" + dir + "'");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("synthetic manifest: ") + e.what());
  }
  SyntheticSet set;
  set.label = manifest.value("label", "");
  set.seed = manifest.value("seed", std::uint64_t{0});
  set.seconds = manifest.value("seconds", std::vector<double>{});
  for (const auto& f : manifest.at("files")) {
    set.datasets.push_back(load_csv((fs::path(dir) / f.get<std::string>()).string(), schema, {}));
  }
  if (set.datasets.empty()) fail(ErrorCode::InvalidArgument, "synthetic set in '" + dir + "' is empty");
  return set;
}

}  // namespace synthkit
