#include "synthkit/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "synthkit/error.hpp"

namespace synthkit {

double cio(const ConfidenceInterval& orig, const ConfidenceInterval& syn, CioVariant variant) {
  const double wo = orig.upper - orig.lower;
  const double ws = syn.upper - syn.lower;
  if (!(wo > 0.0) || !(ws > 0.0)) {
    const bool both = !(wo > 0.0) && !(ws > 0.0);
    return both && orig.lower == syn.lower && orig.upper == syn.upper ? 1.0 : 0.0;
  }
  const double overlap = std::min(orig.upper, syn.upper) - std::max(orig.lower, syn.lower);
  double value = 0.0;
  if (variant == CioVariant::OwnWidth) {
    value = 0.5 * (overlap / wo + overlap / ws);
  } else {
    const double d1 = orig.upper - syn.lower;
    const double d2 = syn.upper - orig.lower;
    if (d1 == 0.0 || d2 == 0.0) return 0.0;
    value = 0.5 * (overlap / d1 + overlap / d2);
  }
  if (!std::isfinite(value)) return 0.0;
  return std::clamp(value, 0.0, 1.0);
}

double apo(std::span<const double> overlaps, const ApoOptions& options) {
  if (overlaps.empty()) fail(ErrorCode::InvalidArgument, "APO of an empty overlap list");
  std::size_t hits = 0;
  for (double v : overlaps) {
    if (options.inclusive ? v >= options.threshold : v > options.threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(overlaps.size());
}

double kl_between(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorCode::InvalidArgument, "KL: distributions have different supports");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

KlScore kl_divergence(std::span<const double> orig, std::span<const double> syn, const ColumnKind& kind,
                      const KlOptions& options, const std::string& variable) {
  if (orig.empty() || syn.empty()) fail(ErrorCode::InvalidArgument, "KL: empty column");
  std::vector<double> pc;
  std::vector<double> qc;
  if (kind.is_categorical()) {
    std::map<long long, std::size_t> cell;
    for (double v : orig) cell.emplace(std::llround(v), 0);
    for (double v : syn) cell.emplace(std::llround(v), 0);
    std::size_t i = 0;
    for (auto& [code, idx] : cell) idx = i++;
    pc.assign(cell.size(), 0.0);
    qc.assign(cell.size(), 0.0);
    for (double v : orig) pc[cell[std::llround(v)]] += 1.0;
    for (double v : syn) qc[cell[std::llround(v)]] += 1.0;
  } else {
    if (options.bins < 2) fail(ErrorCode::InvalidArgument, "KL: numeric columns need at least 2 bins");
    const auto [omin, omax] = std::minmax_element(orig.begin(), orig.end());
    const auto [smin, smax] = std::minmax_element(syn.begin(), syn.end());
    const double lo = std::min(*omin, *smin);
    const double hi = std::max(*omax, *smax);
    pc.assign(options.bins, 0.0);
    qc.assign(options.bins, 0.0);
    const double span = hi - lo;
    auto bin = [&](double v) -> std::size_t {
      if (!(span > 0.0)) return 0;
      const auto b = static_cast<std::size_t>((v - lo) / span * static_cast<double>(options.bins));
      return std::min(b, options.bins - 1);
    };
    for (double v : orig) pc[bin(v)] += 1.0;
    for (double v : syn) qc[bin(v)] += 1.0;
  }
  auto normalise = [&](std::vector<double>& c) {
    if (options.smoothing) {
      for (double& x : c) x += options.pseudo_count;
    }
    double total = 0.0;
    for (double x : c) total += x;
    for (double& x : c) x /= total;
  };
  normalise(pc);
  normalise(qc);

  KlScore score;
  score.variable = variable;
  score.direction = options.direction;
  switch (options.direction) {
    case KlDirection::OrigToSyn: score.raw = kl_between(pc, qc); break;
    case KlDirection::SynToOrig: score.raw = kl_between(qc, pc); break;
    case KlDirection::Symmetric: score.raw = 0.5 * (kl_between(pc, qc) + kl_between(qc, pc)); break;
  }
  return score;
}

NormalizedKl normalize_kl(std::span<const KlScore> scores, std::span<const KlScore> baseline) {
  if (scores.empty()) fail(ErrorCode::InvalidArgument, "no KL scores to normalize");
  if (scores.size() != baseline.size()) fail(ErrorCode::InvalidArgument, "KL baseline covers different variables");
  NormalizedKl out;
  for (const auto& s : scores) {
    auto it = std::find_if(baseline.begin(), baseline.end(), [&](const KlScore& b) { return b.variable == s.variable; });
    if (it == baseline.end()) fail(ErrorCode::InvalidArgument, "no KL baseline for variable '" + s.variable + "'");
    if (!(it->raw > 0.0)) fail(ErrorCode::InvalidArgument, "KL baseline is zero for variable '" + s.variable + "'");
    KlScore n = s;
    n.normalized = s.raw / it->raw;
    out.average += *n.normalized;
    out.scores.push_back(std::move(n));
  }
  out.average /= static_cast<double>(out.scores.size());
  return out;
}

AggregateSummary aggregate(const std::vector<std::vector<FitOverlaps>>& by_repetition, const ApoOptions& options) {
  if (by_repetition.empty()) fail(ErrorCode::InvalidArgument, "aggregate: no repetitions");
  AggregateSummary summary;
  for (const auto& fits : by_repetition) {
    if (fits.empty()) fail(ErrorCode::InvalidArgument, "aggregate: repetition without fits");
    RepetitionSummary rep;
    std::vector<double> pooled;
    for (const auto& fit : fits) {
      if (fit.overlaps.empty()) fail(ErrorCode::InvalidArgument, "aggregate: fit '" + fit.fit_id + "' has no overlaps");
      double sum = 0.0;
      for (double v : fit.overlaps) sum += v;
      rep.fit_averages.push_back(sum / static_cast<double>(fit.overlaps.size()));
      pooled.insert(pooled.end(), fit.overlaps.begin(), fit.overlaps.end());
    }
    for (double a : rep.fit_averages) rep.average_cio += a;
    rep.average_cio /= static_cast<double>(rep.fit_averages.size());
    rep.apo = apo(pooled, options);
    summary.average_cio += rep.average_cio;
    summary.apo += rep.apo;
    summary.repetitions.push_back(std::move(rep));
  }
  summary.average_cio /= static_cast<double>(summary.repetitions.size());
  summary.apo /= static_cast<double>(summary.repetitions.size());
  return summary;
}

}  // namespace synthkit
