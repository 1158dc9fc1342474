#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthkit/dataset.hpp"
#include "synthkit/estimands.hpp"

namespace synthkit {

// Overlap of an original-data interval with a synthetic-data interval. The
// default variant divides the overlap length by each interval's own width; the
// printed variant uses the cross denominators (U_o - L_s) and (U_s - L_o).
enum class CioVariant { OwnWidth, Printed };

struct Overlap {
  std::string id;
  double value = 0.0;
};

double cio(const ConfidenceInterval& orig, const ConfidenceInterval& syn, CioVariant variant = CioVariant::OwnWidth);

struct ApoOptions {
  double threshold = 0.9;
  bool inclusive = false;  // count value >= threshold instead of value > threshold
};

double apo(std::span<const double> overlaps, const ApoOptions& options = {});

enum class KlDirection { OrigToSyn, SynToOrig, Symmetric };

struct KlOptions {
  std::size_t bins = 20;
  bool smoothing = true;
  double pseudo_count = 0.5;
  KlDirection direction = KlDirection::OrigToSyn;
};

struct KlScore {
  std::string variable;
  double raw = 0.0;  // nats
  std::optional<double> normalized;
  KlDirection direction = KlDirection::OrigToSyn;
};

// D(P || Q) in nats for two probability vectors over the same cells.
double kl_between(std::span<const double> p, std::span<const double> q);

// Histogram KL between an original and a synthetic column. Categorical values
// are level codes (the cells are the union of observed levels); numeric
// columns are cut into equal-width bins spanning both columns' range.
KlScore kl_divergence(std::span<const double> orig, std::span<const double> syn, const ColumnKind& kind,
                      const KlOptions& options = {}, const std::string& variable = {});

struct NormalizedKl {
  std::vector<KlScore> scores;
  double average = 0.0;
};

// Divides each score by the Sample synthesizer's score for the same variable.
NormalizedKl normalize_kl(std::span<const KlScore> scores, std::span<const KlScore> baseline);

// Per-coefficient overlaps of one regression fit (or one group of estimands).
struct FitOverlaps {
  std::string fit_id;
  std::vector<double> overlaps;
};

struct RepetitionSummary {
  std::vector<double> fit_averages;
  double average_cio = 0.0;  // mean over fits of each fit's mean overlap
  double apo = 0.0;          // over the pooled coefficient overlaps
};

struct AggregateSummary {
  std::vector<RepetitionSummary> repetitions;
  double average_cio = 0.0;  // averaged over repetitions
  double apo = 0.0;
};

AggregateSummary aggregate(const std::vector<std::vector<FitOverlaps>>& by_repetition, const ApoOptions& options = {});

}  // namespace synthkit
