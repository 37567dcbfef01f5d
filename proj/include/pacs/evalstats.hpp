#pragma once

// Human-correlation statistics and the pairwise/FOIL accuracy protocols.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pacs {

/// Pair classification counts used by both Kendall variants. Pairs tied in
/// both coordinates are counted in `tied_both` only.
struct PairCounts {
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t tied_x_only = 0;
  std::uint64_t tied_y_only = 0;
  std::uint64_t tied_both = 0;

  bool operator==(const PairCounts&) const = default;
};

/// O(n^2) enumeration.
PairCounts count_pairs_exhaustive(std::span<const double> x, std::span<const double> y);
/// O(n log n): sort by (x, y), then count discordant pairs as merge-sort
/// inversions of y.
PairCounts count_pairs_fast(std::span<const double> x, std::span<const double> y);

/// Reuses the fast counter. Throws kDegenerate when x or y is constant.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(const PairCounts& counts);

/// tau_c = 2m(C - D) / (n^2 (m - 1)), m = min(#distinct x, #distinct y).
double kendall_tau_c(std::span<const double> x, std::span<const double> y);

/// Ranks with ties resolved to the mean of the tied positions (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks.
double spearman_rho(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);

enum class CorrelationStat { kKendallB, kKendallC, kSpearman };
CorrelationStat parse_correlation_stat(std::string_view name);
std::string_view to_string(CorrelationStat stat);
double correlation(CorrelationStat stat, std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Accuracy protocols

/// Scores a candidate caption for a media item given a (possibly empty) set
/// of reference caption ids.
using CaptionScorer = std::function<double(std::string_view media, std::string_view candidate,
                                            std::span<const std::string> refs)>;

enum class Winner { kA, kB };

struct PairwisePair {
  std::string media;
  std::string candidate_a;
  std::string candidate_b;
  Winner winner = Winner::kA;
  std::string category;               // HC, HI, HM, MM; empty for none
  std::vector<std::string> ref_pool;  // reference caption ids for the media
};

/// Majority vote; an exact tie is broken by a coin flip from `tie_break`.
Winner resolve_winner(int votes_a, int votes_b, std::uint64_t tie_break_seed);

struct PairwiseConfig {
  int refs_per_draw = 5;
  int draws = 5;
  std::uint64_t seed = 0;
  /// When false the scorer never sees references and a single pass is run.
  bool reference_based = false;
};

struct PairwiseResult {
  /// Per-category accuracy in [0, 1], averaged over draws.
  std::map<std::string, double> per_category;
  /// Unweighted mean over categories.
  double mean = 0.0;
  std::size_t pairs = 0;
  int passes = 0;
};

/// The human-preferred candidate must score strictly higher; score ties
/// count as half a success.
PairwiseResult pairwise_accuracy(std::span<const PairwisePair> pairs,
                                 const CaptionScorer& scorer, const PairwiseConfig& cfg);

struct FoilPair {
  std::string media;
  std::string correct;
  std::string foil;
  std::vector<std::string> refs;
};

/// Fraction of pairs with score(correct) > score(foil). Ties fail.
double foil_accuracy(std::span<const FoilPair> pairs, const CaptionScorer& scorer);

// ---------------------------------------------------------------------------
// System-level reporting

struct SystemCandidates {
  std::string name;
  /// media id -> candidate caption id
  std::map<std::string, std::string> captions;
};

struct NamedScorer {
  std::string name;
  CaptionScorer scorer;
};

struct SystemTable {
  std::vector<std::string> models;
  std::vector<std::string> metrics;
  /// values[model][metric] = corpus mean
  std::vector<std::vector<double>> values;

  std::string format(int precision = 4) const;
};

/// Throws kInvalidArgument when models disagree on the media set.
SystemTable system_report(std::span<const SystemCandidates> models,
                          std::span<const NamedScorer> metrics);

}  // namespace pacs
