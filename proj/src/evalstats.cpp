#include "pacs/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "pacs/error.hpp"
#include "pacs/rng.hpp"

namespace pacs {
namespace {

void check_pair_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "correlation: x and y lengths differ");
  }
  if (x.size() < 2) throw Error(ErrorCode::kEmptyInput, "correlation: need n >= 2");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::kNonFinite, "correlation: non-finite value");
    }
  }
}

std::uint64_t tied_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

// Sums t(t-1)/2 over runs of equal values in an already sorted sequence.
template <typename It, typename Eq>
std::uint64_t sum_tied_runs(It first, It last, Eq eq) {
  std::uint64_t total = 0;
  while (first != last) {
    It run_end = std::next(first);
    while (run_end != last && eq(*first, *run_end)) ++run_end;
    total += tied_pairs(static_cast<std::uint64_t>(std::distance(first, run_end)));
    first = run_end;
  }
  return total;
}

// Bottom-up merge sort of `v` returning the number of strict inversions.
std::uint64_t sort_count_inversions(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> buf(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return inversions;
}

std::size_t count_distinct(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

}  // namespace

PairCounts count_pairs_exhaustive(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) {
        ++c.tied_both;
      } else if (dx == 0.0) {
        ++c.tied_x_only;
      } else if (dy == 0.0) {
        ++c.tied_y_only;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

PairCounts count_pairs_fast(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const std::uint64_t all = tied_pairs(n);
  const std::uint64_t tied_x = sum_tied_runs(
      order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::uint64_t tied_xy =
      sum_tied_runs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] == x[b] && y[a] == y[b];
      });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::uint64_t swaps = sort_count_inversions(ys);
  const std::uint64_t tied_y =
      sum_tied_runs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  PairCounts c;
  c.tied_both = tied_xy;
  c.tied_x_only = tied_x - tied_xy;
  c.tied_y_only = tied_y - tied_xy;
  c.discordant = swaps;
  c.concordant = all - tied_x - tied_y + tied_xy - swaps;
  return c;
}

double kendall_tau_b(const PairCounts& c) {
  const double cd = static_cast<double>(c.concordant + c.discordant);
  const double den_x = cd + static_cast<double>(c.tied_x_only);
  const double den_y = cd + static_cast<double>(c.tied_y_only);
  if (den_x == 0.0 || den_y == 0.0) {
    throw Error(ErrorCode::kDegenerate, "degenerate ranking");
  }
  const double num =
      static_cast<double>(c.concordant) - static_cast<double>(c.discordant);
  return num / std::sqrt(den_x * den_y);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  return kendall_tau_b(count_pairs_fast(x, y));
}

double kendall_tau_c(std::span<const double> x, std::span<const double> y) {
  const PairCounts c = count_pairs_fast(x, y);
  const auto m = static_cast<double>(std::min(count_distinct(x), count_distinct(y)));
  if (m < 2.0) throw Error(ErrorCode::kDegenerate, "degenerate ranking");
  const auto n = static_cast<double>(x.size());
  const double num =
      static_cast<double>(c.concordant) - static_cast<double>(c.discordant);
  return 2.0 * m * num / (n * n * (m - 1.0));
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank mean((i+1)..j).
    const double rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kDegenerate, "degenerate ranking: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationStat parse_correlation_stat(std::string_view name) {
  if (name == "kendall-b") return CorrelationStat::kKendallB;
  if (name == "kendall-c") return CorrelationStat::kKendallC;
  if (name == "spearman") return CorrelationStat::kSpearman;
  throw Error(ErrorCode::kInvalidArgument, "unknown correlation stat: " + std::string(name));
}

std::string_view to_string(CorrelationStat stat) {
  switch (stat) {
    case CorrelationStat::kKendallB: return "kendall-b";
    case CorrelationStat::kKendallC: return "kendall-c";
    case CorrelationStat::kSpearman: return "spearman";
  }
  return "?";
}

double correlation(CorrelationStat stat, std::span<const double> x, std::span<const double> y) {
  switch (stat) {
    case CorrelationStat::kKendallB: return kendall_tau_b(x, y);
    case CorrelationStat::kKendallC: return kendall_tau_c(x, y);
    case CorrelationStat::kSpearman: return spearman_rho(x, y);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown correlation stat");
}

Winner resolve_winner(int votes_a, int votes_b, std::uint64_t tie_break_seed) {
  if (votes_a != votes_b) return votes_a > votes_b ? Winner::kA : Winner::kB;
  Rng rng(tie_break_seed);
  return rng.below(2) == 0 ? Winner::kA : Winner::kB;
}

PairwiseResult pairwise_accuracy(std::span<const PairwisePair> pairs,
                                 const CaptionScorer& scorer, const PairwiseConfig& cfg) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "pairwise_accuracy: no pairs");
  const int passes = cfg.reference_based ? cfg.draws : 1;
  if (passes < 1) throw Error(ErrorCode::kInvalidArgument, "pairwise_accuracy: draws < 1");
  if (cfg.reference_based) {
    if (cfg.refs_per_draw < 1) {
      throw Error(ErrorCode::kInvalidArgument, "pairwise_accuracy: refs_per_draw < 1");
    }
    for (const auto& p : pairs) {
      if (p.ref_pool.size() < static_cast<std::size_t>(cfg.refs_per_draw)) {
        throw Error(ErrorCode::kInsufficientReferences,
                    "media " + p.media + " has " + std::to_string(p.ref_pool.size()) +
                        " references, need " + std::to_string(cfg.refs_per_draw));
      }
    }
  }

  std::map<std::string, double> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& p : pairs) counts[p.category.empty() ? "none" : p.category] += 1;

  for (int draw = 0; draw < passes; ++draw) {
    Rng rng(substream_seed(cfg.seed, "draws", static_cast<std::uint64_t>(draw)));
    std::map<std::string, double> hits;
    std::vector<std::string> refs;
    for (const auto& p : pairs) {
      refs.clear();
      if (cfg.reference_based) {
        std::vector<std::string> pool = p.ref_pool;
        const auto k = static_cast<std::size_t>(cfg.refs_per_draw);
        for (std::size_t i = 0; i < k; ++i) {
          const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
          std::swap(pool[i], pool[j]);
        }
        refs.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      }
      const double sa = scorer(p.media, p.candidate_a, refs);
      const double sb = scorer(p.media, p.candidate_b, refs);
      const double preferred = p.winner == Winner::kA ? sa : sb;
      const double other = p.winner == Winner::kA ? sb : sa;
      double credit = 0.0;
      if (preferred > other) {
        credit = 1.0;
      } else if (preferred == other) {
        credit = 0.5;
      }
      hits[p.category.empty() ? "none" : p.category] += credit;
    }
    for (const auto& [cat, n] : counts) sums[cat] += hits[cat] / static_cast<double>(n);
  }

  PairwiseResult result;
  result.pairs = pairs.size();
  result.passes = passes;
  for (const auto& [cat, total] : sums) {
    result.per_category[cat] = total / static_cast<double>(passes);
    result.mean += result.per_category[cat];
  }
  result.mean /= static_cast<double>(result.per_category.size());
  return result;
}

double foil_accuracy(std::span<const FoilPair> pairs, const CaptionScorer& scorer) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "foil_accuracy: no pairs");
  std::size_t wins = 0;
  for (const auto& p : pairs) {
    if (p.correct == p.foil) {
      throw Error(ErrorCode::kInvalidArgument, "foil pair with identical ids: " + p.correct);
    }
    if (scorer(p.media, p.correct, p.refs) > scorer(p.media, p.foil, p.refs)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

SystemTable system_report(std::span<const SystemCandidates> models,
                          std::span<const NamedScorer> metrics) {
  if (models.empty() || metrics.empty()) {
    throw Error(ErrorCode::kEmptyInput, "system_report: need at least one model and metric");
  }
  std::set<std::string> media;
  for (const auto& [m, _] : models.front().captions) media.insert(m);
  for (const auto& model : models) {
    std::set<std::string> other;
    for (const auto& [m, _] : model.captions) other.insert(m);
    if (other != media) {
      throw Error(ErrorCode::kInvalidArgument,
                  "system_report: model " + model.name + " covers a different media set");
    }
  }
  if (media.empty()) throw Error(ErrorCode::kEmptyInput, "system_report: no media");

  SystemTable table;
  for (const auto& metric : metrics) table.metrics.push_back(metric.name);
  for (const auto& model : models) {
    table.models.push_back(model.name);
    std::vector<double> row;
    for (const auto& metric : metrics) {
      double sum = 0.0;
      for (const auto& [m, caption] : model.captions) sum += metric.scorer(m, caption, {});
      row.push_back(sum / static_cast<double>(model.captions.size()));
    }
    table.values.push_back(std::move(row));
  }
  return table;
}

std::string SystemTable::format(int precision) const {
  std::size_t name_width = 5;
  for (const auto& m : models) name_width = std::max(name_width, m.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << "model";
  for (const auto& metric : metrics) {
    out << "  " << std::right << std::setw(std::max<int>(10, static_cast<int>(metric.size())))
        << metric;
  }
  out << '\n';
  out << std::fixed << std::setprecision(precision);
  for (std::size_t i = 0; i < models.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(name_width)) << models[i];
    for (std::size_t j = 0; j < metrics.size(); ++j) {
      out << "  " << std::right
          << std::setw(std::max<int>(10, static_cast<int>(metrics[j].size()))) << values[i][j];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pacs
