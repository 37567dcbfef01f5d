#include "pacs/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "pacs/error.hpp"

namespace pacs {

void ScoreConfig::validate() const {
  if (!(w > 0.0) || !(video_w > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "score config: scales must be > 0");
  }
}

void TokenSequence::validate() const {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "token sequence is empty");
  if (!surface.empty() && surface.size() != tokens.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "surface/token count mismatch");
  }
  for (const auto& t : tokens) {
    if (t.dim() != global.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "token and global dims differ");
    }
  }
}

IdfTable::IdfTable(std::unordered_map<std::string, double> weights, std::size_t corpus_size)
    : weights_(std::move(weights)), corpus_size_(corpus_size) {}

double IdfTable::lookup(std::string_view token) const {
  if (auto it = weights_.find(std::string(token)); it != weights_.end()) return it->second;
  return std::log(static_cast<double>(corpus_size_) + 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c) || std::ispunct(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string normalize_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (unsigned char c : token) {
    if (std::isspace(c) || std::ispunct(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

IdfTable compute_idf(std::span<const std::vector<std::string>> reference_corpus) {
  if (reference_corpus.empty()) {
    throw Error(ErrorCode::kEmptyInput, "compute_idf: empty reference corpus");
  }
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& caption : reference_corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& tok : caption) {
      if (seen.insert(tok).second) ++df[tok];
    }
  }
  const double m1 = static_cast<double>(reference_corpus.size()) + 1.0;
  std::unordered_map<std::string, double> weights;
  weights.reserve(df.size());
  for (const auto& [tok, count] : df) {
    weights.emplace(tok, std::log(m1 / (static_cast<double>(count) + 1.0)));
  }
  return IdfTable(std::move(weights), reference_corpus.size());
}

double harmonic_mean(double a, double b) {
  const double s = a + b;
  if (s == 0.0) return 0.0;
  return 2.0 * a * b / s;
}

double pac_score(const EmbeddingVector& caption, const EmbeddingVector& image,
                 const ScoreConfig& cfg) {
  return cfg.w * std::max(cosine(caption, image), 0.0);
}

double ref_pac_score(const EmbeddingVector& caption, const EmbeddingVector& image,
                     std::span<const EmbeddingVector> refs, const ScoreConfig& cfg) {
  if (refs.empty()) throw Error(ErrorCode::kEmptyInput, "ref_pac_score: empty reference set");
  double best = 0.0;
  for (const auto& r : refs) best = std::max(best, cosine(caption, r));
  return harmonic_mean(pac_score(caption, image, cfg), best);
}

FineGrained video_fine_parts(const TokenSequence& candidate,
                             std::span<const EmbeddingVector> frames, const IdfTable& idf) {
  candidate.validate();
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "video_fine: no frames");
  const std::size_t n_tok = candidate.tokens.size();

  // sim(i, j) between token i and frame j, clamped at zero.
  Eigen::MatrixXd sim(static_cast<Eigen::Index>(n_tok), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < n_tok; ++i) {
    for (std::size_t j = 0; j < frames.size(); ++j) {
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::max(cosine(candidate.tokens[i], frames[j]), 0.0);
    }
  }

  std::vector<double> weight(n_tok);
  double total = 0.0;
  for (std::size_t i = 0; i < n_tok; ++i) {
    weight[i] = candidate.surface.empty()
                    ? idf.lookup("")
                    : idf.lookup(normalize_token(candidate.surface[i]));
    total += weight[i];
  }
  if (!(total > 0.0)) {
    std::fill(weight.begin(), weight.end(), 1.0);
    total = static_cast<double>(n_tok);
  }

  FineGrained out;
  for (std::size_t i = 0; i < n_tok; ++i) {
    out.precision += (weight[i] / total) * sim.row(static_cast<Eigen::Index>(i)).maxCoeff();
  }
  for (std::size_t j = 0; j < frames.size(); ++j) {
    out.recall += sim.col(static_cast<Eigen::Index>(j)).maxCoeff();
  }
  out.recall /= static_cast<double>(frames.size());
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

double video_fine(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                  const IdfTable& idf) {
  return video_fine_parts(candidate, frames, idf).f1;
}

namespace {

double coarse_fine(const TokenSequence& candidate, const EmbeddingVector& target,
                   std::span<const EmbeddingVector> units, const IdfTable& idf,
                   const ScoreConfig& cfg) {
  const double coarse = std::max(cosine(candidate.global, target), 0.0);
  const double fine = video_fine(candidate, units, idf);
  return cfg.video_w * (coarse + fine) / 2.0;
}

}  // namespace

double video_score(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                   const IdfTable& idf, const ScoreConfig& cfg) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "video_score: no frames");
  return coarse_fine(candidate, mean_pool(frames), frames, idf, cfg);
}

double caption_pair_score(const TokenSequence& candidate, const TokenSequence& reference,
                          const IdfTable& idf, const ScoreConfig& cfg) {
  reference.validate();
  return coarse_fine(candidate, reference.global, reference.tokens, idf, cfg);
}

double ref_video_score(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                       std::span<const TokenSequence> refs, const IdfTable& idf,
                       const ScoreConfig& cfg) {
  if (refs.empty()) throw Error(ErrorCode::kEmptyInput, "ref_video_score: empty reference set");
  double best = 0.0;
  for (const auto& r : refs) best = std::max(best, caption_pair_score(candidate, r, idf, cfg));
  return (video_score(candidate, frames, idf, cfg) + best) / 2.0;
}

}  // namespace pacs
