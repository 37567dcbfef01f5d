#pragma once

// Reference-free and reference-based caption scores for images and videos.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pacs/embedding.hpp"

namespace pacs {

struct ScoreConfig {
  double w = 2.0;        // image score scale
  double video_w = 1.0;  // video score scale

  void validate() const;
};

/// Token-level embeddings of a caption plus its global embedding. `surface`
/// holds one string per token for idf lookup; it may be empty, in which case
/// every token resolves to the unseen-token idf.
struct TokenSequence {
  std::vector<std::string> surface;
  std::vector<EmbeddingVector> tokens;
  EmbeddingVector global;

  void validate() const;
};

class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::unordered_map<std::string, double> weights, std::size_t corpus_size);

  /// Weight of a (normalized) surface token; unseen tokens get ln(M + 1).
  double lookup(std::string_view token) const;
  std::size_t corpus_size() const { return corpus_size_; }
  const std::unordered_map<std::string, double>& weights() const { return weights_; }

 private:
  std::unordered_map<std::string, double> weights_;
  std::size_t corpus_size_ = 0;
};

/// Lowercases and splits on whitespace and ASCII punctuation.
std::vector<std::string> tokenize(std::string_view text);
/// Canonical idf key for a surface token: lowercase, punctuation stripped.
std::string normalize_token(std::string_view token);

/// idf(w) = ln((M + 1) / (df(w) + 1)) over M reference captions.
IdfTable compute_idf(std::span<const std::vector<std::string>> reference_corpus);

double harmonic_mean(double a, double b);

/// w * max(cos(t, v), 0).
double pac_score(const EmbeddingVector& caption, const EmbeddingVector& image,
                 const ScoreConfig& cfg = {});

/// H-Mean(pac_score, max(0, max_r cos(t, r))). Throws kEmptyInput without refs.
double ref_pac_score(const EmbeddingVector& caption, const EmbeddingVector& image,
                     std::span<const EmbeddingVector> refs, const ScoreConfig& cfg = {});

struct FineGrained {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Idf-weighted greedy token/frame matching. Precision averages each token's
/// best (clamped) frame similarity under normalized idf weights; recall
/// averages each frame's best token similarity uniformly.
FineGrained video_fine_parts(const TokenSequence& candidate,
                             std::span<const EmbeddingVector> frames, const IdfTable& idf);
double video_fine(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                  const IdfTable& idf);

/// video_w * (coarse + fine) / 2, coarse = max(0, cos(global, mean_pool(frames))).
double video_score(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                   const IdfTable& idf, const ScoreConfig& cfg = {});

/// Candidate scored against one reference caption: the reference's tokens act
/// as frames and its global embedding as the pooled target.
double caption_pair_score(const TokenSequence& candidate, const TokenSequence& reference,
                          const IdfTable& idf, const ScoreConfig& cfg = {});

/// (video_score + max_r caption_pair_score) / 2.
double ref_video_score(const TokenSequence& candidate, std::span<const EmbeddingVector> frames,
                       std::span<const TokenSequence> refs, const IdfTable& idf,
                       const ScoreConfig& cfg = {});

}  // namespace pacs
