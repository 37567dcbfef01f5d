#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pacs/container.hpp"
#include "pacs/embedding.hpp"
#include "pacs/loss.hpp"
#include "pacs/records.hpp"
#include "pacs/scoring.hpp"

namespace pacs {

/// Pre-projection features of one modality, addressable by id.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(Eigen::Index dim) : dim_(dim) {}
  /// Loads a feature container (one row per id).
  static FeatureTable from_container(const EmbeddingContainer& container);

  void add(std::string id, const Eigen::Ref<const Eigen::RowVectorXd>& features);
  bool contains(std::string_view id) const;
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  Eigen::MatrixXd gather(std::span<const std::string* const> ids) const;
  Eigen::RowVectorXd row(std::string_view id) const;

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::vector<Eigen::RowVectorXd> rows_;
};

struct FeatureStore {
  FeatureTable visual;
  FeatureTable text;

  /// Throws a single kDanglingId error listing every unresolved id.
  void check(std::span<const AugmentedTuple> tuples) const;
  PacBatch gather(std::span<const AugmentedTuple> tuples) const;
};

/// Projected (joint-space) embeddings used for scoring.
class EmbeddingStore {
 public:
  void add_caption(std::string id, EmbeddingVector e);
  void add_image(std::string id, EmbeddingVector e);
  void add_tokens(std::string id, TokenSequence seq);
  void add_frames(std::string id, std::vector<EmbeddingVector> frames);

  const EmbeddingVector* caption(std::string_view id) const;
  const EmbeddingVector* image(std::string_view id) const;
  const TokenSequence* tokens(std::string_view id) const;
  const std::vector<EmbeddingVector>* frames(std::string_view id) const;

  /// Projects every entry of the given containers through the heads. Any of
  /// the pointers may be null. Token sequences take their global embedding
  /// from the text-feature container entry with the same id.
  static EmbeddingStore project(const Heads& heads, const EmbeddingContainer* visual,
                                const EmbeddingContainer* text,
                                const EmbeddingContainer* tokens = nullptr,
                                const EmbeddingContainer* frames = nullptr);

 private:
  std::unordered_map<std::string, EmbeddingVector> captions_;
  std::unordered_map<std::string, EmbeddingVector> images_;
  std::unordered_map<std::string, TokenSequence> tokens_;
  std::unordered_map<std::string, std::vector<EmbeddingVector>> frames_;
};

}  // namespace pacs
