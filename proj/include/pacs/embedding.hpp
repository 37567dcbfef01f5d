#pragma once

// Vector primitives for the joint image/text embedding space.
//
// Feature vectors are backbone outputs before projection; embedding vectors
// live on the unit hypersphere. Everything is double precision; interchange
// files hold f32 and are widened on load.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pacs {

class FeatureVector {
 public:
  /// Throws kNonFinite on NaN/inf and kEmptyInput on a zero-length vector.
  explicit FeatureVector(Eigen::VectorXd values);
  FeatureVector(std::initializer_list<double> values);

  Eigen::Index dim() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  Eigen::VectorXd values_;
};

class EmbeddingVector {
 public:
  /// Wraps a vector that is already unit length (within 1e-6).
  static EmbeddingVector from_unit(Eigen::VectorXd values);

  Eigen::Index dim() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  explicit EmbeddingVector(Eigen::VectorXd values) : values_(std::move(values)) {}
  friend EmbeddingVector l2_normalize(const Eigen::Ref<const Eigen::VectorXd>&);

  Eigen::VectorXd values_;
};

/// Linear map (no bias) from backbone features to the joint space, stored as
/// a backbone_dim x joint_dim matrix so that z = weights^T x.
class ProjectionHead {
 public:
  explicit ProjectionHead(Eigen::MatrixXd weights);

  static ProjectionHead identity(Eigen::Index dim);
  /// Orthonormal columns (or rows, when backbone_dim < joint_dim) drawn from
  /// a seeded Gaussian matrix.
  static ProjectionHead random_orthonormal(Eigen::Index backbone_dim,
                                           Eigen::Index joint_dim,
                                           std::uint64_t seed);

  Eigen::Index backbone_dim() const { return weights_.rows(); }
  Eigen::Index joint_dim() const { return weights_.cols(); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::MatrixXd& mutable_weights() { return weights_; }

 private:
  Eigen::MatrixXd weights_;
};

/// x / |x|. Throws kDegenerate ("degenerate feature vector") for zero norm.
EmbeddingVector l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& x);
inline EmbeddingVector l2_normalize(const FeatureVector& x) {
  return l2_normalize(x.values());
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Mean of the vectors, re-normalized.
EmbeddingVector mean_pool(std::span<const EmbeddingVector> seq);

EmbeddingVector project(const FeatureVector& x, const ProjectionHead& head);

/// Batched projection: each row of `features` is mapped through the head and
/// normalized. Rows that project to zero raise kDegenerate.
Eigen::MatrixXd project_rows(const Eigen::Ref<const Eigen::MatrixXd>& features,
                             const ProjectionHead& head);

/// Normalizes each row in place and returns the pre-normalization norms.
Eigen::VectorXd normalize_rows(Eigen::MatrixXd& rows);

}  // namespace pacs
