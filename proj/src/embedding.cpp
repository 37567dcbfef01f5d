#include "pacs/embedding.hpp"

#include <cmath>
#include <string>

#include "pacs/error.hpp"
#include "pacs/rng.hpp"

namespace pacs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kDegenerate: return "degenerate input";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kDanglingId: return "dangling id";
    case ErrorCode::kInsufficientReferences: return "insufficient references";
    case ErrorCode::kSchema: return "schema violation";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kUnsupportedDtype: return "unsupported dtype";
    case ErrorCode::kUnknownRole: return "unknown role";
    case ErrorCode::kBadFlags: return "bad flags";
    case ErrorCode::kTruncatedHeader: return "truncated header";
    case ErrorCode::kTruncatedPayload: return "truncated payload";
    case ErrorCode::kDuplicateId: return "duplicate id";
    case ErrorCode::kCorruptIndex: return "corrupt index";
    case ErrorCode::kTrailingBytes: return "trailing bytes";
  }
  return "unknown error";
}

FeatureVector::FeatureVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "feature vector must have dim >= 1");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "feature vector has non-finite entries");
  }
}

FeatureVector::FeatureVector(std::initializer_list<double> values)
    : FeatureVector(Eigen::Map<const Eigen::VectorXd>(
          values.begin(), static_cast<Eigen::Index>(values.size()))) {}

EmbeddingVector EmbeddingVector::from_unit(Eigen::VectorXd values) {
  if (values.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "embedding must have dim >= 1");
  }
  if (!values.allFinite() || std::abs(values.norm() - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "embedding is not unit length");
  }
  return EmbeddingVector(std::move(values));
}

ProjectionHead::ProjectionHead(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw Error(ErrorCode::kEmptyInput, "projection head must be at least 1x1");
  }
  if (!weights_.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "projection head has non-finite weights");
  }
}

ProjectionHead ProjectionHead::identity(Eigen::Index dim) {
  return ProjectionHead(Eigen::MatrixXd::Identity(dim, dim));
}

ProjectionHead ProjectionHead::random_orthonormal(Eigen::Index backbone_dim,
                                                  Eigen::Index joint_dim,
                                                  std::uint64_t seed) {
  if (backbone_dim < 1 || joint_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "head dims must be >= 1");
  }
  const Eigen::Index tall = std::max(backbone_dim, joint_dim);
  const Eigen::Index thin = std::min(backbone_dim, joint_dim);
  Rng rng(seed);
  Eigen::MatrixXd gaussian(tall, thin);
  for (Eigen::Index c = 0; c < thin; ++c) {
    for (Eigen::Index r = 0; r < tall; ++r) gaussian(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, thin);
  if (backbone_dim >= joint_dim) return ProjectionHead(std::move(q));
  return ProjectionHead(q.transpose());
}

EmbeddingVector l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double norm = x.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kDegenerate, "degenerate feature vector");
  }
  return EmbeddingVector(x / norm);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine: dims " + std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
  }
  return u.values().dot(v.values());
}

EmbeddingVector mean_pool(std::span<const EmbeddingVector> seq) {
  if (seq.empty()) throw Error(ErrorCode::kEmptyInput, "mean_pool: empty sequence");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(seq.front().dim());
  for (const auto& e : seq) {
    if (e.dim() != sum.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "mean_pool: unequal dims");
    }
    sum += e.values();
  }
  sum /= static_cast<double>(seq.size());
  // Cancellation below this is numerical noise rather than a direction.
  if (sum.norm() <= 1e-12) {
    throw Error(ErrorCode::kDegenerate, "degenerate pooled vector");
  }
  return l2_normalize(sum);
}

EmbeddingVector project(const FeatureVector& x, const ProjectionHead& head) {
  if (x.dim() != head.backbone_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "project: feature dim " + std::to_string(x.dim()) + " but head expects " +
                    std::to_string(head.backbone_dim()));
  }
  const Eigen::VectorXd z = head.weights().transpose() * x.values();
  if (!(z.norm() > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "degenerate projected vector");
  }
  return l2_normalize(z);
}

Eigen::VectorXd normalize_rows(Eigen::MatrixXd& rows) {
  Eigen::VectorXd norms = rows.rowwise().norm();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (!std::isfinite(norms[i])) {
      throw Error(ErrorCode::kNonFinite, "non-finite projected vector at row " + std::to_string(i));
    }
    if (!(norms[i] > 0.0)) {
      throw Error(ErrorCode::kDegenerate,
                  "degenerate projected vector at row " + std::to_string(i));
    }
    rows.row(i) /= norms[i];
  }
  return norms;
}

Eigen::MatrixXd project_rows(const Eigen::Ref<const Eigen::MatrixXd>& features,
                             const ProjectionHead& head) {
  if (features.cols() != head.backbone_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "project_rows: feature dim " + std::to_string(features.cols()) +
                    " but head expects " + std::to_string(head.backbone_dim()));
  }
  Eigen::MatrixXd z = features * head.weights();
  normalize_rows(z);
  return z;
}

}  // namespace pacs
