#pragma once

// Positive-augmented symmetric InfoNCE and its analytic gradient with respect
// to both projection heads.

#include <span>

#include <Eigen/Dense>

#include "pacs/embedding.hpp"

namespace pacs {

struct LossConfig {
  double tau = 0.01;
  double lambda_v = 0.05;  // generated image vs. real caption
  double lambda_t = 0.1;   // real image vs. generated caption

  /// Throws kInvalidArgument unless tau > 0 and both lambdas are >= 0.
  void validate() const;
};

/// Pre-projection features for one batch, one row per tuple.
struct PacBatch {
  Eigen::MatrixXd visual;
  Eigen::MatrixXd text;
  Eigen::MatrixXd visual_gen;
  Eigen::MatrixXd text_gen;

  Eigen::Index size() const { return visual.rows(); }
  void validate() const;
};

struct Heads {
  ProjectionHead visual;
  ProjectionHead textual;
};

/// Loss and gradient of one symmetric InfoNCE term, taken with respect to the
/// cosine matrix `sim` (rows: images, cols: texts).
struct ContrastiveTerm {
  double loss = 0.0;
  Eigen::MatrixXd grad_sim;
  /// d loss / d log(tau).
  double grad_log_tau = 0.0;
};

ContrastiveTerm info_nce_term(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau);

/// Symmetric InfoNCE over unit-row matrices; row i of `images` matches row i
/// of `texts`.
double info_nce(const Eigen::Ref<const Eigen::MatrixXd>& images,
                const Eigen::Ref<const Eigen::MatrixXd>& texts, double tau);
double info_nce(std::span<const EmbeddingVector> images,
                std::span<const EmbeddingVector> texts, double tau);

struct PacLossTerms {
  double real = 0.0;           // L(V, T)
  double generated_image = 0.0;  // L(V', T)
  double generated_text = 0.0;   // L(V, T')
  double total = 0.0;
};

PacLossTerms pac_loss_terms(const PacBatch& batch, const Heads& heads,
                            const LossConfig& cfg);
double pac_loss(const PacBatch& batch, const Heads& heads, const LossConfig& cfg);

struct PacLossGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad_visual;   // same shape as heads.visual.weights()
  Eigen::MatrixXd grad_textual;  // same shape as heads.textual.weights()
  double grad_log_tau = 0.0;
};

PacLossGrad pac_loss_grad(const PacBatch& batch, const Heads& heads,
                          const LossConfig& cfg);

}  // namespace pacs
