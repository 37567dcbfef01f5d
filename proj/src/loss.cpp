#include "pacs/loss.hpp"

#include <cmath>
#include <string>

#include "pacs/error.hpp"

namespace pacs {
namespace {

void check_batch_heads(const PacBatch& batch, const Heads& heads) {
  batch.validate();
  if (batch.visual.cols() != heads.visual.backbone_dim() ||
      batch.text.cols() != heads.textual.backbone_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pac_loss: feature dims (" + std::to_string(batch.visual.cols()) + ", " +
                    std::to_string(batch.text.cols()) + ") do not match heads (" +
                    std::to_string(heads.visual.backbone_dim()) + ", " +
                    std::to_string(heads.textual.backbone_dim()) + ")");
  }
  if (heads.visual.joint_dim() != heads.textual.joint_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "pac_loss: heads disagree on joint dim");
  }
}

// Gradient of a row-normalized matrix: given a = z/|z| row-wise and dL/da,
// returns dL/dz.
Eigen::MatrixXd normalize_backward(const Eigen::MatrixXd& unit, const Eigen::VectorXd& norms,
                                   const Eigen::MatrixXd& grad_unit) {
  Eigen::MatrixXd out(unit.rows(), unit.cols());
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double along = unit.row(i).dot(grad_unit.row(i));
    out.row(i) = (grad_unit.row(i) - along * unit.row(i)) / norms[i];
  }
  return out;
}

struct Projected {
  Eigen::MatrixXd unit;
  Eigen::VectorXd norms;
};

Projected forward(const Eigen::MatrixXd& features, const ProjectionHead& head) {
  Projected p{features * head.weights(), {}};
  p.norms = normalize_rows(p.unit);
  return p;
}

}  // namespace

void LossConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidArgument, "loss config: tau must be > 0");
  }
  if (!(lambda_v >= 0.0) || !(lambda_t >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "loss config: lambdas must be >= 0");
  }
}

void PacBatch::validate() const {
  const Eigen::Index n = visual.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (text.rows() != n || visual_gen.rows() != n || text_gen.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "batch parts have different row counts");
  }
  if (visual_gen.cols() != visual.cols() || text_gen.cols() != text.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "generated features must share the backbone dim of their modality");
  }
}

ContrastiveTerm info_nce_term(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau) {
  const Eigen::Index n = sim.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "info_nce: N = 0");
  if (sim.cols() != n) throw Error(ErrorCode::kDimensionMismatch, "info_nce: non-square");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "info_nce: tau must be > 0");

  const Eigen::MatrixXd logits = sim / tau;
  // Row softmax (image -> texts) and column softmax (text -> images).
  Eigen::MatrixXd p_row(n, n);
  Eigen::MatrixXd p_col(n, n);
  double row_sum = 0.0;
  double col_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double z = e.sum();
    p_row.row(i) = e / z;
    row_sum += m + std::log(z) - logits(i, i);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = logits.col(j).maxCoeff();
    const Eigen::VectorXd e = (logits.col(j).array() - m).exp().matrix();
    const double z = e.sum();
    p_col.col(j) = e / z;
    col_sum += m + std::log(z) - logits(j, j);
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  ContrastiveTerm term;
  term.loss = row_sum * inv_n + col_sum * inv_n;
  Eigen::MatrixXd grad_logits = (p_row + p_col) * inv_n;
  grad_logits.diagonal().array() -= 2.0 * inv_n;
  term.grad_sim = grad_logits / tau;
  term.grad_log_tau = -(grad_logits.array() * logits.array()).sum();
  return term;
}

double info_nce(const Eigen::Ref<const Eigen::MatrixXd>& images,
                const Eigen::Ref<const Eigen::MatrixXd>& texts, double tau) {
  if (images.rows() != texts.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "info_nce: |V| != |T|");
  }
  if (images.cols() != texts.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "info_nce: embedding dims differ");
  }
  return info_nce_term(images * texts.transpose(), tau).loss;
}

double info_nce(std::span<const EmbeddingVector> images,
                std::span<const EmbeddingVector> texts, double tau) {
  if (images.size() != texts.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "info_nce: |V| != |T|");
  }
  if (images.empty()) throw Error(ErrorCode::kEmptyInput, "info_nce: N = 0");
  const auto n = static_cast<Eigen::Index>(images.size());
  const Eigen::Index d = images.front().dim();
  Eigen::MatrixXd a(n, d);
  Eigen::MatrixXd b(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (images[i].dim() != d || texts[i].dim() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "info_nce: embedding dims differ");
    }
    a.row(i) = images[i].values().transpose();
    b.row(i) = texts[i].values().transpose();
  }
  return info_nce(a, b, tau);
}

PacLossTerms pac_loss_terms(const PacBatch& batch, const Heads& heads,
                            const LossConfig& cfg) {
  cfg.validate();
  check_batch_heads(batch, heads);
  const Eigen::MatrixXd v = project_rows(batch.visual, heads.visual);
  const Eigen::MatrixXd t = project_rows(batch.text, heads.textual);

  PacLossTerms terms;
  terms.real = info_nce(v, t, cfg.tau);
  // Skip the projections entirely when a term carries no weight.
  if (cfg.lambda_v > 0.0) {
    terms.generated_image = info_nce(project_rows(batch.visual_gen, heads.visual), t, cfg.tau);
  }
  if (cfg.lambda_t > 0.0) {
    terms.generated_text = info_nce(v, project_rows(batch.text_gen, heads.textual), cfg.tau);
  }
  terms.total = terms.real + cfg.lambda_v * terms.generated_image +
                cfg.lambda_t * terms.generated_text;
  return terms;
}

double pac_loss(const PacBatch& batch, const Heads& heads, const LossConfig& cfg) {
  return pac_loss_terms(batch, heads, cfg).total;
}

PacLossGrad pac_loss_grad(const PacBatch& batch, const Heads& heads,
                          const LossConfig& cfg) {
  cfg.validate();
  check_batch_heads(batch, heads);

  const Projected v = forward(batch.visual, heads.visual);
  const Projected t = forward(batch.text, heads.textual);

  const ContrastiveTerm real = info_nce_term(v.unit * t.unit.transpose(), cfg.tau);
  Eigen::MatrixXd grad_v = real.grad_sim * t.unit;
  Eigen::MatrixXd grad_t = real.grad_sim.transpose() * v.unit;

  PacLossGrad out;
  out.loss = real.loss;
  out.grad_log_tau = real.grad_log_tau;

  Eigen::MatrixXd grad_wv =
      batch.visual.transpose() * normalize_backward(v.unit, v.norms, grad_v);
  Eigen::MatrixXd grad_wt = Eigen::MatrixXd::Zero(heads.textual.backbone_dim(),
                                                  heads.textual.joint_dim());

  if (cfg.lambda_v > 0.0) {
    const Projected vg = forward(batch.visual_gen, heads.visual);
    const ContrastiveTerm gen = info_nce_term(vg.unit * t.unit.transpose(), cfg.tau);
    out.loss += cfg.lambda_v * gen.loss;
    out.grad_log_tau += cfg.lambda_v * gen.grad_log_tau;
    const Eigen::MatrixXd grad_vg = cfg.lambda_v * (gen.grad_sim * t.unit);
    grad_t += cfg.lambda_v * (gen.grad_sim.transpose() * vg.unit);
    grad_wv += batch.visual_gen.transpose() * normalize_backward(vg.unit, vg.norms, grad_vg);
  }
  if (cfg.lambda_t > 0.0) {
    const Projected tg = forward(batch.text_gen, heads.textual);
    const ContrastiveTerm gen = info_nce_term(v.unit * tg.unit.transpose(), cfg.tau);
    out.loss += cfg.lambda_t * gen.loss;
    out.grad_log_tau += cfg.lambda_t * gen.grad_log_tau;
    const Eigen::MatrixXd grad_tg = cfg.lambda_t * (gen.grad_sim.transpose() * v.unit);
    const Eigen::MatrixXd grad_v_extra = cfg.lambda_t * (gen.grad_sim * tg.unit);
    grad_wv += batch.visual.transpose() * normalize_backward(v.unit, v.norms, grad_v_extra);
    grad_wt += batch.text_gen.transpose() * normalize_backward(tg.unit, tg.norms, grad_tg);
  }
  grad_wt += batch.text.transpose() * normalize_backward(t.unit, t.norms, grad_t);

  out.grad_visual = std::move(grad_wv);
  out.grad_textual = std::move(grad_wt);
  return out;
}

}  // namespace pacs
