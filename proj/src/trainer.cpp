#include "pacs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pacs/error.hpp"
#include "pacs/rng.hpp"

namespace pacs {
namespace {

void check_heads(const Heads& heads, const FeatureStore& store) {
  if (heads.visual.backbone_dim() != store.visual.dim() ||
      heads.textual.backbone_dim() != store.text.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "heads do not match feature dims");
  }
  if (heads.visual.joint_dim() != heads.textual.joint_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "heads disagree on joint dim");
  }
}

bool all_finite(const PacLossGrad& g) {
  return std::isfinite(g.loss) && g.grad_visual.allFinite() && g.grad_textual.allFinite() &&
         std::isfinite(g.grad_log_tau);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be > 0");
  if (patience_iters == 0) throw Error(ErrorCode::kInvalidArgument, "patience_iters must be > 0");
  if (max_iters == 0) throw Error(ErrorCode::kInvalidArgument, "max_iters must be > 0");
  if (val_every == 0) throw Error(ErrorCode::kInvalidArgument, "val_every must be > 0");
  if (joint_dim < 1) throw Error(ErrorCode::kInvalidArgument, "joint_dim must be >= 1");
  adamw.validate();
}

Heads initial_heads(const FeatureStore& store, const TrainConfig& cfg) {
  return Heads{
      ProjectionHead::random_orthonormal(store.visual.dim(), cfg.joint_dim,
                                         substream_seed(cfg.seed, "init/visual")),
      ProjectionHead::random_orthonormal(store.text.dim(), cfg.joint_dim,
                                         substream_seed(cfg.seed, "init/textual"))};
}

TrainResult train(const TrainData& data, const FeatureStore& store, const TrainConfig& cfg,
                  const LossConfig& loss_cfg, std::optional<Heads> init) {
  cfg.validate();
  loss_cfg.validate();
  if (data.train.empty()) throw Error(ErrorCode::kEmptyInput, "train: empty training split");
  if (data.val.empty()) throw Error(ErrorCode::kEmptyInput, "train: empty validation split");
  store.check(data.train);
  store.check(data.val);

  Heads heads = init ? std::move(*init) : initial_heads(store, cfg);
  check_heads(heads, store);

  LossConfig loss = loss_cfg;
  const PacBatch val_batch = store.gather(data.val);
  auto validation_loss = [&](std::size_t iteration) {
    const double v = pac_loss(val_batch, heads, loss);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  "validation loss is not finite at iteration " + std::to_string(iteration));
    }
    return v;
  };

  const std::size_t n = data.train.size();
  const std::size_t batch_size = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(substream_seed(cfg.seed, "shuffle"));
  std::size_t cursor = n;  // forces a shuffle before the first batch

  OptimizerState visual_state = OptimizerState::zeros_like(heads.visual.weights());
  OptimizerState textual_state = OptimizerState::zeros_like(heads.textual.weights());
  Eigen::MatrixXd log_tau = Eigen::MatrixXd::Constant(1, 1, std::log(loss.tau));
  OptimizerState tau_state = OptimizerState::zeros_like(log_tau);
  AdamWConfig tau_adamw = cfg.adamw;
  tau_adamw.weight_decay = 0.0;

  TrainResult result{.heads = heads, .tau = loss.tau};
  result.best_val_loss = validation_loss(0);
  result.validation.push_back({0, result.best_val_loss});
  result.train_loss.reserve(std::min<std::size_t>(cfg.max_iters, 1u << 20));

  std::vector<AugmentedTuple> batch_tuples(batch_size);
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    if (cursor + batch_size > n) {
      shuffle_rng.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    for (std::size_t i = 0; i < batch_size; ++i) batch_tuples[i] = data.train[order[cursor + i]];
    cursor += batch_size;

    PacLossGrad g;
    try {
      g = pac_loss_grad(store.gather(batch_tuples), heads, loss);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite) throw;
      throw Error(ErrorCode::kNonFinite,
                  "training diverged at iteration " + std::to_string(it) + ": " + e.what());
    }
    if (!all_finite(g)) {
      throw Error(ErrorCode::kNonFinite, "training loss diverged at iteration " +
                                             std::to_string(it) + " (loss = " +
                                             std::to_string(g.loss) + ")");
    }
    adamw_step(heads.visual.mutable_weights(), g.grad_visual, visual_state, cfg.learning_rate,
               cfg.adamw);
    adamw_step(heads.textual.mutable_weights(), g.grad_textual, textual_state,
               cfg.learning_rate, cfg.adamw);
    if (cfg.learn_temperature) {
      adamw_step(log_tau, Eigen::MatrixXd::Constant(1, 1, g.grad_log_tau), tau_state,
                 cfg.learning_rate, tau_adamw);
      loss.tau = std::exp(log_tau(0, 0));
    }
    result.train_loss.push_back(g.loss);
    result.iterations = it;

    if (it % cfg.val_every == 0 || it == cfg.max_iters) {
      const double v = validation_loss(it);
      result.validation.push_back({it, v});
      if (v < result.best_val_loss) {
        result.best_val_loss = v;
        result.best_iteration = it;
        result.heads = heads;
        result.tau = loss.tau;
      }
      if (it - result.best_iteration >= cfg.patience_iters) {
        result.stop_reason = StopReason::kPatience;
        return result;
      }
    }
  }
  result.stop_reason = StopReason::kMaxIters;
  return result;
}

double diagonal_recall_at_1(const Eigen::Ref<const Eigen::MatrixXd>& images,
                            const Eigen::Ref<const Eigen::MatrixXd>& texts) {
  if (images.rows() != texts.rows() || images.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "recall: need equal, nonzero row counts");
  }
  const Eigen::MatrixXd sim = images * texts.transpose();
  const Eigen::Index n = sim.rows();
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best_row = 0, best_col = 0;
    sim.row(i).maxCoeff(&best_col);
    sim.col(i).maxCoeff(&best_row);
    hits += (best_col == i) + (best_row == i);
  }
  return static_cast<double>(hits) / (2.0 * static_cast<double>(n));
}

double evaluate_task(const CorrelationTask& task, const FeatureStore& store, const Heads& heads,
                     const ScoreConfig& score) {
  std::vector<double> predicted, human;
  predicted.reserve(task.items.size());
  human.reserve(task.items.size());
  for (const auto& item : task.items) {
    if (!item.human) {
      throw Error(ErrorCode::kSchema, "task " + task.name + ": record " + item.id + " has no rating");
    }
    const EmbeddingVector caption = l2_normalize(
        (store.text.row(item.candidate) * heads.textual.weights()).transpose().eval());
    const EmbeddingVector image = l2_normalize(
        (store.visual.row(item.media) * heads.visual.weights()).transpose().eval());
    predicted.push_back(pac_score(caption, image, score));
    human.push_back(*item.human);
  }
  return correlation(task.stat, predicted, human);
}

GridSearchResult grid_search(std::span<const LambdaPair> grid, const GridSearchBundle& bundle) {
  if (grid.empty()) throw Error(ErrorCode::kEmptyInput, "grid_search: empty grid");
  if (bundle.tasks.empty()) throw Error(ErrorCode::kEmptyInput, "grid_search: no correlation tasks");
  if (bundle.data == nullptr || bundle.store == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "grid_search: bundle lacks data");
  }
  GridSearchResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& point : grid) {
    LossConfig loss = bundle.loss;
    loss.lambda_v = point.lambda_v;
    loss.lambda_t = point.lambda_t;
    const TrainResult trained = train(*bundle.data, *bundle.store, bundle.train, loss, bundle.init);
    double sum = 0.0;
    for (const auto& task : bundle.tasks) {
      sum += evaluate_task(task, *bundle.store, trained.heads, bundle.score);
    }
    const double mean = sum / static_cast<double>(bundle.tasks.size());
    out.mean_correlation.push_back(mean);
    if (mean > best) {
      best = mean;
      out.best = point;
    }
  }
  return out;
}

}  // namespace pacs
