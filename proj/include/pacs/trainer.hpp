#pragma once

// Finetuning of the two projection heads with the positive-augmented
// contrastive loss, AdamW and validation-based early stopping.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacs/evalstats.hpp"
#include "pacs/loss.hpp"
#include "pacs/optim.hpp"
#include "pacs/records.hpp"
#include "pacs/scoring.hpp"
#include "pacs/store.hpp"

namespace pacs {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 256;
  std::size_t patience_iters = 1500;
  std::size_t max_iters = 100000;
  std::size_t val_every = 100;
  std::uint64_t seed = 0;
  /// Used only when no initial heads are supplied.
  Eigen::Index joint_dim = 512;
  /// Train log(tau) alongside the heads.
  bool learn_temperature = false;
  AdamWConfig adamw;

  void validate() const;
};

struct TrainData {
  std::vector<AugmentedTuple> train;
  std::vector<AugmentedTuple> val;
};

struct ValidationPoint {
  std::size_t iteration = 0;
  double loss = 0.0;
};

enum class StopReason { kPatience, kMaxIters };

struct TrainResult {
  Heads heads;  // best-validation checkpoint
  double tau = 0.0;
  std::vector<double> train_loss{};  // one entry per iteration
  std::vector<ValidationPoint> validation{};
  std::size_t best_iteration = 0;
  double best_val_loss = 0.0;
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::kMaxIters;
};

/// Seeded random orthonormal heads for the store's feature dims.
Heads initial_heads(const FeatureStore& store, const TrainConfig& cfg);

/// Minibatches are drawn from a per-epoch seeded shuffle; a trailing partial
/// batch is dropped. The batch size is capped at the training-set size.
/// Validation loss (full combined loss over the whole validation split) is
/// evaluated at iteration 0, every `val_every` iterations and at the last
/// iteration; training stops once `patience_iters` iterations have passed
/// since the last strict minimum. Throws kNonFinite if the loss diverges.
TrainResult train(const TrainData& data, const FeatureStore& store, const TrainConfig& cfg,
                  const LossConfig& loss_cfg, std::optional<Heads> init = std::nullopt);

/// Fraction of items whose own partner is the top-1 retrieval, in both
/// directions averaged (image->text and text->image).
double diagonal_recall_at_1(const Eigen::Ref<const Eigen::MatrixXd>& images,
                            const Eigen::Ref<const Eigen::MatrixXd>& texts);

struct LambdaPair {
  double lambda_v = 0.0;
  double lambda_t = 0.0;

  bool operator==(const LambdaPair&) const = default;
};

/// Human-rated (caption, image) pairs drawn from the same feature store.
struct CorrelationTask {
  std::string name;
  std::vector<JudgmentRecord> items;  // human must be set
  CorrelationStat stat = CorrelationStat::kKendallC;
};

struct GridSearchBundle {
  const TrainData* data = nullptr;
  const FeatureStore* store = nullptr;
  TrainConfig train;
  LossConfig loss;  // tau is used; lambdas are overridden per grid point
  std::vector<CorrelationTask> tasks;
  ScoreConfig score;
  std::optional<Heads> init;
};

struct GridSearchResult {
  LambdaPair best;
  std::vector<double> mean_correlation;  // one per grid point
};

/// Correlation of pac_score under `heads` with the task's human ratings.
double evaluate_task(const CorrelationTask& task, const FeatureStore& store, const Heads& heads,
                     const ScoreConfig& score);

/// Trains one model per grid point and keeps the one with the best mean
/// correlation; ties go to the earliest grid point.
GridSearchResult grid_search(std::span<const LambdaPair> grid, const GridSearchBundle& bundle);

}  // namespace pacs
