#pragma once

#include <filesystem>
#include <optional>

#include "pacs/container.hpp"
#include "pacs/loss.hpp"
#include "pacs/trainer.hpp"

namespace pacs {

/// Heads plus the configuration they were trained with. Stored as a
/// projection-heads container: entries "visual" and "textual" (backbone_dim
/// rows each, joint_dim columns) and a JSON metadata document.
struct Checkpoint {
  Heads heads;
  LossConfig loss{};
  std::optional<TrainConfig> train{};
  std::size_t iterations = 0;
  std::size_t best_iteration = 0;
  std::optional<double> best_val_loss{};
};

EmbeddingContainer to_container(const Checkpoint& checkpoint);
Checkpoint from_container(const EmbeddingContainer& container);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pacs
