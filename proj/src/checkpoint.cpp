#include "pacs/checkpoint.hpp"

#include "json.hpp"
#include "pacs/error.hpp"

namespace pacs {

using nlohmann::json;

EmbeddingContainer to_container(const Checkpoint& ck) {
  EmbeddingContainer c;
  c.role = Role::kProjectionHeads;
  c.append("visual", ck.heads.visual.weights());
  c.append("textual", ck.heads.textual.weights());

  json meta = {{"tau", ck.loss.tau},
               {"lambda_v", ck.loss.lambda_v},
               {"lambda_t", ck.loss.lambda_t},
               {"iterations", ck.iterations},
               {"best_iteration", ck.best_iteration}};
  if (ck.best_val_loss) meta["best_val_loss"] = *ck.best_val_loss;
  if (ck.train) {
    const TrainConfig& t = *ck.train;
    meta["train"] = {{"learning_rate", t.learning_rate},
                     {"batch_size", t.batch_size},
                     {"patience_iters", t.patience_iters},
                     {"max_iters", t.max_iters},
                     {"val_every", t.val_every},
                     {"seed", t.seed},
                     {"learn_temperature", t.learn_temperature},
                     {"beta1", t.adamw.beta1},
                     {"beta2", t.adamw.beta2},
                     {"eps", t.adamw.eps},
                     {"weight_decay", t.adamw.weight_decay}};
  }
  c.metadata = meta.dump();
  return c;
}

Checkpoint from_container(const EmbeddingContainer& c) {
  if (c.role != Role::kProjectionHeads) {
    throw Error(ErrorCode::kSchema, "checkpoint must be a projection-heads container");
  }
  if (c.find("visual") == nullptr || c.find("textual") == nullptr) {
    throw Error(ErrorCode::kSchema, "checkpoint lacks visual/textual entries");
  }
  Checkpoint ck{.heads = Heads{ProjectionHead(c.block("visual")),
                               ProjectionHead(c.block("textual"))}};
  if (c.metadata.empty()) return ck;
  try {
    const json meta = json::parse(c.metadata);
    ck.loss.tau = meta.value("tau", ck.loss.tau);
    ck.loss.lambda_v = meta.value("lambda_v", ck.loss.lambda_v);
    ck.loss.lambda_t = meta.value("lambda_t", ck.loss.lambda_t);
    ck.iterations = meta.value("iterations", std::size_t{0});
    ck.best_iteration = meta.value("best_iteration", std::size_t{0});
    if (meta.contains("best_val_loss")) ck.best_val_loss = meta["best_val_loss"].get<double>();
    if (meta.contains("train")) {
      const json& j = meta["train"];
      TrainConfig t;
      t.learning_rate = j.value("learning_rate", t.learning_rate);
      t.batch_size = j.value("batch_size", t.batch_size);
      t.patience_iters = j.value("patience_iters", t.patience_iters);
      t.max_iters = j.value("max_iters", t.max_iters);
      t.val_every = j.value("val_every", t.val_every);
      t.seed = j.value("seed", t.seed);
      t.learn_temperature = j.value("learn_temperature", t.learn_temperature);
      t.adamw.beta1 = j.value("beta1", t.adamw.beta1);
      t.adamw.beta2 = j.value("beta2", t.adamw.beta2);
      t.adamw.eps = j.value("eps", t.adamw.eps);
      t.adamw.weight_decay = j.value("weight_decay", t.adamw.weight_decay);
      t.joint_dim = ck.heads.visual.joint_dim();
      ck.train = t;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("checkpoint metadata: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_container(to_container(checkpoint), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return from_container(read_container(path));
}

}  // namespace pacs
