#include <cmath>
#include <limits>

#include "doctest.h"
#include "pacs/error.hpp"
#include "pacs/trainer.hpp"
#include "synthetic.hpp"

using namespace pacs;

namespace {

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 32;
  cfg.max_iters = 400;
  cfg.patience_iters = 400;
  cfg.val_every = 50;
  cfg.joint_dim = 12;
  cfg.seed = 4;
  return cfg;
}

LossConfig toy_loss() {
  LossConfig l;
  l.tau = 0.05;
  return l;
}

/// For each held-out media: its own caption rated 1, a neighbour's rated 0.
CorrelationTask matching_task(const std::vector<AugmentedTuple>& tuples) {
  CorrelationTask task{"toy", {}, CorrelationStat::kKendallC};
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& other = tuples[(i + 1) % tuples.size()];
    task.items.push_back({"p" + std::to_string(i), tuples[i].t, tuples[i].v, 1.0, {}});
    task.items.push_back({"n" + std::to_string(i), other.t, tuples[i].v, 0.0, {}});
  }
  return task;
}

}  // namespace

TEST_CASE("training aligns a rotated toy dataset") {
  const auto toy = synth::rotated_toy(128, 32, 32, 12, 0.01, 21);
  auto cfg = toy_config();
  cfg.max_iters = 1500;
  cfg.patience_iters = 1500;
  const auto r = train(toy.data, toy.store, cfg, toy_loss());
  CHECK(r.best_val_loss < r.validation.front().loss);
  CHECK(synth::recall_at_1(toy.store, toy.data.val, r.heads) == 1.0);
  CHECK(synth::recall_at_1(toy.store, toy.test, r.heads) == 1.0);
  CHECK(r.train_loss.size() == r.iterations);
  CHECK(r.validation.front().iteration == 0);
  CHECK(r.validation.back().iteration == r.iterations);
  CHECK(r.tau == 0.05);
}

TEST_CASE("training is deterministic per seed") {
  const auto toy = synth::rotated_toy(64, 16, 0, 8, 0.01, 5);
  auto cfg = toy_config();
  cfg.max_iters = 60;
  const auto a = train(toy.data, toy.store, cfg, toy_loss());
  const auto b = train(toy.data, toy.store, cfg, toy_loss());
  CHECK(a.train_loss == b.train_loss);
  CHECK(a.heads.visual.weights() == b.heads.visual.weights());
  CHECK(a.heads.textual.weights() == b.heads.textual.weights());
  cfg.seed += 1;
  const auto c = train(toy.data, toy.store, cfg, toy_loss());
  CHECK(c.train_loss != a.train_loss);
}

TEST_CASE("validation schedule and early stopping") {
  SUBCASE("a single tuple cannot improve and stops after the patience window") {
    const auto toy = synth::rotated_toy(1, 1, 0, 4, 0.01, 8);
    TrainConfig cfg = toy_config();
    cfg.val_every = 1;
    cfg.patience_iters = 1;
    cfg.max_iters = 100;
    const auto r = train(toy.data, toy.store, cfg, toy_loss());
    CHECK(r.stop_reason == StopReason::kPatience);
    CHECK(r.iterations == 1);
    CHECK(r.best_iteration == 0);
  }
  SUBCASE("max iterations") {
    const auto toy = synth::rotated_toy(32, 8, 0, 4, 0.01, 8);
    TrainConfig cfg = toy_config();
    cfg.max_iters = 30;
    cfg.val_every = 20;
    const auto r = train(toy.data, toy.store, cfg, toy_loss());
    CHECK(r.stop_reason == StopReason::kMaxIters);
    REQUIRE(r.validation.size() == 3);
    CHECK(r.validation[1].iteration == 20);
    CHECK(r.validation[2].iteration == 30);
  }
}

TEST_CASE("learned temperature moves") {
  const auto toy = synth::rotated_toy(64, 16, 0, 8, 0.01, 2);
  TrainConfig cfg = toy_config();
  cfg.max_iters = 50;
  cfg.learn_temperature = true;
  const auto r = train(toy.data, toy.store, cfg, toy_loss());
  CHECK(r.tau != 0.05);
  CHECK(r.tau > 0.0);
}

TEST_CASE("training input errors") {
  const auto toy = synth::rotated_toy(8, 4, 0, 4, 0.01, 3);
  SUBCASE("empty splits") {
    TrainData d = toy.data;
    d.val.clear();
    CHECK_THROWS_AS(train(d, toy.store, toy_config(), toy_loss()), Error);
    d = toy.data;
    d.train.clear();
    CHECK_THROWS_AS(train(d, toy.store, toy_config(), toy_loss()), Error);
  }
  SUBCASE("dangling ids") {
    TrainData d = toy.data;
    d.train.push_back({"nope", "t0", "vg0", "tg0"});
    CHECK_THROWS_AS(train(d, toy.store, toy_config(), toy_loss()), Error);
  }
  SUBCASE("diverging loss") {
    TrainConfig cfg = toy_config();
    cfg.learning_rate = 1e300;
    cfg.max_iters = 20;
    try {
      train(toy.data, toy.store, cfg, toy_loss());
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNonFinite);
    }
  }
  SUBCASE("bad configuration") {
    TrainConfig cfg = toy_config();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(toy.data, toy.store, cfg, toy_loss()), Error);
    LossConfig l = toy_loss();
    l.tau = 0.0;
    CHECK_THROWS_AS(train(toy.data, toy.store, toy_config(), l), Error);
  }
}

TEST_CASE("diagonal recall") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  CHECK(diagonal_recall_at_1(eye, eye) == 1.0);
  Eigen::MatrixXd swapped = eye;
  swapped.row(0).swap(swapped.row(1));
  CHECK(diagonal_recall_at_1(eye, swapped) == 0.5);
}

TEST_CASE("grid search") {
  const auto toy = synth::rotated_toy(64, 16, 24, 8, 0.01, 13);
  GridSearchBundle bundle;
  bundle.data = &toy.data;
  bundle.store = &toy.store;
  bundle.train = toy_config();
  bundle.train.max_iters = 80;
  bundle.loss = toy_loss();
  bundle.tasks.push_back(matching_task(toy.test));

  SUBCASE("single point") {
    const std::vector<LambdaPair> grid{{0.05, 0.1}};
    const auto r = grid_search(grid, bundle);
    CHECK(r.best == grid[0]);
    REQUIRE(r.mean_correlation.size() == 1);
  }

  SUBCASE("recomputes the same correlations as separate training runs") {
    const std::vector<LambdaPair> grid{{0.0, 0.0}, {0.05, 0.1}, {0.3, 0.3}};
    const auto r = grid_search(grid, bundle);
    REQUIRE(r.mean_correlation.size() == 3);
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      LossConfig l = bundle.loss;
      l.lambda_v = grid[i].lambda_v;
      l.lambda_t = grid[i].lambda_t;
      const auto trained = train(toy.data, toy.store, bundle.train, l);
      CHECK(evaluate_task(bundle.tasks[0], toy.store, trained.heads, bundle.score) == r.mean_correlation[i]);
      if (r.mean_correlation[i] > r.mean_correlation[best]) best = i;
    }
    CHECK(r.best == grid[best]);
  }

  SUBCASE("ties go to the first grid point") {
    const std::vector<LambdaPair> grid{{0.1, 0.0}, {0.1, 0.0}};
    const auto r = grid_search(grid, bundle);
    CHECK(r.mean_correlation[0] == r.mean_correlation[1]);
    CHECK(r.best == grid[0]);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(grid_search({}, bundle), Error);
    bundle.tasks.clear();
    const std::vector<LambdaPair> grid{{0, 0}};
    CHECK_THROWS_AS(grid_search(grid, bundle), Error);
  }
}
