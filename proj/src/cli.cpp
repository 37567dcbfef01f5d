#include "pacs/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pacs/checkpoint.hpp"
#include "pacs/container.hpp"
#include "pacs/error.hpp"
#include "pacs/evalstats.hpp"
#include "pacs/manifest.hpp"
#include "pacs/report.hpp"
#include "pacs/rng.hpp"
#include "pacs/store.hpp"
#include "pacs/trainer.hpp"

namespace pacs {
namespace {

using nlohmann::json;

struct TrainOptions {
  std::string tuples;
  std::string features_visual;
  std::string features_text;
  std::string val_split;
  std::string init;
  std::string out;
  std::string history;
  double lambda_v = 0.05;
  double lambda_t = 0.1;
  double lr = 1e-4;
  std::size_t batch = 256;
  std::size_t patience = 1500;
  std::size_t max_iters = 100000;
  std::size_t val_every = 100;
  double tau = 0.01;
  bool learn_tau = false;
  double weight_decay = 0.01;
  Eigen::Index joint_dim = 512;
  std::uint64_t seed = 0;
};

struct ScoreOptions {
  std::string checkpoint;
  std::string manifest;
  std::string features_visual;
  std::string features_text;
  std::string tokens;
  std::string frames;
  bool refs = false;
  double w = 2.0;
  double video_w = 1.0;
  std::string out = "-";
};

struct CorrOptions {
  std::string scores;
  std::string judgments;
  std::string stat = "kendall-b";
};

struct PairwiseOptions {
  std::string pairs;
  std::string checkpoint;
  std::string features_visual;
  std::string features_text;
  bool refs = false;
  int draws = 5;
  int refs_per_draw = 5;
  double w = 2.0;
  std::uint64_t seed = 0;
};

struct TuneOptions {
  TrainOptions train;
  std::vector<std::string> judgments;
  std::string stat = "kendall-c";
  std::string grid = "0:0,0:0.1,0.05:0,0.05:0.1,0.1:0.1";
  double w = 2.0;
};

struct SystemOptions {
  std::string systems;
  std::string checkpoint;
  std::string features_visual;
  std::string features_text;
  double w = 2.0;
};

// Either writes to a file or to the dispatcher's `out` stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw Error(ErrorCode::kIo, "cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void require_role(const EmbeddingContainer& c, Role role, const std::string& path) {
  if (c.role != role) {
    throw Error(ErrorCode::kSchema, path + ": expected role " + std::string(to_string(role)) +
                                        ", found " + std::string(to_string(c.role)));
  }
}

EmbeddingContainer load_role(const std::string& path, Role role) {
  EmbeddingContainer c = read_container(path);
  require_role(c, role, path);
  return c;
}

std::optional<double> parse_fraction(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

TrainData split_tuples(const TrainOptions& o) {
  const std::vector<TupleRecord> records = read_tuples(o.tuples);
  TrainData data;
  if (o.val_split.empty()) {
    // Use the manifest's own split tags.
    for (const auto& r : records) {
      if (!r.split) {
        throw Error(ErrorCode::kSchema,
                    "tuples lack 'split' tags; pass --val-split <fraction|path>");
      }
      (*r.split == "val" ? data.val : data.train).push_back(r.tuple);
    }
    return data;
  }
  if (auto frac = parse_fraction(o.val_split)) {
    if (!(*frac > 0.0 && *frac < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "--val-split fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(substream_seed(o.seed, "split"));
    rng.shuffle(std::span<std::size_t>(order));
    const auto n_val = static_cast<std::size_t>(std::ceil(*frac * static_cast<double>(records.size())));
    std::vector<bool> is_val(records.size(), false);
    for (std::size_t i = 0; i < n_val && i < order.size(); ++i) is_val[order[i]] = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
      (is_val[i] ? data.val : data.train).push_back(records[i].tuple);
    }
    return data;
  }
  for (const auto& r : records) data.train.push_back(r.tuple);
  for (const auto& r : read_tuples(o.val_split)) data.val.push_back(r.tuple);
  return data;
}

FeatureStore load_feature_store(const TrainOptions& o) {
  return FeatureStore{
      FeatureTable::from_container(load_role(o.features_visual, Role::kVisualFeature)),
      FeatureTable::from_container(load_role(o.features_text, Role::kTextFeature))};
}

TrainConfig make_train_config(const TrainOptions& o) {
  TrainConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.batch_size = o.batch;
  cfg.patience_iters = o.patience;
  cfg.max_iters = o.max_iters;
  cfg.val_every = o.val_every;
  cfg.seed = o.seed;
  cfg.joint_dim = o.joint_dim;
  cfg.learn_temperature = o.learn_tau;
  cfg.adamw.weight_decay = o.weight_decay;
  return cfg;
}

void add_train_flags(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--tuples", o.tuples, "Augmented tuple manifest (JSONL)")->required();
  cmd->add_option("--features-visual", o.features_visual, "visual-feature container")->required();
  cmd->add_option("--features-text", o.features_text, "text-feature container")->required();
  cmd->add_option("--val-split", o.val_split,
                  "Validation fraction in (0,1) or a tuple manifest path; "
                  "omit to use the manifest's split tags");
  cmd->add_option("--init", o.init, "Initial heads (checkpoint container)");
  cmd->add_option("--lambda-v", o.lambda_v, "Weight of the generated-image term")->capture_default_str();
  cmd->add_option("--lambda-t", o.lambda_t, "Weight of the generated-text term")->capture_default_str();
  cmd->add_option("--lr", o.lr, "AdamW learning rate")->capture_default_str();
  cmd->add_option("--batch", o.batch, "Batch size")->capture_default_str();
  cmd->add_option("--patience", o.patience, "Early-stopping patience (iterations)")->capture_default_str();
  cmd->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--val-every", o.val_every, "Validation cadence (iterations)")->capture_default_str();
  cmd->add_option("--tau", o.tau, "InfoNCE temperature")->capture_default_str();
  cmd->add_flag("--learn-tau", o.learn_tau, "Learn log(tau) jointly with the heads");
  cmd->add_option("--weight-decay", o.weight_decay, "AdamW decoupled weight decay")->capture_default_str();
  cmd->add_option("--joint-dim", o.joint_dim, "Joint dim when no --init is given")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Root random seed")->capture_default_str();
}

int run_train(const TrainOptions& o, std::ostream& out) {
  const TrainData data = split_tuples(o);
  const FeatureStore store = load_feature_store(o);
  std::optional<Heads> init;
  if (!o.init.empty()) init = load_checkpoint(o.init).heads;
  const TrainConfig cfg = make_train_config(o);
  const LossConfig loss{o.tau, o.lambda_v, o.lambda_t};

  const TrainResult result = train(data, store, cfg, loss, init);
  Checkpoint ck{.heads = result.heads,
                .loss = LossConfig{result.tau, o.lambda_v, o.lambda_t},
                .train = cfg,
                .iterations = result.iterations,
                .best_iteration = result.best_iteration,
                .best_val_loss = result.best_val_loss};
  save_checkpoint(ck, o.out);

  if (!o.history.empty()) {
    Sink sink(o.history, out);
    for (std::size_t i = 0; i < result.train_loss.size(); ++i) {
      sink.stream() << json{{"iteration", i + 1}, {"train_loss", result.train_loss[i]}}.dump() << '\n';
    }
    for (const auto& v : result.validation) {
      sink.stream() << json{{"iteration", v.iteration}, {"val_loss", v.loss}}.dump() << '\n';
    }
  }
  out << json{{"kind", "train"},
              {"seed", o.seed},
              {"train_tuples", data.train.size()},
              {"val_tuples", data.val.size()},
              {"iterations", result.iterations},
              {"best_iteration", result.best_iteration},
              {"best_val_loss", result.best_val_loss},
              {"tau", result.tau},
              {"stop", result.stop_reason == StopReason::kPatience ? "patience" : "max-iters"},
              {"checkpoint", o.out}}
             .dump()
      << '\n';
  return 0;
}

int run_score(const ScoreOptions& o, ScoreMode mode, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const auto manifest = read_judgments(o.manifest);
  ScoreConfig cfg{o.w, o.video_w};
  cfg.validate();

  EmbeddingStore store;
  if (mode == ScoreMode::kImage) {
    const auto visual = load_role(o.features_visual, Role::kVisualFeature);
    const auto text = load_role(o.features_text, Role::kTextFeature);
    store = EmbeddingStore::project(ck.heads, &visual, &text);
  } else {
    const auto text = load_role(o.features_text, Role::kTextFeature);
    const auto tokens = load_role(o.tokens, Role::kTextTokenSequence);
    const auto frames = load_role(o.frames, Role::kFrameSequence);
    store = EmbeddingStore::project(ck.heads, nullptr, &text, &tokens, &frames);
  }
  const ScoreReport report = batch_score(manifest, store, mode,
                                         o.refs ? ScoreVariant::kRef : ScoreVariant::kFree, cfg);
  Sink sink(o.out, out);
  write_report(sink.stream(), report);
  return 0;
}

int run_eval_corr(const CorrOptions& o, std::ostream& out) {
  const CorrelationStat stat = parse_correlation_stat(o.stat);
  std::ifstream in(o.scores);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + o.scores);
  const auto scores = read_report_scores(in);
  const auto judgments = read_judgments(o.judgments);

  std::vector<double> predicted, human;
  std::vector<std::string> missing;
  for (const auto& j : judgments) {
    if (!j.human) throw Error(ErrorCode::kSchema, "judgment " + j.id + " has no human score");
    auto it = scores.find(j.id);
    if (it == scores.end()) {
      missing.push_back(j.id);
      continue;
    }
    predicted.push_back(it->second);
    human.push_back(*j.human);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " judgment id(s) missing from scores:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kDanglingId, msg);
  }
  const double value = correlation(stat, predicted, human);
  out << json{{"kind", "correlation"}, {"stat", to_string(stat)}, {"n", predicted.size()},
              {"value", value}}
             .dump()
      << '\n';
  return 0;
}

EmbeddingStore load_image_store(const std::string& checkpoint, const std::string& visual_path,
                                const std::string& text_path) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const auto visual = load_role(visual_path, Role::kVisualFeature);
  const auto text = load_role(text_path, Role::kTextFeature);
  return EmbeddingStore::project(ck.heads, &visual, &text);
}

void check_ids(const EmbeddingStore& store, std::span<const std::string> media,
               std::span<const std::string> captions) {
  std::set<std::string> missing;
  for (const auto& m : media) {
    if (store.image(m) == nullptr) missing.insert("media:" + m);
  }
  for (const auto& c : captions) {
    if (store.caption(c) == nullptr) missing.insert("caption:" + c);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " dangling id(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kDanglingId, msg);
  }
}

int run_eval_pairwise(const PairwiseOptions& o, std::ostream& out) {
  const auto pairs = read_pairwise(o.pairs, o.seed);
  const EmbeddingStore store = load_image_store(o.checkpoint, o.features_visual, o.features_text);
  std::vector<std::string> media, captions;
  for (const auto& p : pairs) {
    media.push_back(p.media);
    captions.push_back(p.candidate_a);
    captions.push_back(p.candidate_b);
    if (o.refs) captions.insert(captions.end(), p.ref_pool.begin(), p.ref_pool.end());
  }
  check_ids(store, media, captions);

  ScoreConfig cfg;
  cfg.w = o.w;
  cfg.validate();
  PairwiseConfig pc{o.refs_per_draw, o.draws, o.seed, o.refs};
  const PairwiseResult r = pairwise_accuracy(pairs, make_image_scorer(store, cfg, o.refs), pc);

  json categories = json::object();
  for (const auto& [cat, acc] : r.per_category) categories[cat] = 100.0 * acc;
  out << json{{"kind", "pairwise"},
              {"seed", o.seed},
              {"scorer", o.refs ? "refpac-s" : "pac-s"},
              {"pairs", r.pairs},
              {"passes", r.passes},
              {"refs_per_draw", o.refs ? o.refs_per_draw : 0},
              {"accuracy", categories},
              {"mean", 100.0 * r.mean}}
             .dump()
      << '\n';
  return 0;
}

int run_eval_foil(const PairwiseOptions& o, std::ostream& out) {
  const auto pairs = read_foil(o.pairs);
  const EmbeddingStore store = load_image_store(o.checkpoint, o.features_visual, o.features_text);
  std::vector<std::string> media, captions;
  for (const auto& p : pairs) {
    media.push_back(p.media);
    captions.push_back(p.correct);
    captions.push_back(p.foil);
    if (o.refs) {
      if (p.refs.empty()) {
        throw Error(ErrorCode::kInsufficientReferences, "foil pair for " + p.media + " has no refs");
      }
      captions.insert(captions.end(), p.refs.begin(), p.refs.end());
    }
  }
  check_ids(store, media, captions);
  ScoreConfig cfg;
  cfg.w = o.w;
  cfg.validate();
  const double acc = foil_accuracy(pairs, make_image_scorer(store, cfg, o.refs));
  out << json{{"kind", "foil"},
              {"scorer", o.refs ? "refpac-s" : "pac-s"},
              {"pairs", pairs.size()},
              {"accuracy", 100.0 * acc}}
             .dump()
      << '\n';
  return 0;
}

std::vector<LambdaPair> parse_grid(const std::string& text) {
  std::vector<LambdaPair> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "grid point '" + item + "' must be lambda_v:lambda_t");
    }
    const auto lv = parse_fraction(item.substr(0, colon));
    const auto lt = parse_fraction(item.substr(colon + 1));
    if (!lv || !lt) throw Error(ErrorCode::kInvalidArgument, "bad grid point '" + item + "'");
    grid.push_back({*lv, *lt});
  }
  if (grid.empty()) throw Error(ErrorCode::kEmptyInput, "empty lambda grid");
  return grid;
}

int run_tune(const TuneOptions& o, std::ostream& out) {
  const TrainData data = split_tuples(o.train);
  const FeatureStore store = load_feature_store(o.train);
  const std::vector<LambdaPair> grid = parse_grid(o.grid);

  GridSearchBundle bundle;
  bundle.data = &data;
  bundle.store = &store;
  bundle.train = make_train_config(o.train);
  bundle.loss = LossConfig{o.train.tau, 0.0, 0.0};
  bundle.score.w = o.w;
  if (!o.train.init.empty()) bundle.init = load_checkpoint(o.train.init).heads;
  const CorrelationStat stat = parse_correlation_stat(o.stat);
  for (const auto& path : o.judgments) {
    CorrelationTask task{path, read_judgments(path), stat};
    std::vector<std::string> missing;
    for (const auto& item : task.items) {
      if (!store.text.contains(item.candidate)) missing.push_back("candidate:" + item.candidate);
      if (!store.visual.contains(item.media)) missing.push_back("media:" + item.media);
    }
    if (!missing.empty()) {
      std::string msg = path + ": " + std::to_string(missing.size()) + " dangling id(s):";
      for (const auto& m : missing) msg += " " + m;
      throw Error(ErrorCode::kDanglingId, msg);
    }
    bundle.tasks.push_back(std::move(task));
  }

  const GridSearchResult r = grid_search(grid, bundle);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << json{{"kind", "grid-point"},
                {"lambda_v", grid[i].lambda_v},
                {"lambda_t", grid[i].lambda_t},
                {"mean_correlation", r.mean_correlation[i]}}
               .dump()
        << '\n';
  }
  out << json{{"kind", "grid-best"},
              {"seed", o.train.seed},
              {"stat", to_string(stat)},
              {"lambda_v", r.best.lambda_v},
              {"lambda_t", r.best.lambda_t}}
             .dump()
      << '\n';

  if (!o.train.out.empty()) {
    LossConfig loss{o.train.tau, r.best.lambda_v, r.best.lambda_t};
    const TrainResult best = train(data, store, bundle.train, loss, bundle.init);
    save_checkpoint({.heads = best.heads,
                     .loss = LossConfig{best.tau, r.best.lambda_v, r.best.lambda_t},
                     .train = bundle.train,
                     .iterations = best.iterations,
                     .best_iteration = best.best_iteration,
                     .best_val_loss = best.best_val_loss},
                    o.train.out);
  }
  return 0;
}

int run_inspect(const std::string& path, std::ostream& out) {
  const EmbeddingContainer c = read_container(path);
  out << "path:     " << path << '\n'
      << "version:  " << c.version << '\n'
      << "dtype:    f32\n"
      << "role:     " << to_string(c.role) << '\n'
      << "shape:    " << c.rows << " x " << c.cols << '\n'
      << "entries:  " << c.entries.size() << '\n'
      << "labels:   " << (c.row_labels.empty() ? "no" : "yes") << '\n';
  if (!c.metadata.empty()) out << "metadata: " << c.metadata << '\n';
  return 0;
}

int run_system_report(const SystemOptions& o, std::ostream& out) {
  const auto systems = read_systems(o.systems);
  const EmbeddingStore store = load_image_store(o.checkpoint, o.features_visual, o.features_text);
  std::vector<std::string> media, captions;
  for (const auto& s : systems) {
    for (const auto& [m, c] : s.captions) {
      media.push_back(m);
      captions.push_back(c);
    }
  }
  check_ids(store, media, captions);
  ScoreConfig cfg;
  cfg.w = o.w;
  cfg.validate();
  const std::vector<NamedScorer> metrics{{"PAC-S", make_image_scorer(store, cfg, false)}};
  out << system_report(systems, metrics).format();
  return 0;
}

}  // namespace

int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Positive-augmented contrastive captioning metric", "pacs"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Finetune the projection heads");
  add_train_flags(train_cmd, train_opts);
  train_cmd->add_option("--out", train_opts.out, "Output checkpoint")->required();
  train_cmd->add_option("--history", train_opts.history, "Write per-iteration losses (JSONL)");

  ScoreOptions score_opts;
  auto* score_cmd = app.add_subcommand("score", "PAC-S / RefPAC-S for image captions");
  score_cmd->add_option("--checkpoint", score_opts.checkpoint)->required();
  score_cmd->add_option("--manifest", score_opts.manifest, "Judgment manifest (JSONL)")->required();
  score_cmd->add_option("--features-visual", score_opts.features_visual)->required();
  score_cmd->add_option("--features-text", score_opts.features_text)->required();
  score_cmd->add_flag("--refs", score_opts.refs, "Reference-based variant (RefPAC-S)");
  score_cmd->add_option("--w", score_opts.w, "Score scale")->capture_default_str();
  score_cmd->add_option("--out", score_opts.out, "Report path, '-' for stdout")->capture_default_str();

  ScoreOptions video_opts;
  auto* video_cmd = app.add_subcommand("score-video", "PAC-S / RefPAC-S for video captions");
  video_cmd->add_option("--checkpoint", video_opts.checkpoint)->required();
  video_cmd->add_option("--manifest", video_opts.manifest)->required();
  video_cmd->add_option("--features-text", video_opts.features_text,
                        "Global caption features (text-feature container)")->required();
  video_cmd->add_option("--tokens", video_opts.tokens, "text-token-sequence container")->required();
  video_cmd->add_option("--frames", video_opts.frames, "frame-sequence container")->required();
  video_cmd->add_flag("--refs", video_opts.refs, "Reference-based variant");
  video_cmd->add_option("--w", video_opts.video_w, "Score scale")->capture_default_str();
  video_cmd->add_option("--out", video_opts.out)->capture_default_str();

  CorrOptions corr_opts;
  auto* corr_cmd = app.add_subcommand("eval-corr", "Correlate a score report with human judgments");
  corr_cmd->add_option("--scores", corr_opts.scores, "Score report")->required();
  corr_cmd->add_option("--judgments", corr_opts.judgments, "Judgment manifest")->required();
  corr_cmd->add_option("--stat", corr_opts.stat)
      ->check(CLI::IsMember({"kendall-b", "kendall-c", "spearman"}))
      ->capture_default_str();

  PairwiseOptions pair_opts;
  auto* pair_cmd = app.add_subcommand("eval-pairwise", "Pairwise preference accuracy");
  pair_cmd->add_option("--pairs", pair_opts.pairs)->required();
  pair_cmd->add_option("--checkpoint", pair_opts.checkpoint)->required();
  pair_cmd->add_option("--features-visual", pair_opts.features_visual)->required();
  pair_cmd->add_option("--features-text", pair_opts.features_text)->required();
  pair_cmd->add_flag("--refs", pair_opts.refs, "Reference-based variant");
  pair_cmd->add_option("--draws", pair_opts.draws)->capture_default_str();
  pair_cmd->add_option("--refs-per-draw", pair_opts.refs_per_draw)->capture_default_str();
  pair_cmd->add_option("--seed", pair_opts.seed)->capture_default_str();
  pair_cmd->add_option("--w", pair_opts.w)->capture_default_str();

  PairwiseOptions foil_opts;
  auto* foil_cmd = app.add_subcommand("eval-foil", "Correct-vs-foil caption accuracy");
  foil_cmd->add_option("--pairs", foil_opts.pairs)->required();
  foil_cmd->add_option("--checkpoint", foil_opts.checkpoint)->required();
  foil_cmd->add_option("--features-visual", foil_opts.features_visual)->required();
  foil_cmd->add_option("--features-text", foil_opts.features_text)->required();
  foil_cmd->add_flag("--refs", foil_opts.refs, "Reference-based variant");
  foil_cmd->add_option("--w", foil_opts.w)->capture_default_str();

  TuneOptions tune_opts;
  auto* tune_cmd = app.add_subcommand("tune", "Grid search over (lambda_v, lambda_t)");
  add_train_flags(tune_cmd, tune_opts.train);
  tune_cmd->add_option("--judgments", tune_opts.judgments, "Validation judgment manifests")
      ->required();
  tune_cmd->add_option("--stat", tune_opts.stat)
      ->check(CLI::IsMember({"kendall-b", "kendall-c", "spearman"}))
      ->capture_default_str();
  tune_cmd->add_option("--grid", tune_opts.grid, "Comma-separated lambda_v:lambda_t points")
      ->capture_default_str();
  tune_cmd->add_option("--w", tune_opts.w)->capture_default_str();
  tune_cmd->add_option("--out", tune_opts.train.out, "Retrain at the best point and save");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print container metadata");
  inspect_cmd->add_option("container", inspect_path)->required();

  SystemOptions sys_opts;
  auto* sys_cmd = app.add_subcommand("system-report", "Per-model corpus means");
  sys_cmd->add_option("--systems", sys_opts.systems)->required();
  sys_cmd->add_option("--checkpoint", sys_opts.checkpoint)->required();
  sys_cmd->add_option("--features-visual", sys_opts.features_visual)->required();
  sys_cmd->add_option("--features-text", sys_opts.features_text)->required();
  sys_cmd->add_option("--w", sys_opts.w)->capture_default_str();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return run_train(train_opts, out);
    if (*score_cmd) return run_score(score_opts, ScoreMode::kImage, out);
    if (*video_cmd) return run_score(video_opts, ScoreMode::kVideo, out);
    if (*corr_cmd) return run_eval_corr(corr_opts, out);
    if (*pair_cmd) return run_eval_pairwise(pair_opts, out);
    if (*foil_cmd) return run_eval_foil(foil_opts, out);
    if (*tune_cmd) return run_tune(tune_opts, out);
    if (*inspect_cmd) return run_inspect(inspect_path, out);
    if (*sys_cmd) return run_system_report(sys_opts, out);
  } catch (const Error& e) {
    err << "pacs: error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "pacs: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace pacs
