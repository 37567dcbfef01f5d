#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pacs/checkpoint.hpp"
#include "pacs/cli.hpp"
#include "pacs/evalstats.hpp"
#include "pacs/manifest.hpp"
#include "pacs/report.hpp"
#include "synthetic.hpp"

using namespace pacs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

/// A toy workspace on disk: feature containers, tuple and judgment manifests.
class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("pacs_cli_" + std::to_string(counter_++))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    toy_ = synth::rotated_toy(48, 16, 0, 6, 0.01, 31);

    EmbeddingContainer visual, text;
    visual.role = Role::kVisualFeature;
    text.role = Role::kTextFeature;
    visual.cols = text.cols = 6;
    std::ostringstream tuples;
    auto add_all = [&](const std::vector<AugmentedTuple>& ts, const char* split) {
      for (const auto& t : ts) {
        visual.append(t.v, toy_.store.visual.row(t.v));
        visual.append(t.v_gen, toy_.store.visual.row(t.v_gen));
        text.append(t.t, toy_.store.text.row(t.t));
        text.append(t.t_gen, toy_.store.text.row(t.t_gen));
        tuples << nlohmann::json{{"v", t.v}, {"t", t.t}, {"v_gen", t.v_gen}, {"t_gen", t.t_gen},
                                 {"split", split}}
                      .dump()
               << '\n';
      }
    };
    add_all(toy_.data.train, "train");
    add_all(toy_.data.val, "val");
    write_container(visual, path("visual.pacs"));
    write_container(text, path("text.pacs"));
    write_text(path("tuples.jsonl"), tuples.str());

    // Judgments: own caption rated high, a neighbour's caption rated low.
    std::ostringstream j;
    for (int i = 0; i < 10; ++i) {
      const auto k = std::to_string(i), other = std::to_string((i + 3) % 10);
      j << nlohmann::json{{"id", "p" + k}, {"candidate", "t" + k}, {"media", "v" + k}, {"human", 4 + i % 2},
                          {"refs", {"tg" + k, "t" + other}}}
               .dump()
        << '\n';
      j << nlohmann::json{{"id", "n" + k}, {"candidate", "t" + other}, {"media", "v" + k}, {"human", 1 + i % 2},
                          {"refs", {"tg" + k, "t" + other}}}
               .dump()
        << '\n';
    }
    write_text(path("judgments.jsonl"), j.str());
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::vector<std::string> train_args() const {
    return {"train", "--tuples", path("tuples.jsonl"), "--features-visual", path("visual.pacs"),
            "--features-text", path("text.pacs"), "--joint-dim", "6", "--lr", "1e-3", "--tau", "0.05",
            "--batch", "16", "--max-iters", "1500", "--val-every", "50", "--seed", "3",
            "--out", path("heads.pacs")};
  }

  std::vector<std::string> image_args(std::string cmd) const {
    return {std::move(cmd), "--checkpoint", path("heads.pacs"), "--features-visual", path("visual.pacs"),
            "--features-text", path("text.pacs")};
  }

  const synth::ToyDataset& toy() const { return toy_; }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
  synth::ToyDataset toy_;
};

nlohmann::json last_json(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

}  // namespace

TEST_CASE("cli: train, score, correlate") {
  Workspace ws;
  auto r = run(ws.train_args());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto summary = last_json(r.out);
  CHECK(summary["train_tuples"] == 48);
  CHECK(summary["val_tuples"] == 16);
  CHECK(summary["iterations"] == 1500);
  const Checkpoint ck = load_checkpoint(ws.path("heads.pacs"));
  CHECK(ck.heads.visual.joint_dim() == 6);
  CHECK(ck.train->seed == 3);

  // inspect
  r = run({"inspect", ws.path("heads.pacs")});
  CHECK(r.code == 0);
  CHECK(r.out.find("projection-heads") != std::string::npos);

  // score with default w = 2
  auto args = ws.image_args("score");
  args.insert(args.end(), {"--manifest", ws.path("judgments.jsonl"), "--out", ws.path("scores.jsonl")});
  r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::ifstream report_in(ws.path("scores.jsonl"));
  std::string header_line;
  std::getline(report_in, header_line);
  const auto header = nlohmann::json::parse(header_line);
  CHECK(header["w"] == 2.0);
  CHECK(header["variant"] == "free");

  // the report matches a direct library computation
  report_in.seekg(0);
  const auto scores = read_report_scores(report_in);
  const auto visual = read_container(ws.path("visual.pacs"));
  const auto text = read_container(ws.path("text.pacs"));
  const auto store = EmbeddingStore::project(ck.heads, &visual, &text);
  const auto judgments = read_judgments(ws.path("judgments.jsonl"));
  std::vector<double> predicted, human;
  for (const auto& j : judgments) {
    CHECK(scores.at(j.id) == pac_score(*store.caption(j.candidate), *store.image(j.media)));
    predicted.push_back(scores.at(j.id));
    human.push_back(*j.human);
  }

  r = run({"eval-corr", "--scores", ws.path("scores.jsonl"), "--judgments", ws.path("judgments.jsonl"),
           "--stat", "kendall-c"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto corr = last_json(r.out);
  CHECK(corr["n"] == 20);
  CHECK(corr["value"].get<double>() == kendall_tau_c(predicted, human));
  CHECK(corr["value"].get<double>() > 0.0);

  // reference-based report differs from the free one
  args = ws.image_args("score");
  args.insert(args.end(), {"--manifest", ws.path("judgments.jsonl"), "--refs"});
  r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out.find(R"("variant":"ref")") != std::string::npos);
}

TEST_CASE("cli: reruns are byte identical") {
  Workspace ws;
  REQUIRE(run(ws.train_args()).code == 0);
  const auto first = read_file_bytes(ws.path("heads.pacs"));
  REQUIRE(run(ws.train_args()).code == 0);
  CHECK(read_file_bytes(ws.path("heads.pacs")) == first);
}

TEST_CASE("cli: pairwise, foil and system report") {
  Workspace ws;
  REQUIRE(run(ws.train_args()).code == 0);

  std::ostringstream pairs, foil, systems;
  for (int i = 0; i < 8; ++i) {
    const auto k = std::to_string(i), other = std::to_string((i + 1) % 8);
    const bool a_wins = i % 2 == 0;
    pairs << nlohmann::json{{"media", "v" + k},
                            {"a", a_wins ? "t" + k : "t" + other},
                            {"b", a_wins ? "t" + other : "t" + k},
                            {"winner", a_wins ? "A" : "B"},
                            {"category", i < 4 ? "HC" : "HI"},
                            {"refs", {"tg" + k, "t" + k, "tg" + other}}}
                 .dump()
          << '\n';
    foil << nlohmann::json{{"media", "v" + k}, {"correct", "t" + k}, {"foil", "t" + other}, {"refs", {"tg" + k}}}
                .dump()
         << '\n';
    systems << nlohmann::json{{"model", "good"}, {"media", "v" + k}, {"candidate", "t" + k}}.dump() << '\n';
    systems << nlohmann::json{{"model", "shifted"}, {"media", "v" + k}, {"candidate", "t" + other}}.dump() << '\n';
  }
  write_text(ws.path("pairs.jsonl"), pairs.str());
  write_text(ws.path("foil.jsonl"), foil.str());
  write_text(ws.path("systems.jsonl"), systems.str());

  auto args = ws.image_args("eval-pairwise");
  args.insert(args.end(), {"--pairs", ws.path("pairs.jsonl")});
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto j = last_json(r.out);
  CHECK(j["mean"] == 100.0);
  CHECK(j["passes"] == 1);

  args.insert(args.end(), {"--refs", "--refs-per-draw", "2", "--draws", "3", "--seed", "11"});
  r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  j = last_json(r.out);
  CHECK(j["passes"] == 3);
  CHECK(j["scorer"] == "refpac-s");
  const std::string first = r.out;
  CHECK(run(args).out == first);

  args[args.size() - 5] = "4";  // --refs-per-draw
  r = run(args);
  CHECK(r.code == 1);
  CHECK(r.err.find("insufficient") != std::string::npos);

  args = ws.image_args("eval-foil");
  args.insert(args.end(), {"--pairs", ws.path("foil.jsonl")});
  r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(last_json(r.out)["accuracy"] == 100.0);

  args = ws.image_args("system-report");
  args.insert(args.end(), {"--systems", ws.path("systems.jsonl")});
  r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("shifted") != std::string::npos);
  CHECK(r.out.find("PAC-S") != std::string::npos);
}

TEST_CASE("cli: tune") {
  Workspace ws;
  auto args = ws.train_args();
  args[0] = "tune";
  args.resize(args.size() - 2);  // drop --out
  args[std::find(args.begin(), args.end(), "--max-iters") - args.begin() + 1] = "60";
  args.insert(args.end(), {"--judgments", ws.path("judgments.jsonl"), "--grid", "0:0,0.05:0.1"});
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("grid-point") != std::string::npos);
  const auto best = last_json(r.out);
  CHECK(best["kind"] == "grid-best");

  args.back() = "0.05";
  r = run(args);
  CHECK(r.code == 1);
}

TEST_CASE("cli: failures") {
  Workspace ws;
  SUBCASE("unknown flag") {
    auto args = ws.train_args();
    args.push_back("--frobnicate");
    CHECK(run(args).code != 0);
  }
  SUBCASE("no subcommand") { CHECK(run({}).code != 0); }
  SUBCASE("missing file") {
    const auto r = run({"inspect", ws.path("nope.pacs")});
    CHECK(r.code == 1);
    CHECK(r.err.find("[i/o error]") != std::string::npos);
  }
  SUBCASE("corrupt container") {
    write_text(ws.path("junk.pacs"), "not a container");
    const auto r = run({"inspect", ws.path("junk.pacs")});
    CHECK(r.code == 1);
    CHECK(r.err.find("[bad magic]") != std::string::npos);
  }
  SUBCASE("wrong role") {
    auto args = ws.train_args();
    args[4] = ws.path("text.pacs");
    CHECK(run(args).code == 1);
  }
  SUBCASE("dangling manifest ids") {
    REQUIRE(run(ws.train_args()).code == 0);
    write_text(ws.path("bad.jsonl"),
               R"({"id":"x","candidate":"t0","media":"ghost"})" "\n" R"({"id":"y","candidate":"phantom","media":"v0"})");
    auto args = ws.image_args("score");
    args.insert(args.end(), {"--manifest", ws.path("bad.jsonl")});
    const auto r = run(args);
    CHECK(r.code == 1);
    CHECK(r.err.find("ghost") != std::string::npos);
    CHECK(r.err.find("phantom") != std::string::npos);
  }
  SUBCASE("tuples without split tags need --val-split") {
    write_text(ws.path("plain.jsonl"), R"({"v":"v0","t":"t0","v_gen":"vg0","t_gen":"tg0"})" "\n");
    auto args = ws.train_args();
    args[2] = ws.path("plain.jsonl");
    CHECK(run(args).code == 1);
    args.insert(args.end(), {"--val-split", "1.5"});
    CHECK(run(args).code == 1);
  }
}
