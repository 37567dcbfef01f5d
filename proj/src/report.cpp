#include "pacs/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

#include "pacs/error.hpp"

namespace pacs {
namespace {

using nlohmann::json;

std::vector<std::string> surface_of(const TokenSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.surface.size());
  for (const auto& s : seq.surface) out.push_back(normalize_token(s));
  return out;
}

void check_manifest(std::span<const JudgmentRecord> manifest, const EmbeddingStore& store,
                    ScoreMode mode, ScoreVariant variant) {
  std::vector<std::string> missing;
  std::set<std::string> ids;
  for (const auto& r : manifest) {
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate record id " + r.id);
    }
    if (mode == ScoreMode::kImage) {
      if (store.caption(r.candidate) == nullptr) missing.push_back("candidate:" + r.candidate);
      if (store.image(r.media) == nullptr) missing.push_back("media:" + r.media);
    } else {
      if (store.tokens(r.candidate) == nullptr) missing.push_back("candidate:" + r.candidate);
      if (store.frames(r.media) == nullptr) missing.push_back("media:" + r.media);
    }
    if (variant == ScoreVariant::kRef) {
      if (r.refs.empty()) {
        throw Error(ErrorCode::kInsufficientReferences, "record " + r.id + " has no references");
      }
      for (const auto& ref : r.refs) {
        const bool found = mode == ScoreMode::kImage ? store.caption(ref) != nullptr
                                                     : store.tokens(ref) != nullptr;
        if (!found) missing.push_back("ref:" + ref);
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " dangling id(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kDanglingId, msg);
  }
}

json number_or_null(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

IdfTable manifest_idf(std::span<const JudgmentRecord> manifest, const EmbeddingStore& store) {
  std::vector<std::vector<std::string>> corpus;
  std::set<std::string> used;
  for (const auto& r : manifest) {
    for (const auto& ref : r.refs) {
      if (!used.insert(ref).second) continue;
      if (const TokenSequence* seq = store.tokens(ref)) corpus.push_back(surface_of(*seq));
    }
  }
  if (corpus.empty()) {
    for (const auto& r : manifest) {
      if (!used.insert(r.candidate).second) continue;
      if (const TokenSequence* seq = store.tokens(r.candidate)) corpus.push_back(surface_of(*seq));
    }
  }
  if (corpus.empty()) return IdfTable({}, 0);
  return compute_idf(corpus);
}

ScoreReport batch_score(std::span<const JudgmentRecord> manifest, const EmbeddingStore& store,
                        ScoreMode mode, ScoreVariant variant, const ScoreConfig& cfg,
                        const IdfTable* idf) {
  cfg.validate();
  check_manifest(manifest, store, mode, variant);

  IdfTable local_idf;
  if (mode == ScoreMode::kVideo && idf == nullptr) {
    local_idf = manifest_idf(manifest, store);
    idf = &local_idf;
  }

  ScoreReport report;
  report.mode = mode;
  report.variant = variant;
  report.config = cfg;
  report.records.reserve(manifest.size());
  for (const auto& r : manifest) {
    double score = 0.0;
    if (mode == ScoreMode::kImage) {
      const EmbeddingVector& cand = *store.caption(r.candidate);
      const EmbeddingVector& image = *store.image(r.media);
      if (variant == ScoreVariant::kFree) {
        score = pac_score(cand, image, cfg);
      } else {
        std::vector<EmbeddingVector> refs;
        for (const auto& id : r.refs) refs.push_back(*store.caption(id));
        score = ref_pac_score(cand, image, refs, cfg);
      }
    } else {
      const TokenSequence& cand = *store.tokens(r.candidate);
      const auto& frames = *store.frames(r.media);
      if (variant == ScoreVariant::kFree) {
        score = video_score(cand, frames, *idf, cfg);
      } else {
        std::vector<TokenSequence> refs;
        for (const auto& id : r.refs) refs.push_back(*store.tokens(id));
        score = ref_video_score(cand, frames, refs, *idf, cfg);
      }
    }
    report.records.push_back({r.id, score});
  }
  std::sort(report.records.begin(), report.records.end(),
            [](const ScoredRecord& a, const ScoredRecord& b) { return a.id < b.id; });

  if (!report.records.empty()) {
    double sum = 0.0;
    for (const auto& r : report.records) sum += r.score;
    const double mean = sum / static_cast<double>(report.records.size());
    double sq = 0.0;
    for (const auto& r : report.records) sq += (r.score - mean) * (r.score - mean);
    report.mean = mean;
    report.stddev = std::sqrt(sq / static_cast<double>(report.records.size()));
  }
  return report;
}

void write_report(std::ostream& out, const ScoreReport& report) {
  json header = {{"kind", "header"},
                 {"mode", report.mode == ScoreMode::kImage ? "image" : "video"},
                 {"variant", report.variant == ScoreVariant::kFree ? "free" : "ref"},
                 {"w", report.config.w},
                 {"video_w", report.config.video_w},
                 {"seed", report.seed}};
  out << header.dump() << '\n';
  for (const auto& r : report.records) {
    out << json{{"id", r.id}, {"score", r.score}}.dump() << '\n';
  }
  json summary = {{"kind", "summary"},
                  {"count", report.records.size()},
                  {"mean", number_or_null(report.mean)},
                  {"stddev", number_or_null(report.stddev)}};
  out << summary.dump() << '\n';
}

std::map<std::string, double> read_report_scores(std::istream& in) {
  std::map<std::string, double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, "score report line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("kind")) continue;
    if (!j.contains("id") || !j.contains("score") || !j["id"].is_string() ||
        !j["score"].is_number()) {
      throw Error(ErrorCode::kSchema,
                  "score report line " + std::to_string(line_no) + ": expected {id, score}");
    }
    if (!scores.emplace(j["id"].get<std::string>(), j["score"].get<double>()).second) {
      throw Error(ErrorCode::kDuplicateId, "score report: duplicate id " + j["id"].get<std::string>());
    }
  }
  return scores;
}

}  // namespace pacs

namespace pacs {

CaptionScorer make_image_scorer(const EmbeddingStore& store, const ScoreConfig& cfg,
                                bool reference_based) {
  return [&store, cfg, reference_based](std::string_view media, std::string_view candidate,
                                        std::span<const std::string> refs) {
    const EmbeddingVector* cand = store.caption(candidate);
    const EmbeddingVector* image = store.image(media);
    if (cand == nullptr || image == nullptr) {
      throw Error(ErrorCode::kDanglingId, "unknown id: " + std::string(cand ? media : candidate));
    }
    if (!reference_based) return pac_score(*cand, *image, cfg);
    std::vector<EmbeddingVector> ref_embeddings;
    for (const auto& id : refs) {
      const EmbeddingVector* r = store.caption(id);
      if (r == nullptr) throw Error(ErrorCode::kDanglingId, "unknown reference id: " + id);
      ref_embeddings.push_back(*r);
    }
    return ref_pac_score(*cand, *image, ref_embeddings, cfg);
  };
}

}  // namespace pacs
