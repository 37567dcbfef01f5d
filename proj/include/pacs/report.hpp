#pragma once

// Corpus scoring over a manifest and the line-delimited score report format.
//
// Report stream (one JSON object per line):
//   {"kind":"header","mode":"image","variant":"free","w":2.0,"video_w":1.0,"seed":0}
//   {"id":"r1","score":0.71}
//   ...
//   {"kind":"summary","count":2,"mean":0.65,"stddev":0.06}
// Records are ordered by id. mean/stddev are null for an empty report.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacs/evalstats.hpp"
#include "pacs/records.hpp"
#include "pacs/scoring.hpp"
#include "pacs/store.hpp"

namespace pacs {

enum class ScoreMode { kImage, kVideo };
enum class ScoreVariant { kFree, kRef };

struct ScoredRecord {
  std::string id;
  double score = 0.0;
};

struct ScoreReport {
  ScoreMode mode = ScoreMode::kImage;
  ScoreVariant variant = ScoreVariant::kFree;
  ScoreConfig config;
  std::uint64_t seed = 0;
  std::vector<ScoredRecord> records;
  std::optional<double> mean;
  std::optional<double> stddev;  // population standard deviation
};

/// Idf over the reference captions named by the manifest; when the manifest
/// has no references the candidates form the corpus.
IdfTable manifest_idf(std::span<const JudgmentRecord> manifest, const EmbeddingStore& store);

/// Scores every record. All unresolved ids are reported in one kDanglingId
/// error before any scoring happens.
ScoreReport batch_score(std::span<const JudgmentRecord> manifest, const EmbeddingStore& store,
                        ScoreMode mode, ScoreVariant variant, const ScoreConfig& cfg = {},
                        const IdfTable* idf = nullptr);

void write_report(std::ostream& out, const ScoreReport& report);
/// Reads the id -> score records of a report stream.
std::map<std::string, double> read_report_scores(std::istream& in);

}  // namespace pacs

namespace pacs {

/// PAC-S (or RefPAC-S when `reference_based`) over projected image/caption
/// embeddings. Unknown ids raise kDanglingId.
CaptionScorer make_image_scorer(const EmbeddingStore& store, const ScoreConfig& cfg,
                                bool reference_based);

}  // namespace pacs
