#pragma once

// Line-delimited JSON manifests. One object per line; blank lines are
// skipped. Schemas:
//
//   tuples    {"v": id, "t": id, "v_gen": id, "t_gen": id, "split"?: "train"|"val"}
//   judgments {"id": id, "candidate": id, "media": id, "human"?: number, "refs"?: [id]}
//   pairwise  {"media": id, "a": id, "b": id, "winner": "A"|"B"  (or "votes_a"/"votes_b"),
//              "category"?: string, "refs"?: [id]}
//   foil      {"media": id, "correct": id, "foil": id, "refs"?: [id]}
//   systems   {"model": name, "media": id, "candidate": id}

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pacs/evalstats.hpp"
#include "pacs/records.hpp"

namespace pacs {

struct TupleRecord {
  AugmentedTuple tuple;
  std::optional<std::string> split;
};

std::vector<TupleRecord> parse_tuples(std::istream& in);
std::vector<JudgmentRecord> parse_judgments(std::istream& in);
/// Winners given as vote counts are resolved here; exact ties use the
/// "tie-break" substream of `seed`, indexed by line.
std::vector<PairwisePair> parse_pairwise(std::istream& in, std::uint64_t seed);
std::vector<FoilPair> parse_foil(std::istream& in);
std::vector<SystemCandidates> parse_systems(std::istream& in);

std::vector<TupleRecord> read_tuples(const std::filesystem::path& path);
std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path);
std::vector<PairwisePair> read_pairwise(const std::filesystem::path& path, std::uint64_t seed);
std::vector<FoilPair> read_foil(const std::filesystem::path& path);
std::vector<SystemCandidates> read_systems(const std::filesystem::path& path);

}  // namespace pacs
