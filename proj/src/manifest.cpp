#include "pacs/manifest.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "json.hpp"
#include "pacs/error.hpp"
#include "pacs/rng.hpp"

namespace pacs {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::string_view kind, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kSchema,
              std::string(kind) + " manifest line " + std::to_string(line) + ": " + what);
}

// Calls `fn(object, line_no)` for each non-blank line.
void for_each_record(std::istream& in, std::string_view kind,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      schema_error(kind, line_no, e.what());
    }
    if (!j.is_object()) schema_error(kind, line_no, "expected a JSON object");
    fn(j, line_no);
  }
}

std::string get_id(const json& j, const char* key, std::string_view kind, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(kind, line, std::string("missing field '") + key + "'");
  if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
    schema_error(kind, line, std::string("field '") + key + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

std::vector<std::string> get_refs(const json& j, std::string_view kind, std::size_t line) {
  std::vector<std::string> refs;
  auto it = j.find("refs");
  if (it == j.end()) return refs;
  if (!it->is_array()) schema_error(kind, line, "'refs' must be an array of ids");
  for (const auto& r : *it) {
    if (!r.is_string()) schema_error(kind, line, "'refs' must be an array of ids");
    refs.push_back(r.get<std::string>());
  }
  return refs;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<TupleRecord> parse_tuples(std::istream& in) {
  std::vector<TupleRecord> out;
  for_each_record(in, "tuples", [&](const json& j, std::size_t line) {
    TupleRecord r;
    r.tuple = {get_id(j, "v", "tuples", line), get_id(j, "t", "tuples", line),
               get_id(j, "v_gen", "tuples", line), get_id(j, "t_gen", "tuples", line)};
    if (auto it = j.find("split"); it != j.end()) {
      if (!it->is_string() || (*it != "train" && *it != "val")) {
        schema_error("tuples", line, "'split' must be \"train\" or \"val\"");
      }
      r.split = it->get<std::string>();
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<JudgmentRecord> parse_judgments(std::istream& in) {
  std::vector<JudgmentRecord> out;
  for_each_record(in, "judgments", [&](const json& j, std::size_t line) {
    JudgmentRecord r;
    r.id = get_id(j, "id", "judgments", line);
    r.candidate = get_id(j, "candidate", "judgments", line);
    r.media = get_id(j, "media", "judgments", line);
    if (auto it = j.find("human"); it != j.end() && !it->is_null()) {
      if (!it->is_number()) schema_error("judgments", line, "'human' must be a number");
      r.human = it->get<double>();
      if (!std::isfinite(*r.human)) schema_error("judgments", line, "'human' must be finite");
    }
    r.refs = get_refs(j, "judgments", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<PairwisePair> parse_pairwise(std::istream& in, std::uint64_t seed) {
  std::vector<PairwisePair> out;
  for_each_record(in, "pairwise", [&](const json& j, std::size_t line) {
    PairwisePair p;
    p.media = get_id(j, "media", "pairwise", line);
    p.candidate_a = get_id(j, "a", "pairwise", line);
    p.candidate_b = get_id(j, "b", "pairwise", line);
    if (p.candidate_a == p.candidate_b) schema_error("pairwise", line, "'a' and 'b' must differ");
    if (auto it = j.find("winner"); it != j.end()) {
      if (*it == "A") {
        p.winner = Winner::kA;
      } else if (*it == "B") {
        p.winner = Winner::kB;
      } else {
        schema_error("pairwise", line, "'winner' must be \"A\" or \"B\"");
      }
    } else if (j.contains("votes_a") && j.contains("votes_b")) {
      if (!j["votes_a"].is_number_integer() || !j["votes_b"].is_number_integer()) {
        schema_error("pairwise", line, "vote counts must be integers");
      }
      p.winner = resolve_winner(j["votes_a"].get<int>(), j["votes_b"].get<int>(),
                                substream_seed(seed, "tie-break", line));
    } else {
      schema_error("pairwise", line, "need 'winner' or 'votes_a'/'votes_b'");
    }
    if (auto it = j.find("category"); it != j.end()) {
      if (!it->is_string()) schema_error("pairwise", line, "'category' must be a string");
      p.category = it->get<std::string>();
    }
    p.ref_pool = get_refs(j, "pairwise", line);
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<FoilPair> parse_foil(std::istream& in) {
  std::vector<FoilPair> out;
  for_each_record(in, "foil", [&](const json& j, std::size_t line) {
    FoilPair p{get_id(j, "media", "foil", line), get_id(j, "correct", "foil", line),
               get_id(j, "foil", "foil", line), get_refs(j, "foil", line)};
    if (p.correct == p.foil) schema_error("foil", line, "'correct' and 'foil' must differ");
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<SystemCandidates> parse_systems(std::istream& in) {
  std::vector<SystemCandidates> out;
  std::map<std::string, std::size_t> index;
  for_each_record(in, "systems", [&](const json& j, std::size_t line) {
    const std::string model = get_id(j, "model", "systems", line);
    auto [it, inserted] = index.emplace(model, out.size());
    if (inserted) out.push_back({model, {}});
    auto& captions = out[it->second].captions;
    const std::string media = get_id(j, "media", "systems", line);
    if (!captions.emplace(media, get_id(j, "candidate", "systems", line)).second) {
      schema_error("systems", line, "model " + model + " lists media " + media + " twice");
    }
  });
  return out;
}

std::vector<TupleRecord> read_tuples(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_tuples(in);
}
std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_judgments(in);
}
std::vector<PairwisePair> read_pairwise(const std::filesystem::path& path, std::uint64_t seed) {
  auto in = open(path);
  return parse_pairwise(in, seed);
}
std::vector<FoilPair> read_foil(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_foil(in);
}
std::vector<SystemCandidates> read_systems(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_systems(in);
}

}  // namespace pacs
