#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pacs {

/// Ids of a real image, its real caption, the image generated from that
/// caption and the caption generated from that image.
struct AugmentedTuple {
  std::string v;
  std::string t;
  std::string v_gen;
  std::string t_gen;

  bool operator==(const AugmentedTuple&) const = default;
};

/// One candidate caption for one media item, with optional human rating and
/// reference caption ids.
struct JudgmentRecord {
  std::string id;
  std::string candidate;
  std::string media;
  std::optional<double> human;
  std::vector<std::string> refs;
};

}  // namespace pacs
