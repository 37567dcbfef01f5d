#include "pacs/store.hpp"

#include <algorithm>

#include "pacs/error.hpp"

namespace pacs {
namespace {

void require_role(const EmbeddingContainer& c, Role role) {
  if (c.role != role) {
    throw Error(ErrorCode::kSchema, "expected a " + std::string(to_string(role)) +
                                        " container, got " + std::string(to_string(c.role)));
  }
}

std::vector<EmbeddingVector> unit_rows(const Eigen::MatrixXd& rows) {
  std::vector<EmbeddingVector> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.push_back(EmbeddingVector::from_unit(rows.row(i).transpose()));
  }
  return out;
}

}  // namespace

FeatureTable FeatureTable::from_container(const EmbeddingContainer& container) {
  if (container.role != Role::kVisualFeature && container.role != Role::kTextFeature) {
    throw Error(ErrorCode::kSchema, "feature table needs a visual-feature or text-feature container");
  }
  FeatureTable table(static_cast<Eigen::Index>(container.cols));
  for (const auto& e : container.entries) {
    if (e.row_count != 1) {
      throw Error(ErrorCode::kSchema, "feature entry " + e.id + " must span exactly one row");
    }
    table.add(e.id, container.block(e.id).row(0));
  }
  return table;
}

void FeatureTable::add(std::string id, const Eigen::Ref<const Eigen::RowVectorXd>& features) {
  if (dim_ == 0) dim_ = features.size();
  if (features.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "feature " + id + " has the wrong dim");
  }
  if (!features.allFinite()) throw Error(ErrorCode::kNonFinite, "feature " + id + " is not finite");
  if (index_.contains(id)) throw Error(ErrorCode::kDuplicateId, "duplicate feature id " + id);
  index_.emplace(std::move(id), static_cast<Eigen::Index>(rows_.size()));
  rows_.emplace_back(features);
}

bool FeatureTable::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

Eigen::RowVectorXd FeatureTable::row(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorCode::kDanglingId, "unknown feature id " + std::string(id));
  return rows_[static_cast<std::size_t>(it->second)];
}

Eigen::MatrixXd FeatureTable::gather(std::span<const std::string* const> ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), dim_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = index_.find(*ids[i]);
    if (it == index_.end()) throw Error(ErrorCode::kDanglingId, "unknown feature id " + *ids[i]);
    out.row(static_cast<Eigen::Index>(i)) = rows_[static_cast<std::size_t>(it->second)];
  }
  return out;
}

void FeatureStore::check(std::span<const AugmentedTuple> tuples) const {
  std::vector<std::string> missing;
  auto need = [&](const FeatureTable& table, const std::string& id, std::string_view what) {
    if (!table.contains(id)) missing.push_back(std::string(what) + ":" + id);
  };
  for (const auto& t : tuples) {
    need(visual, t.v, "v");
    need(text, t.t, "t");
    need(visual, t.v_gen, "v_gen");
    need(text, t.t_gen, "t_gen");
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " dangling id(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kDanglingId, msg);
  }
}

PacBatch FeatureStore::gather(std::span<const AugmentedTuple> tuples) const {
  std::vector<const std::string*> v, t, vg, tg;
  v.reserve(tuples.size());
  t.reserve(tuples.size());
  vg.reserve(tuples.size());
  tg.reserve(tuples.size());
  for (const auto& tup : tuples) {
    v.push_back(&tup.v);
    t.push_back(&tup.t);
    vg.push_back(&tup.v_gen);
    tg.push_back(&tup.t_gen);
  }
  return PacBatch{visual.gather(v), text.gather(t), visual.gather(vg), text.gather(tg)};
}

void EmbeddingStore::add_caption(std::string id, EmbeddingVector e) {
  captions_.insert_or_assign(std::move(id), std::move(e));
}
void EmbeddingStore::add_image(std::string id, EmbeddingVector e) {
  images_.insert_or_assign(std::move(id), std::move(e));
}
void EmbeddingStore::add_tokens(std::string id, TokenSequence seq) {
  seq.validate();
  tokens_.insert_or_assign(std::move(id), std::move(seq));
}
void EmbeddingStore::add_frames(std::string id, std::vector<EmbeddingVector> frames) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "frame sequence " + id + " is empty");
  frames_.insert_or_assign(std::move(id), std::move(frames));
}

const EmbeddingVector* EmbeddingStore::caption(std::string_view id) const {
  auto it = captions_.find(std::string(id));
  return it == captions_.end() ? nullptr : &it->second;
}
const EmbeddingVector* EmbeddingStore::image(std::string_view id) const {
  auto it = images_.find(std::string(id));
  return it == images_.end() ? nullptr : &it->second;
}
const TokenSequence* EmbeddingStore::tokens(std::string_view id) const {
  auto it = tokens_.find(std::string(id));
  return it == tokens_.end() ? nullptr : &it->second;
}
const std::vector<EmbeddingVector>* EmbeddingStore::frames(std::string_view id) const {
  auto it = frames_.find(std::string(id));
  return it == frames_.end() ? nullptr : &it->second;
}

EmbeddingStore EmbeddingStore::project(const Heads& heads, const EmbeddingContainer* visual,
                                       const EmbeddingContainer* text,
                                       const EmbeddingContainer* tokens,
                                       const EmbeddingContainer* frames) {
  EmbeddingStore store;
  if (visual != nullptr) {
    require_role(*visual, Role::kVisualFeature);
    for (const auto& e : visual->entries) {
      const Eigen::MatrixXd z = project_rows(visual->block(e.id), heads.visual);
      store.add_image(e.id, EmbeddingVector::from_unit(z.row(0).transpose()));
    }
  }
  if (text != nullptr) {
    require_role(*text, Role::kTextFeature);
    for (const auto& e : text->entries) {
      const Eigen::MatrixXd z = project_rows(text->block(e.id), heads.textual);
      store.add_caption(e.id, EmbeddingVector::from_unit(z.row(0).transpose()));
    }
  }
  if (tokens != nullptr) {
    require_role(*tokens, Role::kTextTokenSequence);
    for (const auto& e : tokens->entries) {
      const EmbeddingVector* global = store.caption(e.id);
      if (global == nullptr) {
        throw Error(ErrorCode::kDanglingId,
                    "token sequence " + e.id + " has no global text-feature entry");
      }
      store.add_tokens(e.id, TokenSequence{tokens->labels(e.id),
                                           unit_rows(project_rows(tokens->block(e.id), heads.textual)),
                                           *global});
    }
  }
  if (frames != nullptr) {
    require_role(*frames, Role::kFrameSequence);
    for (const auto& e : frames->entries) {
      store.add_frames(e.id, unit_rows(project_rows(frames->block(e.id), heads.visual)));
    }
  }
  return store;
}

}  // namespace pacs
