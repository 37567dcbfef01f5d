#pragma once

// Binary embedding container. Layout (all integers little-endian):
//
//   offset  size  field
//   0       8     magic "PACSEMB\0"
//   8       4     u32 format version (1)
//   12      4     u32 dtype code (1 = f32)
//   16      4     u32 role (see Role)
//   20      4     u32 flags (bit 0: per-row labels present; other bits 0)
//   24      4     u32 ndim (always 2)
//   28      8     u64 rows
//   36      8     u64 cols
//   44      8     u64 entry count
//   52      4     u32 metadata length, followed by that many UTF-8 bytes
//   ...           entries: u32 id length, id bytes, u64 row offset, u64 row count
//   ...           if flags bit 0: rows x (u32 length, label bytes)
//   ...           payload: rows * cols IEEE-754 f32, row-major
//
// Feature containers hold one row per id; sequence containers (tokens,
// frames) hold a contiguous row range per id. Head checkpoints use role
// kProjectionHeads with entries "visual" and "textual" and a JSON metadata
// document.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pacs {

enum class Role : std::uint32_t {
  kVisualFeature = 1,
  kTextFeature = 2,
  kTextTokenSequence = 3,
  kFrameSequence = 4,
  kProjectionHeads = 5,
};

enum class DType : std::uint32_t { kF32 = 1 };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kFlagRowLabels = 1u;

struct ContainerEntry {
  std::string id;
  std::uint64_t row_offset = 0;
  std::uint64_t row_count = 0;

  bool operator==(const ContainerEntry&) const = default;
};

struct EmbeddingContainer {
  std::uint32_t version = kContainerVersion;
  DType dtype = DType::kF32;
  Role role = Role::kVisualFeature;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<ContainerEntry> entries;
  std::vector<std::string> row_labels;  // empty, or one per row
  std::string metadata;
  std::vector<float> payload;  // rows * cols

  /// Checks index consistency; throws the matching container ErrorCode.
  void validate() const;

  const ContainerEntry* find(std::string_view id) const;
  /// Rows of one entry, widened to double. Throws kDanglingId.
  Eigen::MatrixXd block(std::string_view id) const;
  /// Row labels of one entry (empty when the container carries none).
  std::vector<std::string> labels(std::string_view id) const;

  /// Appends one entry with the given rows (and optional per-row labels).
  void append(std::string id, const Eigen::Ref<const Eigen::MatrixXd>& rows_data,
              std::span<const std::string> labels = {});

  bool operator==(const EmbeddingContainer&) const = default;
};

std::vector<std::uint8_t> encode_container(const EmbeddingContainer& container);
EmbeddingContainer decode_container(std::span<const std::uint8_t> bytes);

EmbeddingContainer read_container(const std::filesystem::path& path);
void write_container(const EmbeddingContainer& container, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace pacs
