#include "pacs/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "pacs/error.hpp"

namespace pacs {
namespace {

constexpr char kMagic[8] = {'P', 'A', 'C', 'S', 'E', 'M', 'B', '\0'};
// Guards against absurd allocations from corrupted length fields.
constexpr std::uint64_t kMaxStringBytes = 1u << 24;

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  // Until payload decoding starts, running out of bytes is a header error.
  void enter_payload() { code_ = ErrorCode::kTruncatedPayload; }

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw Error(code_, code_ == ErrorCode::kTruncatedPayload ? "truncated payload"
                                                               : "truncated header");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > kMaxStringBytes) throw Error(ErrorCode::kCorruptIndex, "string length too large");
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  ErrorCode code_ = ErrorCode::kTruncatedHeader;
};

bool known_role(std::uint32_t r) { return r >= 1 && r <= 5; }

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kVisualFeature: return "visual-feature";
    case Role::kTextFeature: return "text-feature";
    case Role::kTextTokenSequence: return "text-token-sequence";
    case Role::kFrameSequence: return "frame-sequence";
    case Role::kProjectionHeads: return "projection-heads";
  }
  return "unknown";
}

Role parse_role(std::string_view name) {
  for (std::uint32_t r = 1; r <= 5; ++r) {
    if (to_string(static_cast<Role>(r)) == name) return static_cast<Role>(r);
  }
  throw Error(ErrorCode::kUnknownRole, "unknown role: " + std::string(name));
}

void EmbeddingContainer::validate() const {
  if (version != kContainerVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported version " + std::to_string(version));
  }
  if (dtype != DType::kF32) throw Error(ErrorCode::kUnsupportedDtype, "unsupported dtype");
  if (!known_role(static_cast<std::uint32_t>(role))) {
    throw Error(ErrorCode::kUnknownRole, "unknown role");
  }
  if (rows > 0 && cols == 0) throw Error(ErrorCode::kCorruptIndex, "rows present but cols = 0");
  if (payload.size() != rows * cols) {
    throw Error(ErrorCode::kTruncatedPayload, "payload length does not match shape");
  }
  if (!row_labels.empty() && row_labels.size() != rows) {
    throw Error(ErrorCode::kCorruptIndex, "row label count does not match rows");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.id).second) throw Error(ErrorCode::kDuplicateId, "duplicate id: " + e.id);
    if (e.row_offset > rows || e.row_count > rows - e.row_offset) {
      throw Error(ErrorCode::kCorruptIndex, "entry " + e.id + " exceeds row range");
    }
  }
}

const ContainerEntry* EmbeddingContainer::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Eigen::MatrixXd EmbeddingContainer::block(std::string_view id) const {
  const ContainerEntry* e = find(id);
  if (e == nullptr) {
    throw Error(ErrorCode::kDanglingId,
                "id '" + std::string(id) + "' not in " + std::string(to_string(role)) + " container");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(e->row_count), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < e->row_count; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          payload[(e->row_offset + r) * cols + c];
    }
  }
  return out;
}

std::vector<std::string> EmbeddingContainer::labels(std::string_view id) const {
  const ContainerEntry* e = find(id);
  if (e == nullptr) throw Error(ErrorCode::kDanglingId, "id '" + std::string(id) + "' not found");
  if (row_labels.empty()) return {};
  return {row_labels.begin() + static_cast<std::ptrdiff_t>(e->row_offset),
          row_labels.begin() + static_cast<std::ptrdiff_t>(e->row_offset + e->row_count)};
}

void EmbeddingContainer::append(std::string id, const Eigen::Ref<const Eigen::MatrixXd>& rows_data,
                                std::span<const std::string> labels) {
  if (rows == 0 && entries.empty() && cols == 0) cols = static_cast<std::uint64_t>(rows_data.cols());
  if (static_cast<std::uint64_t>(rows_data.cols()) != cols) {
    throw Error(ErrorCode::kDimensionMismatch, "append: column count mismatch");
  }
  if (find(id) != nullptr) throw Error(ErrorCode::kDuplicateId, "duplicate id: " + id);
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(rows_data.rows())) {
    throw Error(ErrorCode::kDimensionMismatch, "append: label count mismatch");
  }
  const bool labelled = !row_labels.empty() || (!labels.empty() && rows == 0);
  if (labelled && labels.empty() && rows_data.rows() > 0) {
    throw Error(ErrorCode::kInvalidArgument, "append: container requires row labels");
  }
  if (!labelled && !labels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "append: container has no row labels");
  }
  entries.push_back({std::move(id), rows, static_cast<std::uint64_t>(rows_data.rows())});
  for (Eigen::Index r = 0; r < rows_data.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows_data.cols(); ++c) {
      payload.push_back(static_cast<float>(rows_data(r, c)));
    }
  }
  row_labels.insert(row_labels.end(), labels.begin(), labels.end());
  rows += static_cast<std::uint64_t>(rows_data.rows());
}

std::vector<std::uint8_t> encode_container(const EmbeddingContainer& c) {
  c.validate();
  Writer w;
  w.reserve(64 + c.payload.size() * 4);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(c.version);
  w.u32(static_cast<std::uint32_t>(c.dtype));
  w.u32(static_cast<std::uint32_t>(c.role));
  w.u32(c.row_labels.empty() ? 0u : kFlagRowLabels);
  w.u32(2);
  w.u64(c.rows);
  w.u64(c.cols);
  w.u64(c.entries.size());
  w.str(c.metadata);
  for (const auto& e : c.entries) {
    w.str(e.id);
    w.u64(e.row_offset);
    w.u64(e.row_count);
  }
  for (const auto& label : c.row_labels) w.str(label);
  for (float f : c.payload) w.u32(std::bit_cast<std::uint32_t>(f));
  return w.take();
}

EmbeddingContainer decode_container(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic");
  }
  EmbeddingContainer c;
  c.version = r.u32();
  if (c.version != kContainerVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported version " + std::to_string(c.version));
  }
  const std::uint32_t dtype = r.u32();
  if (dtype != static_cast<std::uint32_t>(DType::kF32)) {
    throw Error(ErrorCode::kUnsupportedDtype, "unsupported dtype code " + std::to_string(dtype));
  }
  const std::uint32_t role = r.u32();
  if (!known_role(role)) throw Error(ErrorCode::kUnknownRole, "unknown role " + std::to_string(role));
  c.role = static_cast<Role>(role);
  const std::uint32_t flags = r.u32();
  if ((flags & ~kFlagRowLabels) != 0) throw Error(ErrorCode::kBadFlags, "unknown flag bits");
  if (r.u32() != 2) throw Error(ErrorCode::kCorruptIndex, "ndim must be 2");
  c.rows = r.u64();
  c.cols = r.u64();
  if (c.rows > 0 && c.cols == 0) throw Error(ErrorCode::kCorruptIndex, "rows present but cols = 0");
  if (c.cols != 0 && c.rows > (std::uint64_t{1} << 40) / c.cols) {
    throw Error(ErrorCode::kCorruptIndex, "shape too large");
  }
  const std::uint64_t n_entries = r.u64();
  c.metadata = r.str();
  // Each entry needs at least 20 bytes; reject counts the input cannot hold.
  if (n_entries > r.remaining() / 20) throw Error(ErrorCode::kTruncatedHeader, "truncated header");
  c.entries.reserve(n_entries);
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < n_entries; ++i) {
    ContainerEntry e;
    e.id = r.str();
    e.row_offset = r.u64();
    e.row_count = r.u64();
    if (!seen.insert(e.id).second) throw Error(ErrorCode::kDuplicateId, "duplicate id: " + e.id);
    if (e.row_offset > c.rows || e.row_count > c.rows - e.row_offset) {
      throw Error(ErrorCode::kCorruptIndex, "entry " + e.id + " exceeds row range");
    }
    c.entries.push_back(std::move(e));
  }
  if (flags & kFlagRowLabels) {
    if (c.rows > r.remaining() / 4) throw Error(ErrorCode::kTruncatedHeader, "truncated header");
    c.row_labels.reserve(c.rows);
    for (std::uint64_t i = 0; i < c.rows; ++i) c.row_labels.push_back(r.str());
  }
  r.enter_payload();
  const std::uint64_t n = c.rows * c.cols;
  const auto raw = r.take(n * 4);
  c.payload.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[i * 4 + b]) << (8 * b);
    c.payload[i] = std::bit_cast<float>(bits);
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kTrailingBytes, "trailing bytes after payload");
  return c;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EmbeddingContainer read_container(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_container(bytes);
}

void write_container(const EmbeddingContainer& container, const std::filesystem::path& path) {
  const auto bytes = encode_container(container);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace pacs
