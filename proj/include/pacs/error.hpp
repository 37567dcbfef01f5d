#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pacs {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kDegenerate,
  kEmptyInput,
  kNonFinite,
  kDanglingId,
  kInsufficientReferences,
  kSchema,
  kIo,
  // Container decoding. Each corruption class gets its own code.
  kBadMagic,
  kUnsupportedVersion,
  kUnsupportedDtype,
  kUnknownRole,
  kBadFlags,
  kTruncatedHeader,
  kTruncatedPayload,
  kDuplicateId,
  kCorruptIndex,
  kTrailingBytes,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pacs
