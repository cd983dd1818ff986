#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sadq {

enum class ErrorKind {
  kStepAfterDone,
  kInvalidAction,
  kShapeMismatch,
  kUnsupportedPrimitive,
  kParseError,
  kEmptyTrace,
  kEmptyBatch,
  kEmptyBuffer,
  kEmptyCandidates,
  kEmptyVector,
  kConfigInvalid,
  kNonFiniteLoss,
  kIoError,
  kVersionMismatch,
  kCorruptChecksum,
  kMissingKey,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace sadq
