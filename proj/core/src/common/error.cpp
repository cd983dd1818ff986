#include "sadq/common/error.hpp"

namespace sadq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStepAfterDone: return "StepAfterDone";
    case ErrorKind::kInvalidAction: return "InvalidAction";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kUnsupportedPrimitive: return "UnsupportedPrimitive";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kEmptyTrace: return "EmptyTrace";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kEmptyBuffer: return "EmptyBuffer";
    case ErrorKind::kEmptyCandidates: return "EmptyCandidates";
    case ErrorKind::kEmptyVector: return "EmptyVector";
    case ErrorKind::kConfigInvalid: return "ConfigInvalid";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kVersionMismatch: return "VersionMismatch";
    case ErrorKind::kCorruptChecksum: return "CorruptChecksum";
    case ErrorKind::kMissingKey: return "MissingKey";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sadq
