#include "tempsamp/error.hpp"

namespace tempsamp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOrderViolation: return "OrderViolation";
    case ErrorCode::kNegativeTime: return "NegativeTime";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kClipLenMismatch: return "ClipLenMismatch";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kNoOffPolicyEntry: return "NoOffPolicyEntry";
    case ErrorCode::kTooFewOnPolicy: return "TooFewOnPolicy";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kUnrankedPredictions: return "UnrankedPredictions";
  }
  return "Unknown";
}

}  // namespace tempsamp
