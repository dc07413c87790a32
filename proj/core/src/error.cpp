#include "chemclip/error.hpp"

namespace chemclip {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnbalancedParenthesis: return "UnbalancedParenthesis";
    case ErrorCode::kUnclosedRingBond: return "UnclosedRingBond";
    case ErrorCode::kUnknownElement: return "UnknownElement";
    case ErrorCode::kDanglingBondSymbol: return "DanglingBondSymbol";
    case ErrorCode::kInvalidSmiles: return "InvalidSmiles";
    case ErrorCode::kUnknownMetal: return "UnknownMetal";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kMissingInput: return "MissingInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kUndefined: return "Undefined";
    case ErrorCode::kPerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace chemclip
