#include "myhpo/error.hpp"

namespace myhpo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRoleMismatch: return "RoleMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSplitDegenerate: return "SplitDegenerate";
    case ErrorCode::kNonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::kInnerSolveFailed: return "InnerSolveFailed";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kInvalidClassPair: return "InvalidClassPair";
    case ErrorCode::kInfeasibleSplit: return "InfeasibleSplit";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kUnknownSolver: return "UnknownSolver";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Error";
}

}  // namespace myhpo
