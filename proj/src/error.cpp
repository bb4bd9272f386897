#include "ldfm/error.hpp"

namespace ldfm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::ZeroInput: return "ZeroInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewInstances: return "TooFewInstances";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonBinaryInput: return "NonBinaryInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownLabelName: return "UnknownLabelName";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::EmptyLabelSet: return "EmptyLabelSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare:
    case ErrorCode::NotSymmetric:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::SingularPencil:
    case ErrorCode::SingularSystem:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::TooLarge:
    case ErrorCode::DegenerateData:
    case ErrorCode::ZeroInput:
      return ErrorCategory::Numerical;
    case ErrorCode::OutOfRange:
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace ldfm
