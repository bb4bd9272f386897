#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ldfm {

enum class ErrorCode {
  // numerical
  NotSquare,
  NotSymmetric,
  ConvergenceFailure,
  SingularPencil,
  SingularSystem,
  NotPositiveDefinite,
  TooLarge,
  DegenerateData,
  ZeroInput,
  // shape / argument
  DimensionMismatch,
  ShapeMismatch,
  OutOfRange,
  InvalidArgument,
  TooFewInstances,
  TooFewSamples,
  NonBinaryInput,
  // data
  IoError,
  SyntaxError,
  UnknownLabelName,
  MissingValue,
  NonBinaryLabel,
  MalformedXml,
  EmptyLabelSet,
  SchemaMismatch,
};

enum class ErrorCategory { Numerical, Usage, Data };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ldfm
