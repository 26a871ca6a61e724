#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topogap {

enum class ErrorKind {
  MalformedFile,
  NonFiniteEntry,
  AllNodesConstant,
  SizeTooLarge,
  LabelAbsent,
  ZeroVarianceRow,
  TooFewInputs,
  AlreadyCorrected,
  InconsistentScores,
  IndexOutOfRange,
  TooManyVertices,
  EmptyDiagram,
  ZeroTotalLife,
  InvalidArgument,
  LengthMismatch,
  DimensionMismatch,
  ZeroVarianceTarget,
  TooFewModels,
  FoldMismatch,
  MissingGapLabel,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace topogap
