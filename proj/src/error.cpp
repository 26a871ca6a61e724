#include "topogap/error.hpp"

namespace topogap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::AllNodesConstant: return "AllNodesConstant";
    case ErrorKind::SizeTooLarge: return "SizeTooLarge";
    case ErrorKind::LabelAbsent: return "LabelAbsent";
    case ErrorKind::ZeroVarianceRow: return "ZeroVarianceRow";
    case ErrorKind::TooFewInputs: return "TooFewInputs";
    case ErrorKind::AlreadyCorrected: return "AlreadyCorrected";
    case ErrorKind::InconsistentScores: return "InconsistentScores";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TooManyVertices: return "TooManyVertices";
    case ErrorKind::EmptyDiagram: return "EmptyDiagram";
    case ErrorKind::ZeroTotalLife: return "ZeroTotalLife";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVarianceTarget: return "ZeroVarianceTarget";
    case ErrorKind::TooFewModels: return "TooFewModels";
    case ErrorKind::FoldMismatch: return "FoldMismatch";
    case ErrorKind::MissingGapLabel: return "MissingGapLabel";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace topogap
