#include "kc/numcore/error.hpp"

namespace kc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::InvalidArity: return "InvalidArity";
    case ErrorCode::EmptyH1: return "EmptyH1";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace kc
