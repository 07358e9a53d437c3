#include "histmle/error.hpp"

#include <utility>

namespace histmle {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::CollapsedComponent: return "CollapsedComponent";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::InvalidPivot: return "InvalidPivot";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : Error(code, detail, std::string(to_string(code)) + ": " + detail) {}

Error::Error(ErrorCode code, std::string detail, const std::string& message)
    : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), cause.detail(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

}  // namespace histmle
