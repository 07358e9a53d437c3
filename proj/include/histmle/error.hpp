#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace histmle {

enum class ErrorCode {
  MalformedHeader,
  UnsupportedMaxval,
  TruncatedPayload,
  OutOfRange,
  EmptyInput,
  TooFewSamples,
  CollapsedComponent,
  DegenerateVariance,
  EmptyClass,
  DegenerateHistogram,
  InvalidPivot,
  OrderViolation,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is an Error. The message carries the code name as a
// prefix so stderr output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 protected:
  Error(ErrorCode code, std::string detail, const std::string& message);

 private:
  ErrorCode code_;
  std::string detail_;
};

// An Error raised inside a named pipeline stage ("estimation", "shift", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace histmle
