#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvprag {

enum class ErrorCode {
  Config,
  Io,
  Parse,
  Validation,
  UnknownCategory,
  UnknownAttribute,
  UnknownPartition,
  DimensionMismatch,
  Transport,
  MalformedResponse,
  EmptyChoices,
  OverLengthPrompt,
  SchemaMismatch,
  MalformedSection,
  NoLabels,
  NoEligibleAttribute,
  NoInstances,
  NoNonEmptyGroundTruth,
  UniverseMismatch,
  Stage,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mvprag
