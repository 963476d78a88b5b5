#include "mvprag/error.hpp"

namespace mvprag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::UnknownCategory: return "unknown-category";
    case ErrorCode::UnknownAttribute: return "unknown-attribute";
    case ErrorCode::UnknownPartition: return "unknown-partition";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::MalformedResponse: return "malformed-response";
    case ErrorCode::EmptyChoices: return "empty-choices";
    case ErrorCode::OverLengthPrompt: return "over-length-prompt";
    case ErrorCode::SchemaMismatch: return "schema-mismatch";
    case ErrorCode::MalformedSection: return "malformed-section";
    case ErrorCode::NoLabels: return "no-labels";
    case ErrorCode::NoEligibleAttribute: return "no-eligible-attribute";
    case ErrorCode::NoInstances: return "no-instances";
    case ErrorCode::NoNonEmptyGroundTruth: return "no-nonempty-ground-truth";
    case ErrorCode::UniverseMismatch: return "universe-mismatch";
    case ErrorCode::Stage: return "stage";
  }
  return "unknown";
}

}  // namespace mvprag
