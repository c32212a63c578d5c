#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cgpa {

/// Machine-readable failure kinds shared by the library, the CLI and the service.
enum class ErrorCode {
  MissingColumn,
  UnknownColumn,
  ValueOutOfDomain,
  EmptyCell,
  UnknownLevel,
  CyclicSpec,
  DegenerateSplit,
  ContinuousFactor,
  SingularCovariance,
  TooFewSamples,
  SingularRegression,
  IcaNonConvergence,
  NodeMismatch,
  SingularSystem,
  NonConvergence,
  EmptyData,
  SingleClass,
  DimensionMismatch,
  OutOfRange,
  LengthMismatch,
  TooFewRows,
  TooManyFeatures,
  DegenerateNeighborhood,
  DuplicateEmail,
  BadCredentials,
  TokenExpired,
  TokenInvalid,
  ValidationFailed,
  ModelUnavailable,
  NotFound,
  Forbidden,
  BadRating,
  InsufficientData,
  ArtifactCorrupt,
  InvalidArgument,
  Io,
  Parse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::ValueOutOfDomain: return "ValueOutOfDomain";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::CyclicSpec: return "CyclicSpec";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::ContinuousFactor: return "ContinuousFactor";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SingularRegression: return "SingularRegression";
    case ErrorCode::IcaNonConvergence: return "IcaNonConvergence";
    case ErrorCode::NodeMismatch: return "NodeMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::DuplicateEmail: return "DuplicateEmail";
    case ErrorCode::BadCredentials: return "BadCredentials";
    case ErrorCode::TokenExpired: return "TokenExpired";
    case ErrorCode::TokenInvalid: return "TokenInvalid";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::ModelUnavailable: return "ModelUnavailable";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::BadRating: return "BadRating";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ArtifactCorrupt: return "ArtifactCorrupt";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Base exception. `row` is 1-based over data rows (header excluded) when set;
/// `fields` names offending schema fields (validation errors).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Error(ErrorCode code, std::string message, std::optional<std::size_t> row,
        std::vector<std::string> fields)
      : std::runtime_error(std::move(message)),
        code_(code),
        row_(row),
        fields_(std::move(fields)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& row() const noexcept { return row_; }
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::vector<std::string> fields_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace cgpa
