#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projlab {

enum class ErrorCode {
  InvalidArgument,
  InvalidImage,
  SingularHomography,
  OutOfBounds,
  MalformedHeader,
  TruncatedData,
  UnknownObject,
  PatchTooLarge,
  DimensionMismatch,
  ImageSmallerThanTemplate,
  DegenerateDataset,
  CleanZero,
  UntrainedModel,
  Config,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ImageSmallerThanTemplate: return "ImageSmallerThanTemplate";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::CleanZero: return "CleanZero";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace projlab
