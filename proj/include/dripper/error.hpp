#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dripper {

enum class ErrorCode {
  EncodingUndecodable,
  EmptyDocument,
  InvalidState,
  InvalidArgument,
  InvalidConfig,
  OversizeInput,
  LabelMismatch,
  RemoteUnavailable,
  MalformedReply,
  FallbackFailed,
  UnreadableFile,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EncodingUndecodable: return "EncodingUndecodable";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OversizeInput: return "OversizeInput";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::MalformedReply: return "MalformedReply";
    case ErrorCode::FallbackFailed: return "FallbackFailed";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the evaluation harness) can map it to an exit status or a
/// zero score without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dripper
