#pragma once

#include <stdexcept>
#include <string>

namespace soniclog {

// Error categories. The C API maps these to sonic_status codes and the CLI
// maps them onto its exit-code contract (2 config/schema, 3 data, 4 internal).
enum class ErrorCode {
  InvalidArgument = 1,
  Schema = 2,
  Parse = 3,
  EmptyInput = 4,
  InvalidInput = 5,
  ModelFormat = 6,
  Unsupported = 7,
  Io = 8,
  Internal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::ModelFormat: return "model-format";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace soniclog
