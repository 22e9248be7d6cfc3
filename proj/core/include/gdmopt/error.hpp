#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdmopt {

enum class ErrorCode {
  kDimensionMismatch,
  kStaleTape,
  kNonFinite,
  kInvalidArgument,
  kOutOfRange,
  kEmptyBatch,
  kIntegrity,
  kSchemaVersion,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. Callers switch on code() when they
// need to tell failure classes apart (the CLI maps them to exit statuses).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the error-class prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gdmopt
