#pragma once

#include <stdexcept>
#include <string>

namespace synthkit {

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  Parse,
  Schema,
  Fit,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this exception; the C API maps
// the code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Re-throws the in-flight exception with `context` prepended, keeping the code.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace synthkit
