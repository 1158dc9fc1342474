#include "synthkit/error.hpp"

#include <exception>

namespace synthkit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Fit: return "fit error";
    case ErrorCode::Config: return "config error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, context + ": " + e.what());
  }
}

}  // namespace synthkit
