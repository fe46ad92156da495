#pragma once

#include <stdexcept>
#include <string>

namespace lfp {

enum class ErrorCode {
  invalid_argument,
  config,
  io,
  size_limit,
  domain,
  dimension_mismatch,
  singular,
  rank_deficient,
  step_size,
  divergence,
  tolerance,
  missing_field,
  invalid_spec,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the C API maps it to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace lfp
