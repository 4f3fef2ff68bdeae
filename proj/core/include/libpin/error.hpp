#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace libpin {

enum class ErrorCode {
  malformed_document,
  schema_violation,
  duplicate_name,
  duplicate_id,
  level_unavailable,
  unknown_version,
  code_level_unavailable,
  empty_profile,
  io_failure,
  stale_index,
  infeasible_spec,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace libpin
