#pragma once

#include <stdexcept>
#include <string>

namespace subkit {

/// Error categories used across the library. Operations that return
/// verdicts (e.g. subnormality tests) report failures as values instead.
enum class errc {
  budget_exceeded,
  malformed_permutation,
  ambient_mismatch,
  not_subnormal,
  not_in_product,
  not_normalizing,
  precondition_violation,
  sides_disagree,
  invalid_delta,
  parse_error,
  io_error,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace subkit
