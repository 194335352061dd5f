#pragma once

#include <stdexcept>
#include <string>

namespace specfilter {

enum class errc {
  invalid_argument = 1,
  dimension_mismatch,
  rank_deficient,
  zero_observed_eigenvalue,
  degenerate_signal,
  certificate_violated,
  unknown_family,
  unknown_estimator,
  parse_error,
  io_error,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace specfilter
