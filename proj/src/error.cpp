#include "specfilter/core/error.hpp"

namespace specfilter {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_argument: return "invalid_argument";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::rank_deficient: return "rank_deficient";
    case errc::zero_observed_eigenvalue: return "zero_observed_eigenvalue";
    case errc::degenerate_signal: return "degenerate_signal";
    case errc::certificate_violated: return "certificate_violated";
    case errc::unknown_family: return "unknown_family";
    case errc::unknown_estimator: return "unknown_estimator";
    case errc::parse_error: return "parse_error";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace specfilter
