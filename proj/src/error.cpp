#include "trimlab/error.hpp"

namespace trimlab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::refinement_budget_exceeded: return "refinement-budget-exceeded";
    case Errc::expansion_terminated: return "expansion-terminated";
    case Errc::digit_overflow: return "digit-overflow";
    case Errc::invalid_symbol: return "invalid-symbol";
    case Errc::invalid_interval: return "invalid-interval";
    case Errc::invalid_cell: return "invalid-cell";
    case Errc::nonconvergence: return "nonconvergence";
    case Errc::truncation_tail_overflow: return "truncation-tail-overflow";
    case Errc::negative_value: return "negative-value";
    case Errc::insufficient_orbit: return "insufficient-orbit";
    case Errc::degenerate: return "degenerate";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace trimlab
