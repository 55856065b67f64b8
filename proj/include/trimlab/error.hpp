#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trimlab {

enum class Errc {
  invalid_argument,
  refinement_budget_exceeded,
  expansion_terminated,
  digit_overflow,
  invalid_symbol,
  invalid_interval,
  invalid_cell,
  nonconvergence,
  truncation_tail_overflow,
  negative_value,
  insufficient_orbit,
  degenerate,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace trimlab
