#pragma once

#include <string>

#include <fmt/format.h>

namespace swingcal {

/// Significant digits used for every number written to an output file.
inline constexpr int kOutputDigits = 10;

inline std::string format_number(double value) {
  return fmt::format("{:.{}g}", value, kOutputDigits);
}

/// `value` rounded to kOutputDigits significant digits.
inline double round_output(double value) { return std::stod(format_number(value)); }

}  // namespace swingcal
