#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace stx::detail {

// Shortest round-trip text for a double; "NA" for NaN.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Fixed-precision text for drawing coordinates.
inline std::string fmt_fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

}  // namespace stx::detail
