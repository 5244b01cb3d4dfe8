#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace dca::util {

// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Fixed-point with `digits` decimals.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

}  // namespace dca::util
