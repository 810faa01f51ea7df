#pragma once

// Round-trip-safe text encoding of doubles.

#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "qms/errors.hpp"

namespace qms::cli {

enum class FloatFormat { Decimal, Hex };

inline FloatFormat parse_float_format(std::string_view s) {
  if (s == "decimal") return FloatFormat::Decimal;
  if (s == "hex") return FloatFormat::Hex;
  throw ConfigError("unknown float format '" + std::string(s) + "' (expected decimal or hex)");
}

/// 17 significant digits, or a C99 hex-float literal ("0x1.8p+1").
inline std::string format_double(double v, FloatFormat fmt = FloatFormat::Decimal) {
  char buf[64];
  if (fmt == FloatFormat::Decimal) {
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, r.ptr};
  }
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  std::string s(buf, r.ptr);
  if (s == "inf" || s == "-inf" || s == "nan" || s == "-nan") return s;
  if (s.front() == '-') return "-0x" + s.substr(1);
  return "0x" + s;
}

/// Parses a decimal or hex-float number; the whole token must be consumed.
inline double parse_double(std::string_view token) {
  std::string s(token);
  const auto first = s.find_first_not_of(" \t");
  const auto last = s.find_last_not_of(" \t");
  if (first == std::string::npos) throw ConfigError("expected a number, got an empty value");
  s = s.substr(first, last - first + 1);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ConfigError("invalid number '" + s + "'");
  // Underflow to a subnormal is fine; overflow is not.
  if (errno == ERANGE && std::isinf(v)) throw ConfigError("number out of range '" + s + "'");
  return v;
}

}  // namespace qms::cli
