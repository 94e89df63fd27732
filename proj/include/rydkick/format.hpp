#ifndef RYDKICK_FORMAT_HPP
#define RYDKICK_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace rydkick {

/// Locale-independent shortest-form rendering with 12 significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace rydkick

#endif  // RYDKICK_FORMAT_HPP
