#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace iwfa::detail {

// Shortest round-trip decimal representation; locale-independent.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace iwfa::detail
