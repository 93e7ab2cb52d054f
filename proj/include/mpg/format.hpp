#pragma once

#include <charconv>
#include <string>

namespace mpg {

/// Shortest round-trip decimal representation; locale-independent, so
/// serialized artifacts are byte-stable.
inline std::string double_to_string(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mpg
