#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace imgstat {

// Shortest round-trip decimal form; "nan" for non-finite values.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace imgstat
