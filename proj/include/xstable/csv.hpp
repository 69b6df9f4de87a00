#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace xstable {

// Shortest-faithful decimal rendering used by every CSV surface: 17
// significant digits round-trip any double bit-exactly, so files are
// byte-stable across runs and platforms with the same arithmetic.
inline std::string format_real(double v) {
  if (v == 0.0) return "0";  // normalise the sign of zero away
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_bool(bool v) { return v ? "true" : "false"; }

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

}  // namespace xstable
