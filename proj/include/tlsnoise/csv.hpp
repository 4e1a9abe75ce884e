#pragma once

// Small helpers shared by the CSV readers and writers.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "tlsnoise/errors.hpp"

namespace tlsnoise::csv {

/// Shortest representation that round-trips exactly.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Throws UsageError naming `what` when the field is not a complete number.
inline double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("cannot parse '" + std::string(s) + "' as a number (" + std::string(what) + ")");
  }
  return v;
}

}  // namespace tlsnoise::csv
