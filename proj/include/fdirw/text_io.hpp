#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>

#include "fdirw/common.hpp"

namespace fdirw::text {

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw FormatError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what, int base = 10) {
  Int v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw FormatError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  std::string s(buf, end);
  return std::string(16 - s.size(), '0') + s;
}

/// Reads one header line, strips the trailing newline.
inline std::string read_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("unexpected end of file while reading " + std::string(what));
  }
  return line;
}

/// Splits "key rest" at the first space and checks the key.
inline std::string_view expect_key(std::string_view line, std::string_view key) {
  const auto sp = line.find(' ');
  if (line.substr(0, sp) != key) {
    throw FormatError("expected header key '" + std::string(key) + "', got '" +
                      std::string(line) + "'");
  }
  return sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
}

}  // namespace fdirw::text
