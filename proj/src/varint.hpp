#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pathmark/error.hpp"

namespace pathmark::detail {

inline void put_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

inline std::uint64_t get_varint(std::string_view in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) throw ParseError("truncated varint", pos);
    auto byte = static_cast<unsigned char>(in[pos++]);
    v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
    if ((byte & 0x80) == 0) return v;
  }
  throw ParseError("varint too long", pos);
}

inline void put_bytes(std::string& out, std::string_view s) {
  put_varint(out, s.size());
  out.append(s);
}

inline std::string_view get_bytes(std::string_view in, std::size_t& pos) {
  auto n = get_varint(in, pos);
  if (n > in.size() - pos) throw ParseError("truncated string", pos);
  auto s = in.substr(pos, n);
  pos += n;
  return s;
}

}  // namespace pathmark::detail
