#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace loom {

// FNV-1a over the raw bytes. Used for stable content addressing (prompt
// hashes, per-task seed derivation, run digests); not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string hex_digest(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace loom
