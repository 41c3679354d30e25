#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace factgpt {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// First 8 digest bytes of SHA-256, big-endian. Stable across platforms.
std::uint64_t stable_hash64(std::string_view data);

// FNV-1a, used for feature hashing where a cryptographic digest is overkill.
constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace factgpt
