#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ea {

/// 64-bit FNV-1a. Stable across platforms, used for seed derivation and artifact hashes.
constexpr std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_bytes(std::span<const std::byte> bytes,
                                 std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-job seed: the run seed mixed with a stable key (decision id, dataset name, ...).
/// Results stay independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept {
  return mix64(seed ^ mix64(fnv1a(key)));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(seed ^ mix64(salt + 0x632be59bd9b4e019ULL));
}

}  // namespace ea
