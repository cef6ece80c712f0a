#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dpc {

using Rng = std::mt19937_64;

/// FNV-1a over the bytes of `name`; stable across platforms and builds.
constexpr std::uint64_t fnv1a(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for the named component of a master seed, so that
/// e.g. the graph draw does not shift when the utility draw changes.
inline Rng named_stream(std::uint64_t master_seed, std::string_view name) {
  return Rng(splitmix64(master_seed ^ fnv1a(name)));
}

}  // namespace dpc
