#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qpat {

/// FNV-1a 64-bit hash of a byte string; used for stable seed derivation
/// and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Derive an independent stream seed from a master seed and a purpose tag,
/// so adding one randomized step never shifts the draws of another.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = fnv1a64(tag);
  // splitmix64 finalizer over master ^ tag-hash
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view tag) {
  return std::mt19937_64(derive_seed(master, tag));
}

}  // namespace qpat
