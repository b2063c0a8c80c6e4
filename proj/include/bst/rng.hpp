#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace bst {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche for seed derivation and hashing.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of tags, so
// substreams (per user, per example, per epoch) never consume from each other.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t p : path) h = mix64(h ^ p);
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// FNV-1a: stable string hash (std::hash is implementation-defined), used to
// key per-parameter init streams.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bst
