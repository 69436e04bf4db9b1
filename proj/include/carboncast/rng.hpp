#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace carboncast {

// splitmix64 finalizer; used to mix (master seed, job coordinates) into
// independent per-job seeds so parallel fits stay reproducible.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic stream for one (seed, origin, model) job. Streams derived
// from distinct coordinates never collide in practice and do not depend on
// scheduling order.
inline std::mt19937_64 derive_stream(std::uint64_t master_seed, std::uint64_t origin_index,
                                     const std::string& model_id, std::uint64_t salt = 0) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ origin_index);
  h = mix64(h ^ fnv1a64(model_id));
  h = mix64(h ^ salt);
  return std::mt19937_64(h);
}

}  // namespace carboncast
