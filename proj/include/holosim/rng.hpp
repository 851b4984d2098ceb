#pragma once

#include <cstdint>
#include <random>

namespace holosim {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used as a cheap strong mix for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a master seed and up to two stream
// indices (pixel index, pipeline stage, time bin, ...).  Work that is split
// across threads draws every child seed through this function so the result
// does not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(master ^ 0x9d2c5680a76f4b21ULL);
  h = splitmix64(h ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b));
  return h;
}

}  // namespace holosim
