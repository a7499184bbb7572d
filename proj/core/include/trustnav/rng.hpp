#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace trustnav {

// Every stochastic operation takes one of these explicitly so that a seed
// fully determines the outcome.
using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix_seed(seed ^ mix_seed(salt));
}

// FNV-1a, for salting seeds with string identifiers.
constexpr std::uint64_t hash_id(std::string_view id) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return std::bernoulli_distribution{p}(rng);
}

}  // namespace trustnav
