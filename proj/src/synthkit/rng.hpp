#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace synthkit {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child stream seed for (dataset index, variable index) under a master seed.
// Depends on nothing else, so generation order and worker count do not matter.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t dataset, std::uint64_t variable) noexcept;

// FNV-1a, for keying streams by a label.
std::uint64_t hash_string(std::string_view s) noexcept;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace synthkit
