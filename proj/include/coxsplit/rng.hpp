#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "coxsplit/numeric.hpp"

namespace coxsplit {

// Substream derivation.
//
// Every random quantity is drawn from a std::mt19937_64 engine whose seed is
// derived from (master seed, stream kind, dataset index, split index) by
// chaining the SplitMix64 finalizer:
//
//   h0 = mix(seed + G * (kind + 1))
//   h1 = mix(h0 ^ (dataset_index * G))      (wrapping arithmetic)
//   h2 = mix(h1 ^ (split_index * G + 1))
//
// with G = 0x9E3779B97F4A7C15. Both the engine and this derivation are fully
// specified by the C++ standard, so datasets and splits are identical across
// platforms and independent of evaluation order.

inline constexpr std::string_view kGeneratorName = "mt19937_64+splitmix64-substreams";

enum class StreamKind : std::uint64_t { dataset = 1, split = 2 };

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamKind kind,
                                           std::uint64_t dataset_index,
                                           std::uint64_t split_index) noexcept {
  constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t h = splitmix64_mix(seed + golden * (static_cast<std::uint64_t>(kind) + 1));
  h = splitmix64_mix(h ^ (dataset_index * golden));
  h = splitmix64_mix(h ^ (split_index * golden + 1));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, StreamKind kind, std::uint64_t dataset_index,
                          std::uint64_t split_index) {
  return Engine(derive_seed(seed, kind, dataset_index, split_index));
}

/// Uniform on the open interval (0, 1): the top 53 bits, offset by half a step.
inline double uniform_open01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal variate by inversion of the uniform stream.
inline double standard_normal(Engine& eng) { return normal_quantile(uniform_open01(eng)); }

/// Unbiased integer in [0, bound) by rejection on the top of the range.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace coxsplit
