#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sepcov {

/// Seed used by every entry point when the caller does not pick one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// SplitMix64 finalizer; a bijection on 64-bit words with good avalanche.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of an independent stream addressed by `keys` under `master`.
/// Streams are pure functions of (master, keys), so realizations can be
/// generated in any order or concurrently without changing the results.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Deterministic standard normal draw (Box-Muller, cosine branch). Used instead
/// of std::normal_distribution so sample streams do not depend on the
/// standard library implementation.
double standard_normal(Engine& engine);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Engine& engine);

/// Uniform integer in [0, bound) without modulo bias.
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound);

}  // namespace sepcov
