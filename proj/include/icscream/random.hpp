#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace icscream {

/// All stochastic routines take an explicit generator seeded from a
/// caller-supplied integer. mt19937_64 output is fixed by the standard, and
/// every transform below is written out by hand so draws are identical
/// across standard library implementations.
using Rng = std::mt19937_64;

/// Mixes a master seed with a stream id (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Mixes a master seed with a stage name (FNV-1a of the name).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

/// Uniform draw on the open interval (0, 1).
double uniform_open01(Rng& rng);

/// Uniform integer in [0, bound) by rejection; bound > 0.
std::size_t uniform_index(Rng& rng, std::size_t bound);

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

}  // namespace icscream
