#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace roomimp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed of a parent seed: a pure function of (parent, tag, index), so
/// every stream can be recreated without replaying its siblings.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0);

/// Independent generator for one (seed, index) pair.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

double standard_normal(Rng& rng);

}  // namespace roomimp
