#pragma once

#include <cstdint>
#include <string>

namespace ib {

/// Independent random streams of one replication.
enum class Stream : std::uint64_t { Pool = 1, Reward = 2, Policy = 3, Env = 4 };

std::string to_string(Stream stream);

/// SplitMix64 finalizer: a bijective 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t x);

/// Hash-chains the inputs through splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Seed for `stream` of replication `replication` under `base_seed`. The
/// derivation depends only on this tuple, so swapping policies leaves pool
/// and reward streams untouched.
std::uint64_t seed_schedule(std::uint64_t base_seed, std::uint64_t replication, Stream stream);

}  // namespace ib
