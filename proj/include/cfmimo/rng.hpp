// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace cfmimo {

using Rng = std::mt19937_64;

/// Independent stream tags. Values are part of the seed derivation and must not change.
enum class Stream : std::uint64_t {
    topology = 1,
    mobility = 2,
    shadowing = 3,
    pilots = 4,
    fading = 5,
    mdp = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for (master, stream, block, trial). Each field passes through splitmix64 before the
/// next is folded in, so neighbouring indices give unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t block = 0,
                          std::uint64_t trial = 0);

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t block = 0,
                    std::uint64_t trial = 0)
{
    return Rng(derive_seed(master, stream, block, trial));
}

}  // namespace cfmimo
