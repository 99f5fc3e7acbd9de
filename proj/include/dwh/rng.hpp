#pragma once

#include <cstdint>
#include <vector>

namespace dwh {

/// Deterministic 64-bit generator (xoshiro256++ seeded through splitmix64).
/// Every sampler below is implemented here rather than borrowed from
/// <random> so that a seed reproduces the exact same stream on every
/// platform and standard-library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in (0, 1].
    double uniform_pos();

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double normal();

    /// Poisson draw; sequential inversion below mean 10, Hormann's PTRS
    /// transformed rejection above.
    long poisson(double mean);

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t bounded(std::uint64_t n);

private:
    std::uint64_t state_[4];
};

/// Derives an independent stream seed from (seed, stream index); used to give
/// each observation its own reproducible chain.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace dwh
