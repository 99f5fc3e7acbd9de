#pragma once

#include <cstdint>
#include <vector>

#include "dwh/model.hpp"
#include "dwh/rng.hpp"
#include "dwh/types.hpp"

namespace dwh {

struct GibbsConfig {
    Index steps = 1;        // full sweeps per reconstruction (CD-k)
    long max_count = 100;   // sampled word counts are clamped here
    std::uint64_t seed = 0;
};

/// Clamp accounting for a cd_gradient call. On well-conditioned models the
/// clamp fraction stays 0.
struct CdStats {
    long clamp_events = 0;
    long word_draws = 0;

    double clamp_fraction() const {
        return word_draws > 0 ? static_cast<double>(clamp_events) / static_cast<double>(word_draws)
                              : 0.0;
    }
};

/// h_j ~ N(shift_j, 1) with shift = hidden_conditional_mean(params, obs).
Vector sample_hidden(const HarmoniumParams& params, const Observation& obs, Rng& rng);

/// x_i ~ Poisson(rate_i) at the given hidden state, clamped at max_count.
/// Each clamped draw increments *clamp_events when provided.
Vector sample_words(const HarmoniumParams& params, const Vector& hidden, Rng& rng, long max_count,
                    long* clamp_events = nullptr);

/// z_k ~ N(mean_k, sigma_k^2) per image_conditional.
Vector sample_image(const HarmoniumParams& params, const Vector& hidden, Rng& rng);

/// config.steps blocked sweeps (hidden, then both wings) started at obs.
/// Draw order per sweep is fixed: latent normals, word counts, bin values.
Observation gibbs_sweep(const HarmoniumParams& params, const Observation& obs,
                        const GibbsConfig& config, Rng& rng, long* clamp_events = nullptr);

/// Contrastive-divergence gradient: batch-averaged difference between data
/// statistics and Gibbs-reconstruction statistics. The shifted statistic is
/// recomputed deterministically from each (x, z) rather than read off the
/// sampled hidden state, so only the reconstruction side carries noise.
/// Each observation gets its own RNG stream from (config.seed, index), so the
/// result is independent of scheduling up to summation order and bit-identical
/// at a fixed thread count.
Gradients cd_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                      const GibbsConfig& config, CdStats* stats = nullptr);

}  // namespace dwh
