#include "dwh/gibbs.hpp"

#include <cmath>
#include <exception>

#include "dwh/parallel.hpp"

namespace dwh {

Vector sample_hidden(const HarmoniumParams& params, const Observation& obs, Rng& rng) {
    Vector h = hidden_conditional_mean(params, obs);
    for (Index j = 0; j < h.size(); ++j) h[j] += rng.normal();
    return h;
}

Vector sample_words(const HarmoniumParams& params, const Vector& hidden, Rng& rng, long max_count,
                    long* clamp_events) {
    const Vector rates = word_rates(params, hidden);
    Vector counts(rates.size());
    for (Index i = 0; i < rates.size(); ++i) {
        long x = rng.poisson(rates[i]);
        if (x > max_count) {
            x = max_count;
            if (clamp_events) ++*clamp_events;
        }
        counts[i] = static_cast<double>(x);
    }
    return counts;
}

Vector sample_image(const HarmoniumParams& params, const Vector& hidden, Rng& rng) {
    const GaussianConditional cond = image_conditional(params, hidden);
    Vector z(cond.mean.size());
    for (Index k = 0; k < z.size(); ++k) {
        z[k] = cond.mean[k] + std::sqrt(cond.variance[k]) * rng.normal();
    }
    return z;
}

Observation gibbs_sweep(const HarmoniumParams& params, const Observation& obs,
                        const GibbsConfig& config, Rng& rng, long* clamp_events) {
    check_shapes(params, obs);
    if (config.steps < 1) throw ValidationError("gibbs steps must be >= 1");
    if (config.max_count < 1) throw ValidationError("gibbs max_count must be >= 1");
    Observation current = obs;
    for (Index t = 0; t < config.steps; ++t) {
        const Vector h = sample_hidden(params, current, rng);
        const Vector counts = sample_words(params, h, rng, config.max_count, clamp_events);
        current = make_observation(counts, sample_image(params, h, rng));
    }
    return current;
}

Gradients cd_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                      const GibbsConfig& config, CdStats* stats) {
    check_shapes(params);
    if (batch.empty()) throw ValidationError("cd_gradient needs a non-empty batch");
    const Vector inv_sigma = params.sigma.array().inverse();
    const Index n = static_cast<Index>(batch.size());
    const std::size_t slots = std::min<std::size_t>(max_workers(), static_cast<std::size_t>(n));
    std::vector<Gradients> partial(slots, Gradients::zero(params.dims));
    std::vector<long> clamps(slots, 0);
    std::vector<std::exception_ptr> failures(slots);
    parallel_chunks(n, [&](Index begin, Index end, std::size_t slot) {
        try {
            Gradients& g = partial[slot];
            for (Index i = begin; i < end; ++i) {
                const Observation& obs = batch[static_cast<std::size_t>(i)];
                add_data_statistics(params, obs, g);
                Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(i)));
                const Observation recon = gibbs_sweep(params, obs, config, rng,
                                                      &clamps[slot]);
                const Vector recon_counts = dense_counts(recon);
                const Vector recon_shift = hidden_conditional_mean(params, recon);
                g.d_alpha.noalias() -= recon_counts;
                g.d_beta -= recon.histogram;
                g.d_inv_sigma +=
                    recon.histogram.array().square().matrix().cwiseProduct(inv_sigma);
                g.d_W.noalias() -= recon_counts * recon_shift.transpose();
                g.d_U.noalias() -= recon.histogram * recon_shift.transpose();
            }
        } catch (...) {
            failures[slot] = std::current_exception();
        }
    });
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    Gradients total = Gradients::zero(params.dims);
    long clamp_total = 0;
    for (std::size_t s = 0; s < slots; ++s) {
        total.d_alpha += partial[s].d_alpha;
        total.d_beta += partial[s].d_beta;
        total.d_inv_sigma += partial[s].d_inv_sigma;
        total.d_W += partial[s].d_W;
        total.d_U += partial[s].d_U;
        clamp_total += clamps[s];
    }
    const double scale = 1.0 / static_cast<double>(n);
    total.d_alpha *= scale;
    total.d_beta *= scale;
    total.d_inv_sigma *= scale;
    total.d_W *= scale;
    total.d_U *= scale;
    if (stats) {
        stats->clamp_events += clamp_total;
        stats->word_draws +=
            static_cast<long>(n) * static_cast<long>(config.steps) * params.dims.vocab_size;
    }
    return total;
}

}  // namespace dwh
