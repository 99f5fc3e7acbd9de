#include "dwh/oracle.hpp"

#include <cmath>

#include "dwh/model.hpp"
#include "dwh/rng.hpp"
#include "dwh/trainer.hpp"

namespace dwh {

ModelDims canonical_tiny_dims() { return {2, 1, 2}; }

TruncationSpec canonical_truncation() {
    TruncationSpec trunc;
    trunc.max_count = 8;
    trunc.grid_lo = -6.0;
    trunc.grid_hi = 6.0;
    trunc.grid_points = 41;
    return trunc;
}

HarmoniumParams random_params(const ModelDims& dims, std::uint64_t seed, double coupling_scale) {
    Rng rng(seed);
    HarmoniumParams params = zero_params(dims);
    auto uniform_in = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    for (Index i = 0; i < dims.vocab_size; ++i) params.alpha[i] = uniform_in(-1.0, 0.5);
    for (Index k = 0; k < dims.bin_count; ++k) params.beta[k] = uniform_in(-0.3, 0.3);
    for (Index k = 0; k < dims.bin_count; ++k) params.sigma[k] = uniform_in(0.7, 1.3);
    for (Index j = 0; j < dims.latent_dim; ++j) {
        for (Index i = 0; i < dims.vocab_size; ++i) {
            params.W(i, j) = uniform_in(-coupling_scale, coupling_scale);
        }
    }
    for (Index j = 0; j < dims.latent_dim; ++j) {
        for (Index k = 0; k < dims.bin_count; ++k) {
            params.U(k, j) = uniform_in(-coupling_scale, coupling_scale);
        }
    }
    while (!validate_params(params).ok) params.U *= 0.8;
    return params;
}

Observation random_observation(const ModelDims& dims, std::uint64_t seed, long max_count,
                               double z_range) {
    Rng rng(seed);
    Vector counts(dims.vocab_size);
    for (Index i = 0; i < dims.vocab_size; ++i) {
        counts[i] = static_cast<double>(rng.bounded(static_cast<std::uint64_t>(max_count) + 1));
    }
    Vector z(dims.bin_count);
    for (Index k = 0; k < dims.bin_count; ++k) z[k] = (2.0 * rng.uniform() - 1.0) * z_range;
    return make_observation(counts, z);
}

std::vector<Observation> random_batch(const ModelDims& dims, Index size, std::uint64_t seed,
                                      long max_count, double z_range) {
    std::vector<Observation> batch;
    batch.reserve(static_cast<std::size_t>(size));
    for (Index n = 0; n < size; ++n) {
        batch.push_back(
            random_observation(dims, mix_seed(seed, static_cast<std::uint64_t>(n)), max_count,
                               z_range));
    }
    return batch;
}

Vector flatten_params(const HarmoniumParams& params) {
    const auto& d = params.dims;
    Vector flat(d.vocab_size + 2 * d.bin_count + (d.vocab_size + d.bin_count) * d.latent_dim);
    Index at = 0;
    flat.segment(at, d.vocab_size) = params.alpha;
    at += d.vocab_size;
    flat.segment(at, d.bin_count) = params.beta;
    at += d.bin_count;
    flat.segment(at, d.bin_count) = params.sigma.array().inverse();
    at += d.bin_count;
    flat.segment(at, d.vocab_size * d.latent_dim) =
        Eigen::Map<const Vector>(params.W.data(), d.vocab_size * d.latent_dim);
    at += d.vocab_size * d.latent_dim;
    flat.segment(at, d.bin_count * d.latent_dim) =
        Eigen::Map<const Vector>(params.U.data(), d.bin_count * d.latent_dim);
    return flat;
}

HarmoniumParams unflatten_params(const ModelDims& dims, const Vector& flat) {
    HarmoniumParams params = zero_params(dims);
    Index at = 0;
    params.alpha = flat.segment(at, dims.vocab_size);
    at += dims.vocab_size;
    params.beta = flat.segment(at, dims.bin_count);
    at += dims.bin_count;
    params.sigma = flat.segment(at, dims.bin_count).array().inverse();
    at += dims.bin_count;
    params.W = Eigen::Map<const Matrix>(flat.data() + at, dims.vocab_size, dims.latent_dim);
    at += dims.vocab_size * dims.latent_dim;
    params.U = Eigen::Map<const Matrix>(flat.data() + at, dims.bin_count, dims.latent_dim);
    return params;
}

Vector finite_difference_gradient(const HarmoniumParams& params,
                                  const std::vector<Observation>& batch,
                                  const TruncationSpec& trunc, double step, double state_budget) {
    const Vector center = flatten_params(params);
    Vector gradient(center.size());
    for (Index c = 0; c < center.size(); ++c) {
        Vector flat = center;
        flat[c] = center[c] + step;
        const double up =
            exact_log_likelihood(unflatten_params(params.dims, flat), batch, trunc, state_budget);
        flat[c] = center[c] - step;
        const double down =
            exact_log_likelihood(unflatten_params(params.dims, flat), batch, trunc, state_budget);
        gradient[c] = (up - down) / (2.0 * step);
    }
    return gradient;
}

OracleCheck run_gradient_oracle(Index draws, double tol, std::uint64_t seed) {
    const ModelDims dims = canonical_tiny_dims();
    const TruncationSpec trunc = canonical_truncation();
    OracleCheck check;
    for (Index d = 0; d < draws; ++d) {
        const HarmoniumParams params = random_params(dims, mix_seed(seed, static_cast<std::uint64_t>(d)));
        const auto batch =
            random_batch(dims, 20, mix_seed(seed, 1000 + static_cast<std::uint64_t>(d)));
        const Vector exact = exact_gradient(params, batch, trunc).flatten();
        const Vector fd = finite_difference_gradient(params, batch, trunc);
        double worst = 0.0;
        for (Index c = 0; c < exact.size(); ++c) {
            const double denom = std::max(std::abs(fd[c]), 1e-4);
            worst = std::max(worst, std::abs(exact[c] - fd[c]) / denom);
        }
        check.per_draw_max_rel_err.push_back(worst);
        check.max_rel_err = std::max(check.max_rel_err, worst);
    }
    check.ok = check.max_rel_err < tol;
    return check;
}

}  // namespace dwh
