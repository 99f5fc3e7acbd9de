#include "dwh/gmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dwh {

namespace {

void check_config(const GmfConfig& config) {
    if (!(config.tol > 0.0)) throw ValidationError("gmf tol must be > 0");
    if (config.max_iter < 1) throw ValidationError("gmf max_iter must be >= 1");
    if (!(config.damping >= 0.0 && config.damping < 1.0)) {
        throw ValidationError("gmf damping must lie in [0, 1)");
    }
}

/// One undamped cyclic pass; clamped blocks are copied through unchanged.
GmfState cyclic_update(const HarmoniumParams& params, const GmfState& s, bool word_clamped,
                       bool bin_clamped) {
    GmfState u;
    u.aspect_mean = params.W.transpose() * s.word_mean;
    u.aspect_mean.noalias() += params.U.transpose() * s.bin_mean;
    if (bin_clamped) {
        u.bin_mean = s.bin_mean;
    } else {
        u.bin_mean = params.sigma.array().square() *
                     (params.beta + params.U * u.aspect_mean).array();
    }
    u.word_mean = word_clamped ? s.word_mean : word_rates(params, u.aspect_mean);
    return u;
}

double state_distance(const GmfState& a, const GmfState& b) {
    double r = (a.aspect_mean - b.aspect_mean).lpNorm<Eigen::Infinity>();
    if (a.bin_mean.size() > 0) {
        r = std::max(r, (a.bin_mean - b.bin_mean).lpNorm<Eigen::Infinity>());
    }
    r = std::max(r, (a.word_mean - b.word_mean).lpNorm<Eigen::Infinity>());
    return r;
}

}  // namespace

GmfResult gmf_fixed_point(const HarmoniumParams& params, const GmfConfig& config,
                          const GmfClamp& clamp, const std::optional<GmfState>& init) {
    check_shapes(params);
    check_config(config);
    const auto& dims = params.dims;
    if (clamp.word_counts && clamp.word_counts->size() != dims.vocab_size) {
        throw ShapeError("clamped word counts do not match vocab_size");
    }
    if (clamp.histogram && clamp.histogram->size() != dims.bin_count) {
        throw ShapeError("clamped histogram does not match bin_count");
    }

    GmfState s;
    if (init) {
        s = *init;
        if (s.word_mean.size() != dims.vocab_size || s.bin_mean.size() != dims.bin_count ||
            s.aspect_mean.size() != dims.latent_dim) {
            throw ShapeError("gmf init state does not match model dims");
        }
    } else {
        s.aspect_mean = Vector::Zero(dims.latent_dim);
        s.bin_mean = params.sigma.array().square() * params.beta.array();
        s.word_mean = params.alpha.array().exp().min(1.0);
    }
    if (clamp.word_counts) s.word_mean = *clamp.word_counts;
    if (clamp.histogram) s.bin_mean = *clamp.histogram;

    GmfResult result;
    double prev_residual = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (Index iter = 1; iter <= config.max_iter; ++iter) {
        const GmfState u = cyclic_update(params, s, clamp.word_counts.has_value(),
                                         clamp.histogram.has_value());
        const double residual = state_distance(u, s);
        result.iterations = iter;
        if (residual < config.tol) {
            s = u;
            result.converged = true;
            break;
        }
        if (residual > prev_residual) {
            if (++rising >= 20) {
                throw DivergenceError("mean-field residual grew for 20 consecutive sweeps (" +
                                      std::to_string(residual) + " at iteration " +
                                      std::to_string(iter) + ")");
            }
        } else {
            rising = 0;
        }
        prev_residual = residual;
        const double d = config.damping;
        s.aspect_mean = (1.0 - d) * u.aspect_mean + d * s.aspect_mean;
        s.bin_mean = (1.0 - d) * u.bin_mean + d * s.bin_mean;
        s.word_mean = (1.0 - d) * u.word_mean + d * s.word_mean;
    }
    result.residual = state_distance(
        cyclic_update(params, s, clamp.word_counts.has_value(), clamp.histogram.has_value()), s);
    result.state = std::move(s);
    return result;
}

Gradients gmf_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                       const GmfConfig& config) {
    check_shapes(params);
    if (batch.empty()) throw ValidationError("gmf_gradient needs a non-empty batch");
    const GmfResult solve = gmf_fixed_point(params, config);
    if (!solve.converged) {
        throw DivergenceError("unclamped mean-field solve did not converge within " +
                              std::to_string(config.max_iter) + " iterations (residual " +
                              std::to_string(solve.residual) + ")");
    }
    const Vector& nu = solve.state.word_mean;
    const Vector& mu = solve.state.bin_mean;
    Vector aspect_shift = params.W.transpose() * nu;
    aspect_shift.noalias() += params.U.transpose() * mu;
    const Vector variance = params.sigma.array().square();
    const Vector inv_sigma = params.sigma.array().inverse();

    Gradients g = Gradients::zero(params.dims);
    for (const Observation& obs : batch) add_data_statistics(params, obs, g);
    const double scale = 1.0 / static_cast<double>(batch.size());
    g.d_alpha = scale * g.d_alpha - nu;
    g.d_beta = scale * g.d_beta - mu;
    // E[x shift^T] = nu shift^T + W .* nu (Poisson variance), and likewise
    // E[z shift^T] = mu shift^T + U .* sigma^2.
    g.d_W = scale * g.d_W - nu * aspect_shift.transpose() - nu.asDiagonal() * params.W;
    g.d_U = scale * g.d_U - mu * aspect_shift.transpose() - variance.asDiagonal() * params.U;
    const Vector model_sq = mu.array().square() + variance.array();
    g.d_inv_sigma = scale * g.d_inv_sigma + model_sq.cwiseProduct(inv_sigma);
    return g;
}

std::vector<WordScore> annotate(const HarmoniumParams& params, const Vector& z, Index top_n,
                                const GmfConfig& config) {
    check_shapes(params);
    if (top_n < 1 || top_n > params.dims.vocab_size) {
        throw ValidationError("annotate top_n must lie in [1, vocab_size]");
    }
    GmfClamp clamp;
    clamp.histogram = z;
    const GmfResult solve = gmf_fixed_point(params, config, clamp);
    if (!solve.converged) {
        throw DivergenceError("annotation mean-field solve did not converge within " +
                              std::to_string(config.max_iter) + " iterations");
    }
    std::vector<WordScore> ranked(static_cast<std::size_t>(params.dims.vocab_size));
    for (Index i = 0; i < params.dims.vocab_size; ++i) {
        ranked[static_cast<std::size_t>(i)] = {i, solve.state.word_mean[i]};
    }
    std::sort(ranked.begin(), ranked.end(), [](const WordScore& a, const WordScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.word < b.word;
    });
    ranked.resize(static_cast<std::size_t>(top_n));
    return ranked;
}

}  // namespace dwh
