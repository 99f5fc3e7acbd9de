#pragma once

#include <optional>
#include <vector>

#include "dwh/model.hpp"
#include "dwh/types.hpp"

namespace dwh {

/// Fully factorized variational marginals. The per-factor variances are fixed
/// by the family: Var(x_i) = word_mean_i, Var(z_k) = sigma_k^2, Var(h_j) = 1.
struct GmfState {
    Vector word_mean;    // Poisson means, > 0
    Vector bin_mean;     // Gaussian means
    Vector aspect_mean;  // latent means
};

struct GmfConfig {
    double tol = 1e-8;     // max-norm tolerance on the undamped cyclic update
    Index max_iter = 500;
    double damping = 0.3;  // new = (1 - damping) * update + damping * old
};

/// Observed blocks held fixed through the iteration (removed from the update
/// set). Annotation clamps the histogram; clamping word counts is the
/// symmetric option.
struct GmfClamp {
    std::optional<Vector> word_counts;
    std::optional<Vector> histogram;
};

struct GmfResult {
    GmfState state;
    Index iterations = 0;
    double residual = 0.0;  // re-substitution residual at the returned state
    bool converged = false;
};

/// Cyclic fixed-point iteration: aspect means from both wings, then bin means
/// and word means from the fresh aspect means, damped as a block. Stops when
/// the undamped update moves by less than tol in max-norm; 20 consecutive
/// residual increases raise DivergenceError, word-mean overflow raises
/// OverflowError. A custom init overrides the decoupled-fixed-point default.
GmfResult gmf_fixed_point(const HarmoniumParams& params, const GmfConfig& config,
                          const GmfClamp& clamp = {},
                          const std::optional<GmfState>& init = std::nullopt);

/// Variational gradient: exact data statistics (as in cd_gradient) minus
/// moments of one unclamped mean-field solution shared across the batch.
/// Second moments follow from the factorization, e.g.
/// E[x_i shift_j] = word_mean_i * aspect_shift_j + W_ij * word_mean_i.
Gradients gmf_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                       const GmfConfig& config = {});

struct WordScore {
    Index word = 0;
    double score = 0.0;
};

/// Ranks words for an image by their converged variational means with the
/// histogram block clamped to z. Descending score, ties by ascending index.
std::vector<WordScore> annotate(const HarmoniumParams& params, const Vector& z, Index top_n,
                                const GmfConfig& config = {});

}  // namespace dwh
