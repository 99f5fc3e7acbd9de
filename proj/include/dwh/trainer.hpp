#pragma once

#include <cstdint>
#include <vector>

#include "dwh/corpus.hpp"
#include "dwh/gibbs.hpp"
#include "dwh/gmf.hpp"
#include "dwh/types.hpp"

namespace dwh {

/// Gradient estimators: Gibbs-chain contrastive divergence, mean-field
/// surrogate, or full truncated enumeration (tiny models only; this is the
/// oracle the other two are tested against, exposed so training curves can be
/// audited with it).
enum class TrainMethod { cd, gmf, exact };

struct TrainConfig {
    TrainMethod method = TrainMethod::cd;
    double learning_rate = 1e-2;
    Index epochs = 1000;  // protocol default: up to 1000 gradient-ascent steps
    Index batch_size = 100;
    double momentum = 0.0;       // [0, 1)
    double weight_decay = 1e-4;  // applied to W and U only
    std::uint64_t seed = 1;
    GibbsConfig gibbs;           // cd method; gibbs.seed is derived per batch
    GmfConfig gmf;               // gmf method (and gradient-side solves)
    double projection_margin = 0.05;  // integrability projection headroom
    double init_scale = 0.01;         // coupling init scale
    bool normalize = true;            // feature-sum normalization before training
    bool freeze_couplings = false;    // keep W = U = 0 (decoupled baseline)
    TruncationSpec truncation;        // exact method only
    double state_budget = 1e7;        // exact method enumeration guard
};

struct EpochRecord {
    double grad_norm = 0.0;   // mean mini-batch gradient norm
    long clamp_events = 0;    // cd only
    Index divergences = 0;    // gmf batches skipped after DivergenceError
    Index projections = 0;    // integrability projections applied
    double objective = 0.0;   // exact method only: truncated log-likelihood
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::vector<Index> flagged_observations;  // unscaled by normalize_features
    Index padded_columns = 0;                 // rank-deficient coupling init
    double seconds = 0.0;                     // wall clock, excluded from ==
};

/// Field-by-field equality ignoring the wall-clock, so determinism checks can
/// compare reports directly.
bool operator==(const EpochRecord& a, const EpochRecord& b);
bool operator==(const TrainReport& a, const TrainReport& b);

struct TrainResult {
    HarmoniumParams params;
    TrainReport report;
};

struct SvdInit {
    Matrix W;
    Matrix U;
    Index padded = 0;
};

/// Couplings from the rank-J SVD of the design matrix: W and U are the word
/// and bin rows of the right singular vectors, scaled. Columns short of the
/// numerical rank are filled with scaled random orthonormal completions.
SvdInit svd_init(const Corpus& corpus, Index latent_dim, double scale = 0.01,
                 std::uint64_t seed = 0);

/// Starting point: alpha at smoothed log empirical word means, beta zero,
/// sigma at per-bin standard deviation (floored at 1e-2), couplings from
/// svd_init (padding count written through padded when given). The corpus is
/// used as given; normalize first if desired.
HarmoniumParams init_params(const Corpus& corpus, Index latent_dim, const TrainConfig& config,
                            Index* padded = nullptr);

/// Restores z-integrability by shrinking U with the largest factor that keeps
/// the smallest precision eigenvalue at or above margin * min(1/sigma^2)
/// (binary search, 40 bisections). Returns true when a rescale was needed.
bool project_integrability(HarmoniumParams& params, double margin);

/// Mean truncated log-likelihood of the batch: mean log_marginal_unnorm minus
/// log_partition_truncated.
double exact_log_likelihood(const HarmoniumParams& params, const std::vector<Observation>& batch,
                            const TruncationSpec& trunc, double state_budget = 1e7);

/// Exact ascent gradient of exact_log_likelihood via full enumeration of the
/// truncated support. The oracle every estimator is validated against.
Gradients exact_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                         const TruncationSpec& trunc, double state_budget = 1e7);

/// Mini-batch gradient ascent with the configured estimator. Every emitted
/// parameter state passes validate_params; sigma updates run through the
/// inverse parameterization with floors applied.
TrainResult train(const Corpus& corpus, Index latent_dim, const TrainConfig& config);

/// Latent sizes covered by the evaluation protocol.
std::vector<Index> default_latent_sweep();

}  // namespace dwh
