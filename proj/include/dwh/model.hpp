#pragma once

#include "dwh/types.hpp"

namespace dwh {

/// Exponent guard for Poisson rates and mean-field word means: anything above
/// exp(30) aborts with an OverflowError instead of propagating infinities.
inline constexpr double kExponentCap = 30.0;

/// Hard floor on conditional standard deviations.
inline constexpr double kSigmaFloor = 1e-4;

/// Throws ShapeError when the parameter arrays disagree with dims.
void check_shapes(const HarmoniumParams& params);

/// Throws ShapeError when the observation disagrees with params.dims.
void check_shapes(const HarmoniumParams& params, const Observation& obs);

/// Precision matrix of the histogram marginal: diag(1/sigma^2) - U U^T.
/// It must be positive definite for the input marginal to be normalizable.
Matrix histogram_marginal_precision(const HarmoniumParams& params);

/// Smallest eigenvalue of histogram_marginal_precision (+inf when bin_count = 0,
/// where the constraint is vacuous).
double min_precision_eigenvalue(const HarmoniumParams& params);

/// Invariant check: positive finite sigma, finite entries, positive definite
/// histogram precision. Structural problems throw ShapeError; invariant
/// violations are listed in the report.
ValidityReport validate_params(const HarmoniumParams& params);

/// Mean of the latent conditional: W^T x + U^T z. Also the shifted statistic
/// the coupling gradients pair with word counts and bin values.
Vector hidden_conditional_mean(const HarmoniumParams& params, const Observation& obs);

/// Dense-count overload used by the enumeration paths.
Vector hidden_conditional_mean(const HarmoniumParams& params, const Vector& word_counts,
                               const Vector& histogram);

/// Conditional Poisson rates exp(alpha + W h). Throws OverflowError naming
/// the first word whose exponent exceeds the cap.
Vector word_rates(const HarmoniumParams& params, const Vector& hidden,
                  double exponent_cap = kExponentCap);

struct GaussianConditional {
    Vector mean;
    Vector variance;
};

/// Conditional histogram distribution: mean sigma^2 (beta + U h), variance sigma^2.
GaussianConditional image_conditional(const HarmoniumParams& params, const Vector& hidden);

/// Adds the observation's gradient-side sufficient statistics into g: counts
/// into d_alpha, bins into d_beta, count/bin outer products with the shifted
/// statistic into d_W and d_U, and -z^2/sigma into d_inv_sigma. Every
/// estimator's data term is this accumulation averaged over its batch.
void add_data_statistics(const HarmoniumParams& params, const Observation& obs, Gradients& g);

/// Unnormalized log density of the full field at (x, z, h).
double log_joint_unnorm(const HarmoniumParams& params, const Observation& obs,
                        const Vector& hidden);

/// Unnormalized log density of the input marginal (hidden units integrated out,
/// dropping the latent_dim/2 * log(2 pi) constant).
double log_marginal_unnorm(const HarmoniumParams& params, const Observation& obs);
double log_marginal_unnorm(const HarmoniumParams& params, const Vector& word_counts,
                           const Vector& histogram);

/// Number of discrete states the truncated support contains, scaled by
/// vocab_size as the per-state work estimate; compared against the budget.
double truncated_state_cost(const ModelDims& dims, const TruncationSpec& trunc);

/// Exact log partition of the truncated, grid-discretized input marginal:
/// log sum exp(log_marginal_unnorm) plus the grid cell volume. Deterministic;
/// throws BudgetError when the state count is too large and ValidationError
/// when params fail validate_params.
double log_partition_truncated(const HarmoniumParams& params, const TruncationSpec& trunc,
                               double state_budget = 1e7);

}  // namespace dwh
