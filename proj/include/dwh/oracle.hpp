#pragma once

#include <cstdint>
#include <vector>

#include "dwh/types.hpp"

namespace dwh {

/// The tiny configuration every exact check runs on: 2 words, 1 bin,
/// 2 aspects, counts to 8, 41 grid points on [-6, 6].
ModelDims canonical_tiny_dims();
TruncationSpec canonical_truncation();

/// Random valid parameters: biases and scales in moderate ranges, couplings
/// uniform in [-coupling_scale, coupling_scale], U shrunk by 0.8 until the
/// histogram precision is positive definite.
HarmoniumParams random_params(const ModelDims& dims, std::uint64_t seed,
                              double coupling_scale = 0.3);

/// Random observation with uniform counts in [0, max_count] and bins uniform
/// in [-z_range, z_range].
Observation random_observation(const ModelDims& dims, std::uint64_t seed, long max_count = 4,
                               double z_range = 2.0);

std::vector<Observation> random_batch(const ModelDims& dims, Index size, std::uint64_t seed,
                                      long max_count = 4, double z_range = 2.0);

/// Packs parameters in Gradients::flatten order (alpha, beta, 1/sigma, W, U).
Vector flatten_params(const HarmoniumParams& params);
HarmoniumParams unflatten_params(const ModelDims& dims, const Vector& flat);

/// Central differences of the mean truncated log-likelihood, component by
/// component in flatten order.
Vector finite_difference_gradient(const HarmoniumParams& params,
                                  const std::vector<Observation>& batch,
                                  const TruncationSpec& trunc, double step = 1e-5,
                                  double state_budget = 1e7);

struct OracleCheck {
    std::vector<double> per_draw_max_rel_err;
    double max_rel_err = 0.0;
    bool ok = false;
};

/// Compares exact_gradient against finite differences on random canonical
/// models; the relative error denominator is floored at 1e-4. This single
/// check pins every learning rule, including the 1/sigma gradient's sign.
OracleCheck run_gradient_oracle(Index draws = 5, double tol = 1e-5,
                                std::uint64_t seed = 20240101);

}  // namespace dwh
