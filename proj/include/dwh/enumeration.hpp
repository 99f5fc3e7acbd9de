#pragma once

#include <cmath>

#include "dwh/types.hpp"

namespace dwh {

/// Throws ValidationError if the truncation spec is unusable (max_count < 1,
/// grid_points < 3 or even, empty grid interval).
void check_truncation(const TruncationSpec& trunc);

/// Visits every state of the truncated support in a fixed odometer order:
/// word-count tuples in {0..max_count}^vocab_size crossed with the histogram
/// grid. fn receives dense (word_counts, histogram) vectors it must not keep.
template <typename Fn>
void for_each_truncated_state(const ModelDims& dims, const TruncationSpec& trunc, Fn&& fn) {
    Vector counts = Vector::Zero(dims.vocab_size);
    Vector hist(dims.bin_count);
    std::vector<Index> grid_idx(static_cast<std::size_t>(dims.bin_count), 0);
    for (;;) {
        for (Index k = 0; k < dims.bin_count; ++k) {
            hist[k] = trunc.grid_value(grid_idx[static_cast<std::size_t>(k)]);
        }
        for (;;) {
            fn(static_cast<const Vector&>(counts), static_cast<const Vector&>(hist));
            Index k = 0;
            while (k < dims.bin_count) {
                auto& gi = grid_idx[static_cast<std::size_t>(k)];
                if (++gi < trunc.grid_points) {
                    hist[k] = trunc.grid_value(gi);
                    break;
                }
                gi = 0;
                hist[k] = trunc.grid_value(0);
                ++k;
            }
            if (k == dims.bin_count) break;
        }
        Index i = 0;
        while (i < dims.vocab_size) {
            counts[i] += 1.0;
            if (counts[i] <= static_cast<double>(trunc.max_count)) break;
            counts[i] = 0.0;
            ++i;
        }
        if (i == dims.vocab_size) break;
    }
}

/// Exact moments of the truncated, grid-discretized input marginal.
/// shift_j = sum_i W_ij x_i + sum_k U_kj z_k evaluated per state.
struct TruncatedMoments {
    double log_partition = 0.0;
    Vector e_count;        // E[x_i]
    Vector e_bin;          // E[z_k]
    Vector e_bin_sq;       // E[z_k^2]
    Matrix e_count_shift;  // E[x_i shift_j]
    Matrix e_bin_shift;    // E[z_k shift_j]
};

TruncatedMoments truncated_moments(const HarmoniumParams& params, const TruncationSpec& trunc,
                                   double state_budget = 1e7);

}  // namespace dwh
