#pragma once

#include <cstdint>

#include "dwh/types.hpp"

namespace dwh {

/// Rank-limited SVD with a deterministic sign convention. padded counts the
/// columns beyond the numerical rank, which carry zero singular values, zero
/// left columns, and seeded random orthonormal completions on the right.
struct TruncatedSvd {
    Matrix left;      // rows(a) x rank
    Vector singular;  // rank, non-increasing
    Matrix right;     // cols(a) x rank
    Index padded = 0;
};

/// Thin SVD of a truncated to the leading `rank` columns. Signs are fixed by
/// making each right column's largest-magnitude entry positive. Requires
/// 1 <= rank <= min(rows, cols).
TruncatedSvd truncated_svd(const Matrix& a, Index rank, std::uint64_t seed);

}  // namespace dwh
