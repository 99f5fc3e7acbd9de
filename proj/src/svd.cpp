#include "dwh/svd.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "dwh/rng.hpp"

namespace dwh {

namespace {

/// Flips the column pair so that the right column's largest-magnitude entry
/// (first such index on ties) is positive.
void fix_sign(Matrix& right, Matrix& left, Index col) {
    Index peak = 0;
    right.col(col).cwiseAbs().maxCoeff(&peak);
    if (right(peak, col) < 0.0) {
        right.col(col) *= -1.0;
        if (left.cols() > col) left.col(col) *= -1.0;
    }
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& a, Index rank, std::uint64_t seed) {
    const Index max_rank = std::min(a.rows(), a.cols());
    if (rank < 1 || rank > max_rank) {
        throw ShapeError("svd rank must lie in [1, min(rows, cols)]");
    }
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index available = std::min(rank, svd.rank());

    TruncatedSvd out;
    out.left = Matrix::Zero(a.rows(), rank);
    out.singular = Vector::Zero(rank);
    out.right = Matrix::Zero(a.cols(), rank);
    out.left.leftCols(available) = svd.matrixU().leftCols(available);
    out.singular.head(available) = svd.singularValues().head(available);
    out.right.leftCols(available) = svd.matrixV().leftCols(available);
    out.padded = rank - available;

    // Complete the right factor with random orthonormal directions; the
    // corresponding singular values and left columns stay zero.
    Rng rng(seed);
    for (Index col = available; col < rank; ++col) {
        Vector candidate(a.cols());
        double norm = 0.0;
        do {
            for (Index i = 0; i < candidate.size(); ++i) candidate[i] = rng.normal();
            for (int pass = 0; pass < 2; ++pass) {
                for (Index prev = 0; prev < col; ++prev) {
                    candidate -= out.right.col(prev).dot(candidate) * out.right.col(prev);
                }
            }
            norm = candidate.norm();
        } while (norm < 1e-8);
        out.right.col(col) = candidate / norm;
    }
    for (Index col = 0; col < rank; ++col) fix_sign(out.right, out.left, col);
    return out;
}

}  // namespace dwh
