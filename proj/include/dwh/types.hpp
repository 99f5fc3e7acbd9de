#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwh {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseVector = Eigen::SparseVector<double>;
using Index = Eigen::Index;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array shapes disagree with the declared dimensions (structural, not a
/// parameter-value problem).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Parameter values violate a model invariant (non-positive scale,
/// non-normalizable coupling, non-finite entry).
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// An exponent exceeded the configured cap; index() names the offending unit.
class OverflowError : public Error {
public:
    OverflowError(const std::string& what, Index index) : Error(what), index_(index) {}
    Index index() const { return index_; }

private:
    Index index_;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Requested enumeration exceeds the configured state budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

struct ModelDims {
    Index vocab_size = 0;  // word features
    Index bin_count = 0;   // histogram bins (0 = text-only model)
    Index latent_dim = 0;  // latent aspects
};

bool operator==(const ModelDims& a, const ModelDims& b);

/// All parameters of a dual-wing harmonium.
///
/// alpha: word log-rate biases (vocab_size)
/// beta:  histogram biases (bin_count)
/// sigma: conditional standard deviations of the histogram bins (bin_count, > 0)
/// W:     word-aspect couplings (vocab_size x latent_dim)
/// U:     bin-aspect couplings (bin_count x latent_dim)
struct HarmoniumParams {
    ModelDims dims;
    Vector alpha;
    Vector beta;
    Vector sigma;
    Matrix W;
    Matrix U;
};

/// Zero-coupling params: alpha = beta = 0, sigma = 1, W = U = 0.
HarmoniumParams zero_params(const ModelDims& dims);

/// One paired sample: sparse non-negative integer word counts plus a dense
/// histogram vector.
struct Observation {
    SparseVector word_counts;
    Vector histogram;
};

Observation make_observation(const Vector& word_counts, const Vector& histogram);
Vector dense_counts(const Observation& obs);
double count_sum(const Observation& obs);

/// Truncated support for exact enumeration: word counts capped at max_count,
/// histogram bins discretized on a uniform grid (applied to every bin).
struct TruncationSpec {
    long max_count = 100;
    double grid_lo = -6.0;
    double grid_hi = 6.0;
    Index grid_points = 41;  // >= 3 and odd

    double grid_step() const { return (grid_hi - grid_lo) / static_cast<double>(grid_points - 1); }
    double grid_value(Index i) const { return grid_lo + grid_step() * static_cast<double>(i); }
};

/// Parameter-shaped gradient container. Every field is a derivative of the
/// mean truncated log-likelihood, so gradient ascent uses them directly.
/// d_inv_sigma is the derivative with respect to 1/sigma.
struct Gradients {
    Vector d_alpha;
    Vector d_beta;
    Vector d_inv_sigma;
    Matrix d_W;
    Matrix d_U;

    static Gradients zero(const ModelDims& dims);
    Vector flatten() const;
    double norm() const;
    bool all_finite() const;
};

struct ValidityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

}  // namespace dwh
