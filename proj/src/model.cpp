#include "dwh/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "dwh/enumeration.hpp"

namespace dwh {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ShapeError(what);
}

}  // namespace

void check_shapes(const HarmoniumParams& params) {
    const auto& d = params.dims;
    require(d.vocab_size >= 0 && d.bin_count >= 0 && d.latent_dim >= 1,
            "model dims must satisfy vocab_size >= 0, bin_count >= 0, latent_dim >= 1");
    require(params.alpha.size() == d.vocab_size, "alpha size does not match vocab_size");
    require(params.beta.size() == d.bin_count, "beta size does not match bin_count");
    require(params.sigma.size() == d.bin_count, "sigma size does not match bin_count");
    require(params.W.rows() == d.vocab_size && params.W.cols() == d.latent_dim,
            "W must be vocab_size x latent_dim");
    require(params.U.rows() == d.bin_count && params.U.cols() == d.latent_dim,
            "U must be bin_count x latent_dim");
}

void check_shapes(const HarmoniumParams& params, const Observation& obs) {
    check_shapes(params);
    require(obs.word_counts.size() == params.dims.vocab_size,
            "observation word counts do not match vocab_size");
    require(obs.histogram.size() == params.dims.bin_count,
            "observation histogram does not match bin_count");
}

Matrix histogram_marginal_precision(const HarmoniumParams& params) {
    Matrix precision = params.sigma.array().square().inverse().matrix().asDiagonal();
    precision.noalias() -= params.U * params.U.transpose();
    return precision;
}

double min_precision_eigenvalue(const HarmoniumParams& params) {
    if (params.dims.bin_count == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(histogram_marginal_precision(params),
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

ValidityReport validate_params(const HarmoniumParams& params) {
    check_shapes(params);
    ValidityReport report;
    auto flag = [&report](const std::string& what) {
        report.ok = false;
        report.violations.push_back(what);
    };
    if (!params.alpha.allFinite()) flag("alpha has non-finite entries");
    if (!params.beta.allFinite()) flag("beta has non-finite entries");
    if (!params.W.allFinite()) flag("W has non-finite entries");
    if (!params.U.allFinite()) flag("U has non-finite entries");
    bool sigma_ok = params.sigma.allFinite();
    for (Index k = 0; sigma_ok && k < params.sigma.size(); ++k) {
        if (params.sigma[k] <= 0.0) sigma_ok = false;
    }
    if (!sigma_ok) {
        flag("sigma must be finite and positive");
    } else if (params.U.allFinite() && params.dims.bin_count > 0) {
        const double lambda = min_precision_eigenvalue(params);
        if (!(lambda > 0.0)) {
            flag("histogram marginal precision is not positive definite (min eigenvalue " +
                 std::to_string(lambda) + ")");
        }
    }
    return report;
}

Vector hidden_conditional_mean(const HarmoniumParams& params, const Observation& obs) {
    check_shapes(params, obs);
    Vector shift = params.U.transpose() * obs.histogram;
    for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
        shift.noalias() += it.value() * params.W.row(it.index()).transpose();
    }
    return shift;
}

Vector hidden_conditional_mean(const HarmoniumParams& params, const Vector& word_counts,
                               const Vector& histogram) {
    require(word_counts.size() == params.dims.vocab_size,
            "word counts do not match vocab_size");
    require(histogram.size() == params.dims.bin_count, "histogram does not match bin_count");
    Vector shift = params.W.transpose() * word_counts;
    shift.noalias() += params.U.transpose() * histogram;
    return shift;
}

Vector word_rates(const HarmoniumParams& params, const Vector& hidden, double exponent_cap) {
    require(hidden.size() == params.dims.latent_dim, "hidden vector does not match latent_dim");
    Vector exponent = params.alpha;
    exponent.noalias() += params.W * hidden;
    for (Index i = 0; i < exponent.size(); ++i) {
        if (!(exponent[i] <= exponent_cap)) {
            throw OverflowError("word rate exponent " + std::to_string(exponent[i]) +
                                    " exceeds cap " + std::to_string(exponent_cap),
                                i);
        }
    }
    return exponent.array().exp();
}

GaussianConditional image_conditional(const HarmoniumParams& params, const Vector& hidden) {
    require(hidden.size() == params.dims.latent_dim, "hidden vector does not match latent_dim");
    GaussianConditional cond;
    cond.variance = params.sigma.array().square();
    cond.mean = cond.variance.asDiagonal() * (params.beta + params.U * hidden);
    return cond;
}

void add_data_statistics(const HarmoniumParams& params, const Observation& obs, Gradients& g) {
    const Vector shift = hidden_conditional_mean(params, obs);
    for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
        g.d_alpha[it.index()] += it.value();
        g.d_W.row(it.index()).noalias() += it.value() * shift.transpose();
    }
    g.d_beta += obs.histogram;
    g.d_U.noalias() += obs.histogram * shift.transpose();
    g.d_inv_sigma -= obs.histogram.array().square().matrix().cwiseProduct(
        params.sigma.array().inverse().matrix());
}

double log_joint_unnorm(const HarmoniumParams& params, const Observation& obs,
                        const Vector& hidden) {
    require(hidden.size() == params.dims.latent_dim, "hidden vector does not match latent_dim");
    const Vector shift = hidden_conditional_mean(params, obs);
    double value = obs.word_counts.dot(params.alpha);
    for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
        value -= std::lgamma(it.value() + 1.0);
    }
    value += params.beta.dot(obs.histogram);
    value -= 0.5 * (obs.histogram.array() / params.sigma.array()).square().sum();
    value -= 0.5 * hidden.squaredNorm();
    value += hidden.dot(shift);
    return value;
}

double log_marginal_unnorm(const HarmoniumParams& params, const Observation& obs) {
    const Vector shift = hidden_conditional_mean(params, obs);
    double value = obs.word_counts.dot(params.alpha);
    for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
        value -= std::lgamma(it.value() + 1.0);
    }
    value += params.beta.dot(obs.histogram);
    value -= 0.5 * (obs.histogram.array() / params.sigma.array()).square().sum();
    value += 0.5 * shift.squaredNorm();
    return value;
}

double log_marginal_unnorm(const HarmoniumParams& params, const Vector& word_counts,
                           const Vector& histogram) {
    const Vector shift = hidden_conditional_mean(params, word_counts, histogram);
    double value = word_counts.dot(params.alpha);
    for (Index i = 0; i < word_counts.size(); ++i) {
        value -= std::lgamma(word_counts[i] + 1.0);
    }
    value += histogram.dot(params.beta);
    value -= 0.5 * (histogram.array() / params.sigma.array()).square().sum();
    value += 0.5 * shift.squaredNorm();
    return value;
}

void check_truncation(const TruncationSpec& trunc) {
    if (trunc.max_count < 1) throw ValidationError("truncation max_count must be >= 1");
    if (trunc.grid_points < 3 || trunc.grid_points % 2 == 0) {
        throw ValidationError("truncation grid must have an odd number of points >= 3");
    }
    if (!(trunc.grid_hi > trunc.grid_lo)) {
        throw ValidationError("truncation grid interval is empty");
    }
}

double truncated_state_cost(const ModelDims& dims, const TruncationSpec& trunc) {
    const double per_state = static_cast<double>(std::max<Index>(dims.vocab_size, 1));
    return per_state * std::pow(static_cast<double>(trunc.max_count) + 1.0,
                                static_cast<double>(dims.vocab_size)) *
           std::pow(static_cast<double>(trunc.grid_points), static_cast<double>(dims.bin_count));
}

double log_partition_truncated(const HarmoniumParams& params, const TruncationSpec& trunc,
                               double state_budget) {
    check_shapes(params);
    check_truncation(trunc);
    const ValidityReport report = validate_params(params);
    if (!report.ok) throw ValidationError("invalid parameters: " + report.violations.front());
    const double cost = truncated_state_cost(params.dims, trunc);
    if (cost > state_budget) {
        throw BudgetError("truncated enumeration needs " + std::to_string(cost) +
                          " state-visits, budget is " + std::to_string(state_budget));
    }
    double max_log = -std::numeric_limits<double>::infinity();
    for_each_truncated_state(params.dims, trunc, [&](const Vector& x, const Vector& z) {
        max_log = std::max(max_log, log_marginal_unnorm(params, x, z));
    });
    double total = 0.0;
    for_each_truncated_state(params.dims, trunc, [&](const Vector& x, const Vector& z) {
        total += std::exp(log_marginal_unnorm(params, x, z) - max_log);
    });
    double log_z = max_log + std::log(total);
    if (params.dims.bin_count > 0) {
        log_z += static_cast<double>(params.dims.bin_count) * std::log(trunc.grid_step());
    }
    return log_z;
}

}  // namespace dwh
