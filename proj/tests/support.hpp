#pragma once

// Independent oracles for the exact checks: plain-loop enumeration and
// trapezoid quadrature, written without reusing the library's own shortcut
// formulas so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "dwh/enumeration.hpp"
#include "dwh/gmf.hpp"
#include "dwh/model.hpp"
#include "dwh/oracle.hpp"
#include "dwh/rng.hpp"
#include "dwh/types.hpp"

namespace support {

/// Streaming log-sum-exp of weighted terms: log Σ w_i exp(v_i), w_i > 0.
class LogSum {
public:
    void add(double log_value, double weight = 1.0) {
        const double v = log_value + std::log(weight);
        if (v == -std::numeric_limits<double>::infinity()) return;
        if (v > max_) {
            sum_ = sum_ * std::exp(max_ - v) + 1.0;
            max_ = v;
        } else {
            sum_ += std::exp(v - max_);
        }
    }

    double value() const { return max_ + std::log(sum_); }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

/// log ∫ exp(log_joint_unnorm(params, obs, h)) dh by tensor-product trapezoid
/// quadrature over [lo, hi]^J. The integrand is a Gaussian in h, so the
/// quadrature error decays exponentially in the number of points.
inline double quad_log_hidden_integral(const dwh::HarmoniumParams& params,
                                       const dwh::Observation& obs, double lo = -15.0,
                                       double hi = 15.0, dwh::Index points = 301) {
    const dwh::Index j_dim = params.dims.latent_dim;
    const double step = (hi - lo) / static_cast<double>(points - 1);
    std::vector<dwh::Index> idx(static_cast<std::size_t>(j_dim), 0);
    dwh::Vector h(j_dim);
    LogSum total;
    for (;;) {
        double weight = 1.0;
        for (dwh::Index j = 0; j < j_dim; ++j) {
            const dwh::Index g = idx[static_cast<std::size_t>(j)];
            h[j] = lo + step * static_cast<double>(g);
            weight *= (g == 0 || g == points - 1) ? 0.5 * step : step;
        }
        total.add(dwh::log_joint_unnorm(params, obs, h), weight);
        dwh::Index j = 0;
        while (j < j_dim && ++idx[static_cast<std::size_t>(j)] == points) {
            idx[static_cast<std::size_t>(j)] = 0;
            ++j;
        }
        if (j == j_dim) break;
    }
    return total.value();
}

/// Exact E[x | z] on the truncated count support at a fixed (continuous) z,
/// weighting each count tuple by exp(log_marginal_unnorm).
inline dwh::Vector enumerated_word_mean_given_z(const dwh::HarmoniumParams& params,
                                                const dwh::Vector& z, long max_count) {
    const dwh::Index m = params.dims.vocab_size;
    dwh::Vector counts = dwh::Vector::Zero(m);
    LogSum total;
    std::vector<double> logs;
    std::vector<dwh::Vector> states;
    for (;;) {
        const double lp = dwh::log_marginal_unnorm(params, counts, z);
        logs.push_back(lp);
        states.push_back(counts);
        total.add(lp);
        dwh::Index i = 0;
        while (i < m) {
            counts[i] += 1.0;
            if (counts[i] <= static_cast<double>(max_count)) break;
            counts[i] = 0.0;
            ++i;
        }
        if (i == m) break;
    }
    const double log_z = total.value();
    dwh::Vector mean = dwh::Vector::Zero(m);
    for (std::size_t s = 0; s < states.size(); ++s) {
        mean += std::exp(logs[s] - log_z) * states[s];
    }
    return mean;
}

/// Spearman rank correlation with average ranks on ties.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&v](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (ra[i] - mean_a) * (rb[i] - mean_b);
        var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
        var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
    }
    if (var_a == 0.0 || var_b == 0.0) return var_a == var_b ? 1.0 : 0.0;
    return cov / std::sqrt(var_a * var_b);
}

/// Variational free energy F(q) = E_q[log q] - E_q[log p~] for the factorized
/// state, with x and z expectations enumerated on the truncated support
/// (renormalized per block) and the Gaussian h block integrated analytically.
/// KL(q || p_truncated) equals F(q) plus a q-independent constant, so
/// comparisons between states need no partition function.
inline double free_energy(const dwh::HarmoniumParams& params, const dwh::GmfState& q,
                          const dwh::TruncationSpec& trunc) {
    const dwh::Index m = params.dims.vocab_size;
    const dwh::Index k_dim = params.dims.bin_count;
    const dwh::Index j_dim = params.dims.latent_dim;
    double energy = 0.0;   // E_q[-log p~]
    double entropy = 0.0;  // -E_q[log q]

    dwh::Vector x_mean(m);
    for (dwh::Index i = 0; i < m; ++i) {
        // Truncated Poisson(nu_i) over 0..max_count.
        const double log_nu = std::log(q.word_mean[i]);
        LogSum norm;
        for (long c = 0; c <= trunc.max_count; ++c) {
            norm.add(static_cast<double>(c) * log_nu - std::lgamma(static_cast<double>(c) + 1.0));
        }
        const double log_z = norm.value();
        double mean = 0.0, mean_lgamma = 0.0, ent = 0.0;
        for (long c = 0; c <= trunc.max_count; ++c) {
            const double lp =
                static_cast<double>(c) * log_nu - std::lgamma(static_cast<double>(c) + 1.0) - log_z;
            const double p = std::exp(lp);
            mean += p * static_cast<double>(c);
            mean_lgamma += p * std::lgamma(static_cast<double>(c) + 1.0);
            ent -= p * lp;
        }
        x_mean[i] = mean;
        energy -= params.alpha[i] * mean - mean_lgamma;
        entropy += ent;
    }

    dwh::Vector z_mean(k_dim);
    for (dwh::Index k = 0; k < k_dim; ++k) {
        // Grid-renormalized N(mu_k, sigma_k^2).
        const double var = params.sigma[k] * params.sigma[k];
        LogSum norm;
        for (dwh::Index g = 0; g < trunc.grid_points; ++g) {
            const double d = trunc.grid_value(g) - q.bin_mean[k];
            norm.add(-0.5 * d * d / var);
        }
        const double log_z = norm.value();
        double mean = 0.0, mean_sq = 0.0, ent = 0.0;
        for (dwh::Index g = 0; g < trunc.grid_points; ++g) {
            const double value = trunc.grid_value(g);
            const double d = value - q.bin_mean[k];
            const double lp = -0.5 * d * d / var - log_z;
            const double p = std::exp(lp);
            mean += p * value;
            mean_sq += p * value * value;
            ent -= p * lp;
        }
        z_mean[k] = mean;
        energy -= params.beta[k] * mean - 0.5 * mean_sq / var;
        entropy += ent;
    }

    // h block: q(h) = N(gamma, I) against the quadratic h-terms of log p~.
    const dwh::Vector shift =
        params.W.transpose() * x_mean + params.U.transpose() * z_mean;
    energy -= q.aspect_mean.dot(shift) -
              0.5 * (q.aspect_mean.squaredNorm() + static_cast<double>(j_dim));
    entropy += 0.5 * static_cast<double>(j_dim) * std::log(2.0 * M_PI * std::exp(1.0));

    return energy - entropy;
}

/// Expected non-interpolated AP of a uniformly random ranking of `total`
/// items containing `relevant` relevant ones, by enumerating permutations of
/// the relevant positions.
inline double expected_random_ap(int total, int relevant) {
    std::vector<int> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), 0);
    double sum = 0.0;
    long count = 0;
    do {
        // Items 0..relevant-1 are the relevant ones; perm maps item -> rank.
        std::vector<int> rel_ranks;
        for (int i = 0; i < relevant; ++i) rel_ranks.push_back(perm[static_cast<std::size_t>(i)]);
        std::sort(rel_ranks.begin(), rel_ranks.end());
        double ap = 0.0;
        for (std::size_t h = 0; h < rel_ranks.size(); ++h) {
            ap += static_cast<double>(h + 1) / static_cast<double>(rel_ranks[h] + 1);
        }
        sum += ap / static_cast<double>(relevant);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum / static_cast<double>(count);
}

}  // namespace support
