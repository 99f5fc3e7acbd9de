#include "dwh/enumeration.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dwh/model.hpp"

namespace dwh {

TruncatedMoments truncated_moments(const HarmoniumParams& params, const TruncationSpec& trunc,
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
    const auto& dims = params.dims;
    double max_log = -std::numeric_limits<double>::infinity();
    for_each_truncated_state(dims, trunc, [&](const Vector& x, const Vector& z) {
        max_log = std::max(max_log, log_marginal_unnorm(params, x, z));
    });

    TruncatedMoments m;
    m.e_count = Vector::Zero(dims.vocab_size);
    m.e_bin = Vector::Zero(dims.bin_count);
    m.e_bin_sq = Vector::Zero(dims.bin_count);
    m.e_count_shift = Matrix::Zero(dims.vocab_size, dims.latent_dim);
    m.e_bin_shift = Matrix::Zero(dims.bin_count, dims.latent_dim);
    double total = 0.0;
    for_each_truncated_state(dims, trunc, [&](const Vector& x, const Vector& z) {
        const double w = std::exp(log_marginal_unnorm(params, x, z) - max_log);
        total += w;
        const Vector shift = hidden_conditional_mean(params, x, z);
        m.e_count.noalias() += w * x;
        m.e_bin.noalias() += w * z;
        m.e_bin_sq.noalias() += w * z.array().square().matrix();
        m.e_count_shift.noalias() += w * x * shift.transpose();
        m.e_bin_shift.noalias() += w * z * shift.transpose();
    });
    m.e_count /= total;
    m.e_bin /= total;
    m.e_bin_sq /= total;
    m.e_count_shift /= total;
    m.e_bin_shift /= total;
    m.log_partition = max_log + std::log(total);
    if (dims.bin_count > 0) {
        m.log_partition += static_cast<double>(dims.bin_count) * std::log(trunc.grid_step());
    }
    return m;
}

}  // namespace dwh
