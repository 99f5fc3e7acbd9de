#include "dwh/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "dwh/enumeration.hpp"
#include "dwh/model.hpp"
#include "dwh/parallel.hpp"
#include "dwh/rng.hpp"
#include "dwh/svd.hpp"

namespace dwh {

namespace {

// Stream index reserved for the epoch shuffler; batch streams count up from 1.
constexpr std::uint64_t kShuffleStream = ~std::uint64_t{0};

void check_config(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
        throw ValidationError("momentum must lie in [0, 1)");
    }
    if (!(config.weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
    if (!(config.projection_margin > 0.0 && config.projection_margin < 1.0)) {
        throw ValidationError("projection_margin must lie in (0, 1)");
    }
    if (!(config.init_scale > 0.0)) throw ValidationError("init_scale must be > 0");
}

const char* non_finite_component(const Gradients& g) {
    if (!g.d_alpha.allFinite()) return "d_alpha";
    if (!g.d_beta.allFinite()) return "d_beta";
    if (!g.d_inv_sigma.allFinite()) return "d_inv_sigma";
    if (!g.d_W.allFinite()) return "d_W";
    return "d_U";
}

}  // namespace

bool operator==(const EpochRecord& a, const EpochRecord& b) {
    return a.grad_norm == b.grad_norm && a.clamp_events == b.clamp_events &&
           a.divergences == b.divergences && a.projections == b.projections &&
           a.objective == b.objective;
}

bool operator==(const TrainReport& a, const TrainReport& b) {
    return a.epochs == b.epochs && a.flagged_observations == b.flagged_observations &&
           a.padded_columns == b.padded_columns;
}

SvdInit svd_init(const Corpus& corpus, Index latent_dim, double scale, std::uint64_t seed) {
    if (corpus.size() < latent_dim) {
        throw ValidationError("svd init needs at least latent_dim observations");
    }
    const TruncatedSvd svd = truncated_svd(design_matrix(corpus), latent_dim, seed);
    SvdInit init;
    init.W = scale * svd.right.topRows(corpus.vocab_size());
    init.U = scale * svd.right.bottomRows(corpus.bin_count());
    init.padded = svd.padded;
    return init;
}

HarmoniumParams init_params(const Corpus& corpus, Index latent_dim, const TrainConfig& config,
                            Index* padded) {
    check_corpus(corpus);
    if (corpus.size() < 1) throw ValidationError("cannot initialize from an empty corpus");
    const Index m = corpus.vocab_size();
    const Index k = corpus.bin_count();
    const double n = static_cast<double>(corpus.size());

    HarmoniumParams params = zero_params({m, k, latent_dim});
    Vector count_mean = Vector::Zero(m);
    for (const Observation& obs : corpus.observations) {
        for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
            count_mean[it.index()] += it.value();
        }
    }
    count_mean /= n;
    params.alpha = (count_mean.array() + 1.0 / n).log();

    if (k > 0) {
        Vector mean = Vector::Zero(k);
        for (const Observation& obs : corpus.observations) mean += obs.histogram;
        mean /= n;
        Vector variance = Vector::Zero(k);
        for (const Observation& obs : corpus.observations) {
            variance += (obs.histogram - mean).array().square().matrix();
        }
        variance /= n;
        params.sigma = variance.array().sqrt().max(1e-2);
    }

    if (padded) *padded = 0;
    if (!config.freeze_couplings) {
        const SvdInit couplings = svd_init(corpus, latent_dim, config.init_scale, config.seed);
        params.W = couplings.W;
        params.U = couplings.U;
        if (padded) *padded = couplings.padded;
    }
    return params;
}

bool project_integrability(HarmoniumParams& params, double margin) {
    check_shapes(params);
    if (!(margin > 0.0 && margin < 1.0)) {
        throw ValidationError("projection margin must lie in (0, 1)");
    }
    if (params.dims.bin_count == 0) return false;
    const double target = margin * params.sigma.array().square().inverse().minCoeff();
    auto smallest = [&params](double factor) {
        HarmoniumParams trial = params;
        trial.U *= factor;
        return min_precision_eigenvalue(trial);
    };
    if (smallest(1.0) >= target) return false;
    double lo = 0.0;
    double hi = 1.0;
    for (int step = 0; step < 40; ++step) {
        const double mid = 0.5 * (lo + hi);
        (smallest(mid) >= target ? lo : hi) = mid;
    }
    params.U *= lo;
    return true;
}

double exact_log_likelihood(const HarmoniumParams& params, const std::vector<Observation>& batch,
                            const TruncationSpec& trunc, double state_budget) {
    if (batch.empty()) throw ValidationError("exact_log_likelihood needs a non-empty batch");
    double total = 0.0;
    for (const Observation& obs : batch) total += log_marginal_unnorm(params, obs);
    return total / static_cast<double>(batch.size()) -
           log_partition_truncated(params, trunc, state_budget);
}

Gradients exact_gradient(const HarmoniumParams& params, const std::vector<Observation>& batch,
                         const TruncationSpec& trunc, double state_budget) {
    check_shapes(params);
    if (batch.empty()) throw ValidationError("exact_gradient needs a non-empty batch");
    const TruncatedMoments moments = truncated_moments(params, trunc, state_budget);
    Gradients g = Gradients::zero(params.dims);
    for (const Observation& obs : batch) add_data_statistics(params, obs, g);
    const double scale = 1.0 / static_cast<double>(batch.size());
    g.d_alpha = scale * g.d_alpha - moments.e_count;
    g.d_beta = scale * g.d_beta - moments.e_bin;
    g.d_W = scale * g.d_W - moments.e_count_shift;
    g.d_U = scale * g.d_U - moments.e_bin_shift;
    g.d_inv_sigma = scale * g.d_inv_sigma +
                    moments.e_bin_sq.cwiseProduct(params.sigma.array().inverse().matrix());
    return g;
}

TrainResult train(const Corpus& corpus, Index latent_dim, const TrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    check_corpus(corpus);
    check_config(config);
    if (corpus.size() == 0) throw ValidationError("training corpus is empty");
    if (latent_dim < 1) throw ValidationError("latent_dim must be >= 1");

    Corpus working = corpus;
    TrainReport report;
    if (config.normalize) report.flagged_observations = normalize_features(working);

    HarmoniumParams params = init_params(working, latent_dim, config, &report.padded_columns);
    if (params.dims.bin_count > 0 && min_precision_eigenvalue(params) <= 0.0) {
        project_integrability(params, config.projection_margin);
    }

    const Index n = working.size();
    const std::vector<Observation>& all = working.observations;
    Gradients velocity = Gradients::zero(params.dims);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    std::uint64_t batch_stream = 0;

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        EpochRecord record;
        Index batches = 0;
        for (Index start = 0; start < n; start += config.batch_size) {
            const Index stop = std::min(n, start + config.batch_size);
            std::vector<Observation> batch;
            batch.reserve(static_cast<std::size_t>(stop - start));
            for (Index i = start; i < stop; ++i) {
                batch.push_back(all[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
            }
            ++batch_stream;

            Gradients grad;
            if (config.method == TrainMethod::cd) {
                GibbsConfig gibbs = config.gibbs;
                gibbs.seed = mix_seed(config.seed, batch_stream);
                CdStats stats;
                grad = cd_gradient(params, batch, gibbs, &stats);
                record.clamp_events += stats.clamp_events;
            } else if (config.method == TrainMethod::gmf) {
                try {
                    grad = gmf_gradient(params, batch, config.gmf);
                } catch (const DivergenceError&) {
                    ++record.divergences;
                    continue;
                }
            } else {
                grad = exact_gradient(params, batch, config.truncation, config.state_budget);
            }
            if (!grad.all_finite()) {
                throw Error("epoch " + std::to_string(epoch) + ": non-finite gradient in " +
                            non_finite_component(grad));
            }
            record.grad_norm += grad.norm();
            ++batches;

            if (config.weight_decay > 0.0) {
                grad.d_W.noalias() -= config.weight_decay * params.W;
                grad.d_U.noalias() -= config.weight_decay * params.U;
            }
            const double m = config.momentum;
            velocity.d_alpha = m * velocity.d_alpha + grad.d_alpha;
            velocity.d_beta = m * velocity.d_beta + grad.d_beta;
            velocity.d_inv_sigma = m * velocity.d_inv_sigma + grad.d_inv_sigma;
            velocity.d_W = m * velocity.d_W + grad.d_W;
            velocity.d_U = m * velocity.d_U + grad.d_U;

            const double lr = config.learning_rate;
            params.alpha += lr * velocity.d_alpha;
            params.beta += lr * velocity.d_beta;
            if (params.dims.bin_count > 0) {
                Vector inv_sigma = params.sigma.array().inverse();
                inv_sigma += lr * velocity.d_inv_sigma;
                inv_sigma = inv_sigma.array().max(kSigmaFloor).min(1.0 / kSigmaFloor);
                params.sigma = inv_sigma.array().inverse();
            }
            if (!config.freeze_couplings) {
                params.W += lr * velocity.d_W;
                params.U += lr * velocity.d_U;
            }

            if (!(params.alpha.allFinite() && params.beta.allFinite() && params.W.allFinite() &&
                  params.U.allFinite())) {
                throw Error("epoch " + std::to_string(epoch) + ": parameters became non-finite");
            }
            if (params.dims.bin_count > 0 && min_precision_eigenvalue(params) <= 0.0) {
                project_integrability(params, config.projection_margin);
                ++record.projections;
            }
        }
        if (batches > 0) record.grad_norm /= static_cast<double>(batches);
        if (config.method == TrainMethod::exact) {
            record.objective =
                exact_log_likelihood(params, all, config.truncation, config.state_budget);
        }
        report.epochs.push_back(record);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(params), std::move(report)};
}

std::vector<Index> default_latent_sweep() {
    return {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
}

}  // namespace dwh
