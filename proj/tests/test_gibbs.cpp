#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

#include "dwh/enumeration.hpp"
#include "dwh/gibbs.hpp"
#include "dwh/oracle.hpp"
#include "dwh/parallel.hpp"
#include "dwh/trainer.hpp"
#include "support.hpp"

using dwh::GibbsConfig;
using dwh::HarmoniumParams;
using dwh::Index;
using dwh::Observation;
using dwh::Rng;
using dwh::Vector;

namespace {

/// Restores DWH_THREADS on scope exit.
struct ThreadCapGuard {
    std::string saved;
    bool was_set;

    ThreadCapGuard() {
        const char* env = std::getenv("DWH_THREADS");
        was_set = env != nullptr;
        if (was_set) saved = env;
    }
    ~ThreadCapGuard() {
        if (was_set) {
            setenv("DWH_THREADS", saved.c_str(), 1);
        } else {
            unsetenv("DWH_THREADS");
        }
    }
};

}  // namespace

TEST_CASE("sample_hidden draws standard normals at zero coupling") {
    const HarmoniumParams p = dwh::zero_params({2, 1, 2});
    const Observation obs = dwh::random_observation(p.dims, 1);
    Rng rng(2);
    const int n = 100000;
    Vector sum = Vector::Zero(2);
    for (int t = 0; t < n; ++t) sum += dwh::sample_hidden(p, obs, rng);
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(sum[j] / n) < 0.02);
}

TEST_CASE("sample_hidden mean tracks the conditional mean") {
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 3);
    const Observation obs = dwh::random_observation(dims, 4);
    const Vector target = dwh::hidden_conditional_mean(p, obs);
    Rng rng(5);
    const int n = 100000;
    Vector sum = Vector::Zero(dims.latent_dim);
    for (int t = 0; t < n; ++t) sum += dwh::sample_hidden(p, obs, rng);
    for (Index j = 0; j < dims.latent_dim; ++j) {
        CHECK(std::abs(sum[j] / n - target[j]) < 3.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("samplers repeat bit-identically under a fixed seed") {
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 6);
    const Observation obs = dwh::random_observation(dims, 7);
    Rng r1(8), r2(8);
    const Vector h1 = dwh::sample_hidden(p, obs, r1);
    const Vector h2 = dwh::sample_hidden(p, obs, r2);
    CHECK(h1 == h2);
    CHECK(dwh::sample_words(p, h1, r1, 100) == dwh::sample_words(p, h2, r2, 100));
    CHECK(dwh::sample_image(p, h1, r1) == dwh::sample_image(p, h2, r2));
}

TEST_CASE("sample_words matches Poisson mean and equidispersion at rate 2") {
    HarmoniumParams p = dwh::zero_params({1, 0, 1});
    p.alpha[0] = std::log(2.0);
    Rng rng(9);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < n; ++t) {
        const double x = dwh::sample_words(p, Vector::Zero(1), rng, 1000)[0];
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean - 2.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(var - 2.0) < 0.05 * 2.0);
}

TEST_CASE("sample_words degenerates to zero at vanishing rate") {
    HarmoniumParams p = dwh::zero_params({2, 0, 1});
    p.alpha.setConstant(-40.0);
    Rng rng(10);
    for (int t = 0; t < 1000; ++t) {
        CHECK(dwh::sample_words(p, Vector::Zero(1), rng, 100).isZero());
    }
}

TEST_CASE("sample_words clamps at the cap and counts the events") {
    HarmoniumParams p = dwh::zero_params({1, 0, 1});
    p.alpha[0] = std::log(50.0);
    Rng rng(11);
    long clamps = 0;
    for (int t = 0; t < 200; ++t) {
        const Vector x = dwh::sample_words(p, Vector::Zero(1), rng, 5, &clamps);
        CHECK(x[0] <= 5.0);
    }
    CHECK(clamps > 150);  // Poisson(50) under a cap of 5 clamps essentially always
}

TEST_CASE("sample_image matches the conditional variance") {
    HarmoniumParams p = dwh::zero_params({1, 2, 1});
    p.sigma << 0.5, 2.0;
    p.beta << 1.0, -0.5;
    Rng rng(12);
    const int n = 100000;
    Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
    for (int t = 0; t < n; ++t) {
        const Vector z = dwh::sample_image(p, Vector::Zero(1), rng);
        sum += z;
        sum_sq += z.cwiseProduct(z);
    }
    const auto cond = dwh::image_conditional(p, Vector::Zero(1));
    for (Index k = 0; k < 2; ++k) {
        const double mean = sum[k] / n;
        const double var = sum_sq[k] / n - mean * mean;
        CHECK(std::abs(mean - cond.mean[k]) < 3.0 * p.sigma[k] / std::sqrt(static_cast<double>(n)));
        CHECK(std::abs(var - cond.variance[k]) < 0.05 * cond.variance[k]);
    }
}

TEST_CASE("gibbs_sweep at zero coupling ignores the starting observation") {
    const HarmoniumParams p = dwh::zero_params({2, 1, 1});
    const Observation a = dwh::random_observation(p.dims, 13);
    const Observation b = dwh::random_observation(p.dims, 14);
    GibbsConfig config;
    Rng r1(15), r2(15);
    const Observation ra = dwh::gibbs_sweep(p, a, config, r1);
    const Observation rb = dwh::gibbs_sweep(p, b, config, r2);
    CHECK(dwh::dense_counts(ra) == dwh::dense_counts(rb));
    CHECK(ra.histogram == rb.histogram);
}

TEST_CASE("long-run sweep marginal matches the enumerated count marginal") {
    // Single chain, 1e5 sweeps; compare the empirical distribution of the
    // count pair against enumeration of the truncated model.
    const auto dims = dwh::canonical_tiny_dims();
    const auto trunc = dwh::canonical_truncation();
    const HarmoniumParams p = dwh::random_params(dims, 16, 0.2);

    // Enumerated x-marginal: sum the normalized weights over the z-grid.
    std::map<std::pair<long, long>, double> exact;
    support::LogSum norm;
    dwh::for_each_truncated_state(dims, trunc, [&](const Vector& x, const Vector& z) {
        norm.add(dwh::log_marginal_unnorm(p, x, z));
    });
    dwh::for_each_truncated_state(dims, trunc, [&](const Vector& x, const Vector& z) {
        exact[{static_cast<long>(x[0]), static_cast<long>(x[1])}] +=
            std::exp(dwh::log_marginal_unnorm(p, x, z) - norm.value());
    });

    GibbsConfig config;
    config.max_count = trunc.max_count;
    Rng rng(17);
    Observation state = dwh::random_observation(dims, 18);
    for (int t = 0; t < 1000; ++t) state = dwh::gibbs_sweep(p, state, config, rng);
    std::map<std::pair<long, long>, double> empirical;
    const int sweeps = 100000;
    for (int t = 0; t < sweeps; ++t) {
        state = dwh::gibbs_sweep(p, state, config, rng);
        const Vector x = dwh::dense_counts(state);
        empirical[{static_cast<long>(x[0]), static_cast<long>(x[1])}] += 1.0 / sweeps;
    }
    double tv = 0.0;
    for (const auto& [key, prob] : exact) {
        const auto it = empirical.find(key);
        tv += 0.5 * std::abs(prob - (it == empirical.end() ? 0.0 : it->second));
    }
    CHECK(tv < 0.02);
}

TEST_CASE("cd_gradient is bit-identical for a fixed seed and thread count") {
    ThreadCapGuard guard;
    setenv("DWH_THREADS", "2", 1);
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 19);
    const auto batch = dwh::random_batch(dims, 64, 20);
    GibbsConfig config;
    config.seed = 21;
    const dwh::Gradients g1 = dwh::cd_gradient(p, batch, config);
    const dwh::Gradients g2 = dwh::cd_gradient(p, batch, config);
    CHECK(g1.flatten() == g2.flatten());
}

TEST_CASE("cd_gradient is schedule-independent up to float reassociation") {
    ThreadCapGuard guard;
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 22);
    const auto batch = dwh::random_batch(dims, 63, 23);
    GibbsConfig config;
    config.seed = 24;
    setenv("DWH_THREADS", "1", 1);
    const Vector serial = dwh::cd_gradient(p, batch, config).flatten();
    setenv("DWH_THREADS", "4", 1);
    const Vector threaded = dwh::cd_gradient(p, batch, config).flatten();
    CHECK((serial - threaded).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("cd_gradient reproduces the closed-form zero-data rate pull") {
    // W=U=0, all-zero data: reconstruction counts are Poisson(exp alpha), so
    // E[d_alpha] = -exp(alpha).
    HarmoniumParams p = dwh::zero_params({2, 1, 1});
    p.alpha << std::log(1.5), std::log(0.5);
    const Observation zero = dwh::make_observation(Vector::Zero(2), Vector::Zero(1));
    const std::vector<Observation> batch(512, zero);
    Vector mean = Vector::Zero(2);
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
        GibbsConfig config;
        config.seed = static_cast<std::uint64_t>(rep);
        mean += dwh::cd_gradient(p, batch, config).d_alpha;
    }
    mean /= static_cast<double>(reps);
    const double se = 3.0 / std::sqrt(static_cast<double>(512 * reps));
    CHECK(std::abs(mean[0] + 1.5) < se * std::sqrt(1.5));
    CHECK(std::abs(mean[1] + 0.5) < se * std::sqrt(0.5));
}

TEST_CASE("cd_gradient vanishes in expectation on model samples") {
    // Each repetition draws a fresh batch from the model by long Gibbs runs
    // and estimates the gradient once; across repetitions every component
    // must be zero-mean (data and reconstruction share the same marginal).
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 25, 0.15);
    const Index dim = dwh::Gradients::zero(dims).flatten().size();
    Vector sum = Vector::Zero(dim), sum_sq = Vector::Zero(dim);
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep) {
        GibbsConfig burn;
        burn.steps = 30;
        burn.max_count = 50;
        Rng rng(dwh::mix_seed(26, static_cast<std::uint64_t>(rep)));
        std::vector<Observation> batch;
        Observation state = dwh::random_observation(dims, 27);
        for (int n = 0; n < 64; ++n) {
            state = dwh::gibbs_sweep(p, state, burn, rng);
            batch.push_back(state);
        }
        GibbsConfig config;
        config.max_count = 50;
        config.seed = 1000 + static_cast<std::uint64_t>(rep);
        const Vector g = dwh::cd_gradient(p, batch, config).flatten();
        sum += g;
        sum_sq += g.cwiseProduct(g);
    }
    for (Index c = 0; c < dim; ++c) {
        const double mean = sum[c] / reps;
        const double var = (sum_sq[c] / reps - mean * mean) * reps / (reps - 1.0);
        CHECK(std::abs(mean) < 3.0 * std::sqrt(var / reps) + 1e-6);
    }
}

TEST_CASE("clamp accounting is zero on well-conditioned models") {
    const auto dims = dwh::canonical_tiny_dims();
    const HarmoniumParams p = dwh::random_params(dims, 28);
    const auto batch = dwh::random_batch(dims, 32, 29);
    GibbsConfig config;
    config.seed = 30;
    dwh::CdStats stats;
    (void)dwh::cd_gradient(p, batch, config, &stats);
    CHECK(stats.clamp_events == 0);
    CHECK(stats.word_draws == 32 * dims.vocab_size);
    CHECK(stats.clamp_fraction() == 0.0);
}

TEST_CASE("cd_gradient rejects an empty batch") {
    const HarmoniumParams p = dwh::zero_params({1, 1, 1});
    CHECK_THROWS_AS((void)dwh::cd_gradient(p, {}, GibbsConfig{}), dwh::ValidationError);
}
