#include "dwh/corpus.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dwh/rng.hpp"

namespace dwh {

void check_corpus(const Corpus& corpus) {
    const std::size_t n = corpus.observations.size();
    if (corpus.ids.size() != n) throw ValidationError("corpus ids and observations differ in length");
    if (!corpus.labels.empty() && corpus.labels.size() != n) {
        throw ValidationError("corpus labels and observations differ in length");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : corpus.ids) {
        if (!seen.insert(id).second) throw ValidationError("duplicate corpus id: " + id);
    }
    const Index m = corpus.vocab_size();
    const Index k = corpus.bin_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Observation& obs = corpus.observations[i];
        if (obs.word_counts.size() != m || obs.histogram.size() != k) {
            throw ShapeError("observation " + std::to_string(i) + " does not match corpus dims");
        }
        if (!obs.histogram.allFinite()) {
            throw ValidationError("observation " + std::to_string(i) + " has non-finite histogram");
        }
        for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
            const double v = it.value();
            if (!(v >= 0.0) || v != std::floor(v)) {
                throw ValidationError("observation " + std::to_string(i) +
                                      " has a negative or non-integer count");
            }
        }
    }
}

std::vector<Index> normalize_features(Corpus& corpus) {
    std::vector<Index> flagged;
    for (Index i = 0; i < corpus.size(); ++i) {
        Observation& obs = corpus.observations[static_cast<std::size_t>(i)];
        const double text_sum = count_sum(obs);
        const double image_sum = obs.histogram.sum();
        if (text_sum == 0.0 || image_sum == 0.0) {
            flagged.push_back(i);
            continue;
        }
        obs.histogram *= text_sum / image_sum;
    }
    return flagged;
}

Matrix design_matrix(const Corpus& corpus) {
    const Index m = corpus.vocab_size();
    const Index k = corpus.bin_count();
    Matrix design = Matrix::Zero(corpus.size(), m + k);
    for (Index n = 0; n < corpus.size(); ++n) {
        const Observation& obs = corpus.observations[static_cast<std::size_t>(n)];
        for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
            design(n, it.index()) = it.value();
        }
        design.row(n).tail(k) = obs.histogram.transpose();
    }
    return design;
}

Corpus subset(const Corpus& corpus, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < corpus.ids.size(); ++i) position[corpus.ids[i]] = i;
    Corpus out;
    out.vocab = corpus.vocab;
    out.bin_labels = corpus.bin_labels;
    for (const auto& id : ids) {
        const auto hit = position.find(id);
        if (hit == position.end()) throw ValidationError("unknown corpus id: " + id);
        out.ids.push_back(id);
        out.observations.push_back(corpus.observations[hit->second]);
        if (!corpus.labels.empty()) out.labels.push_back(corpus.labels[hit->second]);
    }
    return out;
}

namespace {

void check_spec(const SyntheticSpec& spec) {
    if (spec.clusters.empty()) throw ValidationError("synthetic spec needs at least one cluster");
    if (spec.size < 1) throw ValidationError("synthetic corpus size must be >= 1");
    if (!(spec.noise >= 0.0)) throw ValidationError("synthetic noise must be >= 0");
    const Index m = spec.clusters.front().word_rate.size();
    const Index k = spec.clusters.front().image_mean.size();
    double weight_sum = 0.0;
    for (const ClusterSpec& c : spec.clusters) {
        if (c.word_rate.size() != m || c.image_mean.size() != k) {
            throw ShapeError("synthetic clusters disagree on feature dimensions");
        }
        if (!(c.weight > 0.0)) throw ValidationError("cluster weights must be positive");
        if ((c.word_rate.array() < 0.0).any()) {
            throw ValidationError("cluster word rates must be non-negative");
        }
        weight_sum += c.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw ValidationError("cluster weights must sum to 1");
    }
}

std::string padded_id(Index n, Index total) {
    std::string digits = std::to_string(total - 1);
    std::string num = std::to_string(n);
    return "doc" + std::string(digits.size() - num.size(), '0') + num;
}

}  // namespace

Corpus generate_synthetic(const SyntheticSpec& spec) {
    check_spec(spec);
    const Index m = spec.clusters.front().word_rate.size();
    const Index k = spec.clusters.front().image_mean.size();
    Corpus corpus;
    for (Index i = 0; i < m; ++i) corpus.vocab.push_back("w" + std::to_string(i));
    for (Index i = 0; i < k; ++i) corpus.bin_labels.push_back("bin" + std::to_string(i));
    Rng rng(spec.seed);
    Vector counts(m);
    Vector hist(k);
    for (Index n = 0; n < spec.size; ++n) {
        const double u = rng.uniform();
        std::size_t cluster = spec.clusters.size() - 1;
        double cumulative = 0.0;
        for (std::size_t c = 0; c + 1 < spec.clusters.size(); ++c) {
            cumulative += spec.clusters[c].weight;
            if (u < cumulative) {
                cluster = c;
                break;
            }
        }
        const ClusterSpec& profile = spec.clusters[cluster];
        for (Index i = 0; i < m; ++i) {
            counts[i] = profile.word_rate[i] > 0.0
                            ? static_cast<double>(rng.poisson(profile.word_rate[i]))
                            : 0.0;
        }
        for (Index j = 0; j < k; ++j) {
            hist[j] = profile.image_mean[j] + spec.noise * rng.normal();
        }
        corpus.ids.push_back(padded_id(n, spec.size));
        corpus.observations.push_back(make_observation(counts, hist));
        corpus.labels.push_back(std::to_string(cluster));
    }
    return corpus;
}

SyntheticSpec two_cluster_spec(Index vocab_size, Index bin_count, Index size, double rate,
                               double separation, double noise, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.size = size;
    spec.noise = noise;
    spec.seed = seed;
    for (int c = 0; c < 2; ++c) {
        ClusterSpec cluster;
        cluster.weight = 0.5;
        cluster.word_rate = Vector::Zero(vocab_size);
        cluster.image_mean = Vector::Zero(bin_count);
        const Index word_lo = c == 0 ? 0 : vocab_size / 2;
        const Index word_hi = c == 0 ? vocab_size / 2 : vocab_size;
        for (Index i = word_lo; i < word_hi; ++i) cluster.word_rate[i] = rate;
        // A shared positive baseline keeps every image sum well away from zero,
        // so feature-sum normalization stays a mild per-observation rescale.
        cluster.image_mean = Vector::Constant(bin_count, 1.0);
        const Index bin_lo = c == 0 ? 0 : bin_count / 2;
        const Index bin_hi = c == 0 ? bin_count / 2 : bin_count;
        for (Index i = bin_lo; i < bin_hi; ++i) cluster.image_mean[i] += separation;
        spec.clusters.push_back(std::move(cluster));
    }
    return spec;
}

}  // namespace dwh
