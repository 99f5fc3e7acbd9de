#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwh/types.hpp"

namespace dwh {

/// Observation collection plus vocabulary, bin labels, and optional
/// per-observation category labels (empty vector = unlabeled corpus).
struct Corpus {
    std::vector<std::string> ids;
    std::vector<Observation> observations;
    std::vector<std::string> vocab;
    std::vector<std::string> bin_labels;
    std::vector<std::string> labels;

    Index size() const { return static_cast<Index>(observations.size()); }
    Index vocab_size() const { return static_cast<Index>(vocab.size()); }
    Index bin_count() const { return static_cast<Index>(bin_labels.size()); }
};

/// Throws on inconsistent parallel lists, duplicate ids, shape mismatches, or
/// negative / non-integer counts.
void check_corpus(const Corpus& corpus);

/// Rescales each histogram so its entries sum to the observation's total word
/// count. Observations with zero word mass, or zero histogram mass against
/// nonzero word mass, are left unscaled; their indices are returned.
std::vector<Index> normalize_features(Corpus& corpus);

/// Dense N x (M + K) stacked feature matrix [X | Z], the shared input of the
/// coupling initialization and the latent-semantic baseline.
Matrix design_matrix(const Corpus& corpus);

/// Sub-corpus containing the given ids, in the given order.
Corpus subset(const Corpus& corpus, const std::vector<std::string>& ids);

struct ClusterSpec {
    Vector word_rate;   // length M, non-negative
    Vector image_mean;  // length K
    double weight = 1.0;
};

struct SyntheticSpec {
    std::vector<ClusterSpec> clusters;  // weights positive, summing to 1
    Index size = 0;
    double noise = 1.0;  // image noise standard deviation
    std::uint64_t seed = 0;
};

/// Directed generator: draw a cluster, then counts x_i ~ Poisson(rate_i) and
/// histogram z ~ N(mean, noise^2 I). Deliberately not the harmonium's own
/// generative process, so recovery tests are not self-fulfilling. Labels are
/// the cluster indices as strings.
Corpus generate_synthetic(const SyntheticSpec& spec);

/// Standard recovery benchmark: two equal-weight clusters with disjoint word
/// supports (first/second half of the vocabulary at the given rate) and image
/// means of 1 everywhere plus `separation` on the cluster's half of the bins.
SyntheticSpec two_cluster_spec(Index vocab_size, Index bin_count, Index size, double rate,
                               double separation, double noise, std::uint64_t seed);

}  // namespace dwh
