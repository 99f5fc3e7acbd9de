#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dwh/corpus.hpp"
#include "dwh/gmf.hpp"
#include "dwh/model.hpp"
#include "dwh/types.hpp"

namespace dwh {

struct LatentMatrix {
    Matrix rows;  // one latent vector per observation
    std::vector<std::string> ids;

    Index size() const { return rows.rows(); }
};

/// Latent representation: per-observation conditional mean of the hidden units.
LatentMatrix project(const HarmoniumParams& params, const Corpus& corpus);

/// The no-reduction baseline representation: raw stacked features.
LatentMatrix raw_features(const Corpus& corpus);

struct RankedItem {
    std::string id;
    double score = 0.0;
};

/// Scores non-increasing; equal scores ordered by ascending id.
struct Ranking {
    std::string query_id;
    std::vector<RankedItem> items;
};

/// Cosine-similarity ranking of the index rows against the query. Zero index
/// rows score -1 (sorted last); a zero query is an error.
Ranking retrieve(const Vector& query_latent, const LatentMatrix& index, Index top_n,
                 const std::string& query_id = "");

/// Non-interpolated average precision: mean precision at the ranks of relevant
/// retrieved items, divided by the total relevant count.
double average_precision(const Ranking& ranking, const std::set<std::string>& relevant);

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

/// One point per rank; recall is non-decreasing.
std::vector<PrPoint> precision_recall_curve(const Ranking& ranking,
                                            const std::set<std::string>& relevant);

struct RetrievalEval {
    double mean_ap = 0.0;
    std::vector<std::pair<std::string, double>> per_query;  // (query id, AP)
    std::vector<PrPoint> pr_curve;    // averaged at the 11-point recall grid
    std::vector<std::string> skipped;  // queries whose label has no index support
};

/// Same-label retrieval protocol: each query ranks the whole index; relevance
/// is label equality. Per-query curves are interpolated (max precision at or
/// beyond each recall level) before pointwise averaging.
RetrievalEval retrieval_eval(const LatentMatrix& latents, const std::vector<std::string>& labels,
                             const std::vector<std::string>& query_ids,
                             const std::vector<std::string>& index_ids);

struct AnnotationEval {
    std::vector<Index> top_n;
    std::vector<double> mean_ap;       // aligned with top_n
    std::vector<std::string> skipped;  // empty word sets or diverged solves
};

/// Word-prediction protocol: annotate each observation's histogram, score the
/// ranking against the words present in it (counts > 0), average per cutoff.
AnnotationEval annotation_eval(const HarmoniumParams& params, const Corpus& test,
                               const std::vector<Index>& top_n_grid,
                               const GmfConfig& config = {});

struct ClassifyEval {
    double accuracy = 0.0;
    std::vector<std::string> label_order;  // sorted training labels
    Matrix confusion;                      // rows true, cols predicted
};

/// Nearest-centroid classification in latent space, Euclidean distance,
/// distance ties resolved by label order.
ClassifyEval nearest_centroid_eval(const LatentMatrix& latents,
                                   const std::vector<std::string>& labels,
                                   const std::vector<std::string>& train_ids,
                                   const std::vector<std::string>& test_ids);

struct TopicAspect {
    std::vector<std::pair<std::string, double>> words;      // by coupling weight
    std::vector<std::pair<std::string, double>> documents;  // by latent coordinate
};

struct TopicReport {
    std::vector<TopicAspect> aspects;
};

TopicReport topic_report(const HarmoniumParams& params, const Corpus& corpus, Index top_words,
                         Index top_docs);

std::string format_topic_report(const TopicReport& report);

/// Latent-semantic baseline: rank-limited SVD of the design matrix, latent
/// vectors are left singular vectors scaled by the singular values. Columns
/// past the numerical rank come out zero; the count is written to padded.
LatentMatrix lsi_project(const Corpus& corpus, Index latent_dim, Index* padded = nullptr,
                         std::uint64_t seed = 0);

struct Split {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

/// Deterministic alternating split: even positions train, odd positions test.
Split even_split(const std::vector<std::string>& ids);

}  // namespace dwh
