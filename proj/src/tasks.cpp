#include "dwh/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "dwh/svd.hpp"

namespace dwh {

namespace {

std::unordered_map<std::string, Index> row_index(const LatentMatrix& latents) {
    std::unordered_map<std::string, Index> map;
    for (std::size_t i = 0; i < latents.ids.size(); ++i) {
        map[latents.ids[i]] = static_cast<Index>(i);
    }
    return map;
}

Index require_row(const std::unordered_map<std::string, Index>& map, const std::string& id) {
    const auto hit = map.find(id);
    if (hit == map.end()) throw ValidationError("unknown observation id: " + id);
    return hit->second;
}

}  // namespace

LatentMatrix project(const HarmoniumParams& params, const Corpus& corpus) {
    check_corpus(corpus);
    LatentMatrix latents;
    latents.ids = corpus.ids;
    latents.rows = Matrix::Zero(corpus.size(), params.dims.latent_dim);
    for (Index n = 0; n < corpus.size(); ++n) {
        latents.rows.row(n) =
            hidden_conditional_mean(params, corpus.observations[static_cast<std::size_t>(n)])
                .transpose();
    }
    return latents;
}

LatentMatrix raw_features(const Corpus& corpus) {
    check_corpus(corpus);
    return {design_matrix(corpus), corpus.ids};
}

Ranking retrieve(const Vector& query_latent, const LatentMatrix& index, Index top_n,
                 const std::string& query_id) {
    const double query_norm = query_latent.norm();
    if (query_norm == 0.0) throw ValidationError("retrieval query vector is zero");
    if (index.rows.cols() != query_latent.size()) {
        throw ShapeError("query length does not match index width");
    }
    if (top_n < 1) throw ValidationError("retrieve top_n must be >= 1");
    Ranking ranking;
    ranking.query_id = query_id;
    ranking.items.reserve(static_cast<std::size_t>(index.size()));
    for (Index n = 0; n < index.size(); ++n) {
        const double row_norm = index.rows.row(n).norm();
        const double score =
            row_norm == 0.0 ? -1.0 : index.rows.row(n).dot(query_latent) / (row_norm * query_norm);
        ranking.items.push_back({index.ids[static_cast<std::size_t>(n)], score});
    }
    std::sort(ranking.items.begin(), ranking.items.end(),
              [](const RankedItem& a, const RankedItem& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.id < b.id;
              });
    if (static_cast<std::size_t>(top_n) < ranking.items.size()) {
        ranking.items.resize(static_cast<std::size_t>(top_n));
    }
    return ranking;
}

double average_precision(const Ranking& ranking, const std::set<std::string>& relevant) {
    if (relevant.empty()) throw ValidationError("average_precision needs a non-empty relevant set");
    double hits = 0.0;
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < ranking.items.size(); ++r) {
        if (relevant.count(ranking.items[r].id)) {
            hits += 1.0;
            precision_sum += hits / static_cast<double>(r + 1);
        }
    }
    return precision_sum / static_cast<double>(relevant.size());
}

std::vector<PrPoint> precision_recall_curve(const Ranking& ranking,
                                            const std::set<std::string>& relevant) {
    if (relevant.empty()) {
        throw ValidationError("precision_recall_curve needs a non-empty relevant set");
    }
    std::vector<PrPoint> curve;
    curve.reserve(ranking.items.size());
    double hits = 0.0;
    for (std::size_t r = 0; r < ranking.items.size(); ++r) {
        if (relevant.count(ranking.items[r].id)) hits += 1.0;
        curve.push_back({hits / static_cast<double>(relevant.size()),
                         hits / static_cast<double>(r + 1)});
    }
    return curve;
}

RetrievalEval retrieval_eval(const LatentMatrix& latents, const std::vector<std::string>& labels,
                             const std::vector<std::string>& query_ids,
                             const std::vector<std::string>& index_ids) {
    if (labels.size() != latents.ids.size()) {
        throw ShapeError("labels do not align with the latent matrix");
    }
    const auto rows = row_index(latents);
    LatentMatrix index;
    index.rows = Matrix::Zero(static_cast<Index>(index_ids.size()), latents.rows.cols());
    index.ids = index_ids;
    std::unordered_map<std::string, std::string> label_of;
    std::unordered_map<std::string, std::size_t> index_label_count;
    for (std::size_t i = 0; i < latents.ids.size(); ++i) label_of[latents.ids[i]] = labels[i];
    for (std::size_t i = 0; i < index_ids.size(); ++i) {
        const Index row = require_row(rows, index_ids[i]);
        index.rows.row(static_cast<Index>(i)) = latents.rows.row(row);
        ++index_label_count[labels[static_cast<std::size_t>(row)]];
    }

    const Index grid_points = 11;
    RetrievalEval eval;
    Vector grid_sum = Vector::Zero(grid_points);
    for (const std::string& query : query_ids) {
        const Index row = require_row(rows, query);
        const std::string& label = label_of[query];
        if (index_label_count[label] == 0) {
            eval.skipped.push_back(query);
            continue;
        }
        std::set<std::string> relevant;
        for (std::size_t i = 0; i < index_ids.size(); ++i) {
            if (label_of[index_ids[i]] == label) relevant.insert(index_ids[i]);
        }
        const Ranking ranking =
            retrieve(latents.rows.row(row).transpose(), index, index.size(), query);
        eval.per_query.emplace_back(query, average_precision(ranking, relevant));
        const auto curve = precision_recall_curve(ranking, relevant);
        for (Index gp = 0; gp < grid_points; ++gp) {
            const double level = static_cast<double>(gp) / static_cast<double>(grid_points - 1);
            double best = 0.0;
            for (const PrPoint& point : curve) {
                if (point.recall >= level - 1e-12) best = std::max(best, point.precision);
            }
            grid_sum[gp] += best;
        }
    }
    if (!eval.per_query.empty()) {
        double total = 0.0;
        for (const auto& entry : eval.per_query) total += entry.second;
        eval.mean_ap = total / static_cast<double>(eval.per_query.size());
        for (Index gp = 0; gp < grid_points; ++gp) {
            eval.pr_curve.push_back(
                {static_cast<double>(gp) / static_cast<double>(grid_points - 1),
                 grid_sum[gp] / static_cast<double>(eval.per_query.size())});
        }
    }
    return eval;
}

AnnotationEval annotation_eval(const HarmoniumParams& params, const Corpus& test,
                               const std::vector<Index>& top_n_grid, const GmfConfig& config) {
    check_corpus(test);
    if (top_n_grid.empty()) throw ValidationError("annotation_eval needs at least one cutoff");
    for (Index cutoff : top_n_grid) {
        if (cutoff < 1 || cutoff > params.dims.vocab_size) {
            throw ValidationError("annotation cutoff must lie in [1, vocab_size]");
        }
    }
    AnnotationEval eval;
    eval.top_n = top_n_grid;
    std::vector<double> ap_sum(top_n_grid.size(), 0.0);
    Index evaluated = 0;
    for (Index n = 0; n < test.size(); ++n) {
        const Observation& obs = test.observations[static_cast<std::size_t>(n)];
        std::vector<bool> truth(static_cast<std::size_t>(params.dims.vocab_size), false);
        Index truth_count = 0;
        for (SparseVector::InnerIterator it(obs.word_counts); it; ++it) {
            if (it.value() > 0.0) {
                truth[static_cast<std::size_t>(it.index())] = true;
                ++truth_count;
            }
        }
        if (truth_count == 0) {
            eval.skipped.push_back(test.ids[static_cast<std::size_t>(n)]);
            continue;
        }
        std::vector<WordScore> ranked;
        try {
            ranked = annotate(params, obs.histogram, params.dims.vocab_size, config);
        } catch (const DivergenceError&) {
            eval.skipped.push_back(test.ids[static_cast<std::size_t>(n)]);
            continue;
        } catch (const OverflowError&) {
            // A runaway word mean is divergence caught by the exponent cap.
            eval.skipped.push_back(test.ids[static_cast<std::size_t>(n)]);
            continue;
        }
        for (std::size_t g = 0; g < top_n_grid.size(); ++g) {
            double hits = 0.0;
            double precision_sum = 0.0;
            const std::size_t cutoff = static_cast<std::size_t>(top_n_grid[g]);
            for (std::size_t r = 0; r < cutoff; ++r) {
                if (truth[static_cast<std::size_t>(ranked[r].word)]) {
                    hits += 1.0;
                    precision_sum += hits / static_cast<double>(r + 1);
                }
            }
            ap_sum[g] += precision_sum / static_cast<double>(truth_count);
        }
        ++evaluated;
    }
    for (double sum : ap_sum) {
        eval.mean_ap.push_back(evaluated > 0 ? sum / static_cast<double>(evaluated) : 0.0);
    }
    return eval;
}

ClassifyEval nearest_centroid_eval(const LatentMatrix& latents,
                                   const std::vector<std::string>& labels,
                                   const std::vector<std::string>& train_ids,
                                   const std::vector<std::string>& test_ids) {
    if (labels.size() != latents.ids.size()) {
        throw ShapeError("labels do not align with the latent matrix");
    }
    if (train_ids.empty() || test_ids.empty()) {
        throw ValidationError("classification split needs non-empty train and test sets");
    }
    const auto rows = row_index(latents);
    std::unordered_map<std::string, std::string> label_of;
    for (std::size_t i = 0; i < latents.ids.size(); ++i) label_of[latents.ids[i]] = labels[i];

    std::map<std::string, std::pair<Vector, double>> accum;
    for (const std::string& id : train_ids) {
        const Index row = require_row(rows, id);
        auto& slot = accum[label_of[id]];
        if (slot.second == 0.0) slot.first = Vector::Zero(latents.rows.cols());
        slot.first += latents.rows.row(row).transpose();
        slot.second += 1.0;
    }
    ClassifyEval eval;
    std::vector<Vector> centroids;
    std::unordered_map<std::string, Index> label_pos;
    for (auto& [label, slot] : accum) {
        label_pos[label] = static_cast<Index>(eval.label_order.size());
        eval.label_order.push_back(label);
        centroids.push_back(slot.first / slot.second);
    }
    const Index classes = static_cast<Index>(eval.label_order.size());
    eval.confusion = Matrix::Zero(classes, classes);

    Index correct = 0;
    for (const std::string& id : test_ids) {
        const Index row = require_row(rows, id);
        const auto truth = label_pos.find(label_of[id]);
        if (truth == label_pos.end()) {
            throw ValidationError("test label '" + label_of[id] + "' unseen in training split");
        }
        Index best = 0;
        double best_distance = (latents.rows.row(row).transpose() - centroids[0]).squaredNorm();
        for (Index c = 1; c < classes; ++c) {
            const double distance =
                (latents.rows.row(row).transpose() - centroids[static_cast<std::size_t>(c)])
                    .squaredNorm();
            if (distance < best_distance) {
                best_distance = distance;
                best = c;
            }
        }
        eval.confusion(truth->second, best) += 1.0;
        if (best == truth->second) ++correct;
    }
    eval.accuracy = static_cast<double>(correct) / static_cast<double>(test_ids.size());
    return eval;
}

TopicReport topic_report(const HarmoniumParams& params, const Corpus& corpus, Index top_words,
                         Index top_docs) {
    check_corpus(corpus);
    if (corpus.vocab_size() != params.dims.vocab_size ||
        corpus.bin_count() != params.dims.bin_count) {
        throw ShapeError("corpus does not match model dims");
    }
    const LatentMatrix latents = project(params, corpus);
    const Index words = std::min(top_words, params.dims.vocab_size);
    const Index docs = std::min(top_docs, corpus.size());
    TopicReport report;
    for (Index j = 0; j < params.dims.latent_dim; ++j) {
        TopicAspect aspect;
        std::vector<Index> word_order(static_cast<std::size_t>(params.dims.vocab_size));
        std::iota(word_order.begin(), word_order.end(), Index{0});
        std::sort(word_order.begin(), word_order.end(), [&](Index a, Index b) {
            if (params.W(a, j) != params.W(b, j)) return params.W(a, j) > params.W(b, j);
            return a < b;
        });
        for (Index r = 0; r < words; ++r) {
            const Index w = word_order[static_cast<std::size_t>(r)];
            aspect.words.emplace_back(corpus.vocab[static_cast<std::size_t>(w)], params.W(w, j));
        }
        std::vector<Index> doc_order(static_cast<std::size_t>(corpus.size()));
        std::iota(doc_order.begin(), doc_order.end(), Index{0});
        std::sort(doc_order.begin(), doc_order.end(), [&](Index a, Index b) {
            if (latents.rows(a, j) != latents.rows(b, j)) {
                return latents.rows(a, j) > latents.rows(b, j);
            }
            return latents.ids[static_cast<std::size_t>(a)] < latents.ids[static_cast<std::size_t>(b)];
        });
        for (Index r = 0; r < docs; ++r) {
            const Index d = doc_order[static_cast<std::size_t>(r)];
            aspect.documents.emplace_back(latents.ids[static_cast<std::size_t>(d)],
                                          latents.rows(d, j));
        }
        report.aspects.push_back(std::move(aspect));
    }
    return report;
}

std::string format_topic_report(const TopicReport& report) {
    std::ostringstream out;
    for (std::size_t j = 0; j < report.aspects.size(); ++j) {
        out << "aspect " << j << "\n  words:";
        for (const auto& [word, weight] : report.aspects[j].words) {
            out << " " << word << "(" << weight << ")";
        }
        out << "\n  documents:";
        for (const auto& [id, value] : report.aspects[j].documents) {
            out << " " << id << "(" << value << ")";
        }
        out << "\n";
    }
    return out.str();
}

LatentMatrix lsi_project(const Corpus& corpus, Index latent_dim, Index* padded,
                         std::uint64_t seed) {
    check_corpus(corpus);
    if (corpus.size() < 1) throw ValidationError("lsi needs a non-empty corpus");
    const TruncatedSvd svd = truncated_svd(design_matrix(corpus), latent_dim, seed);
    if (padded) *padded = svd.padded;
    LatentMatrix latents;
    latents.ids = corpus.ids;
    latents.rows = svd.left * svd.singular.asDiagonal();
    return latents;
}

Split even_split(const std::vector<std::string>& ids) {
    Split split;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        (i % 2 == 0 ? split.train_ids : split.test_ids).push_back(ids[i]);
    }
    return split;
}

}  // namespace dwh
