#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "dwh/model.hpp"
#include "dwh/oracle.hpp"
#include "dwh/rng.hpp"
#include "dwh/svd.hpp"
#include "dwh/tasks.hpp"
#include "support.hpp"

using dwh::Corpus;
using dwh::HarmoniumParams;
using dwh::Index;
using dwh::LatentMatrix;
using dwh::Matrix;
using dwh::Ranking;
using dwh::Vector;

namespace {

Corpus labeled_corpus() {
    Corpus corpus;
    corpus.vocab = {"a", "b", "c"};
    corpus.bin_labels = {"b0", "b1"};
    Vector x0(3), x1(3), z0(2), z1(2);
    x0 << 1, 0, 2;
    z0 << 0.5, -1.0;
    x1 << 0, 3, 0;
    z1 << 1.0, 0.25;
    corpus.ids = {"d0", "d1"};
    corpus.observations = {dwh::make_observation(x0, z0), dwh::make_observation(x1, z1)};
    corpus.labels = {"A", "B"};
    return corpus;
}

Ranking as_ranking(const std::vector<std::string>& ids) {
    Ranking ranking;
    double score = static_cast<double>(ids.size());
    for (const auto& id : ids) ranking.items.push_back({id, score--});
    return ranking;
}

LatentMatrix two_label_latents() {
    LatentMatrix latents;
    latents.ids = {"a0", "a1", "b0", "b1"};
    latents.rows = Matrix::Zero(4, 2);
    latents.rows << 1, 0, 2, 0, 0, 1, 0, 3;  // A along the first axis, B the second
    return latents;
}

const std::vector<std::string> kTwoLabels{"A", "A", "B", "B"};

}  // namespace

TEST_CASE("project applies the hidden conditional mean row by row") {
    const Corpus corpus = labeled_corpus();
    const HarmoniumParams params = dwh::random_params({3, 2, 2}, 41);
    const LatentMatrix latents = dwh::project(params, corpus);
    REQUIRE(latents.size() == 2);
    CHECK(latents.ids == corpus.ids);
    for (Index n = 0; n < 2; ++n) {
        const Vector expected =
            dwh::hidden_conditional_mean(params, corpus.observations[static_cast<std::size_t>(n)]);
        CHECK((latents.rows.row(n).transpose() - expected).lpNorm<Eigen::Infinity>() == 0.0);
    }
    const HarmoniumParams decoupled = dwh::zero_params({3, 2, 2});
    CHECK(dwh::project(decoupled, corpus).rows.isZero());
}

TEST_CASE("raw_features returns the stacked design matrix") {
    const Corpus corpus = labeled_corpus();
    const LatentMatrix raw = dwh::raw_features(corpus);
    CHECK(raw.ids == corpus.ids);
    CHECK(raw.rows == dwh::design_matrix(corpus));
}

TEST_CASE("retrieve ranks by cosine similarity") {
    LatentMatrix index;
    index.ids = {"match", "anti", "orthogonal", "empty"};
    index.rows = Matrix::Zero(4, 2);
    index.rows << 2, 0, -1, 0, 0, 5, 0, 0;
    Vector query(2);
    query << 1, 0;

    const Ranking ranking = dwh::retrieve(query, index, 4, "q");
    CHECK(ranking.query_id == "q");
    REQUIRE(ranking.items.size() == 4);
    CHECK(ranking.items[0].id == "match");
    CHECK(ranking.items[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ranking.items[1].id == "orthogonal");
    CHECK(ranking.items[1].score == 0.0);
    // Zero rows score -1 and sort after every real similarity.
    CHECK(ranking.items[2].id == "anti");
    CHECK(ranking.items[2].score == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ranking.items[3].id == "empty");
    CHECK(ranking.items[3].score == -1.0);

    SUBCASE("scores are scale invariant") {
        const Ranking scaled = dwh::retrieve(10.0 * query, index, 4, "q");
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(scaled.items[i].id == ranking.items[i].id);
            CHECK(scaled.items[i].score == doctest::Approx(ranking.items[i].score).epsilon(1e-12));
        }
    }
    SUBCASE("top_n truncates after sorting") {
        const Ranking top = dwh::retrieve(query, index, 2, "q");
        REQUIRE(top.items.size() == 2);
        CHECK(top.items[1].id == "orthogonal");
    }
    SUBCASE("score ties order by ascending id") {
        LatentMatrix tied;
        tied.ids = {"zz", "aa"};
        tied.rows = Matrix::Zero(2, 2);
        tied.rows << 3, 0, 3, 0;
        const Ranking tie = dwh::retrieve(query, tied, 2);
        CHECK(tie.items[0].id == "aa");
        CHECK(tie.items[1].id == "zz");
    }
    SUBCASE("invalid queries are rejected") {
        CHECK_THROWS_AS((void)dwh::retrieve(Vector::Zero(2), index, 2), dwh::ValidationError);
        CHECK_THROWS_AS((void)dwh::retrieve(Vector::Ones(3), index, 2), dwh::ShapeError);
        CHECK_THROWS_AS((void)dwh::retrieve(query, index, 0), dwh::ValidationError);
    }
}

TEST_CASE("average precision on the worked four-item ranking") {
    const Ranking ranking = as_ranking({"r1", "n1", "r2", "n2"});
    const double ap = dwh::average_precision(ranking, {"r1", "r2"});
    CHECK(ap == (1.0 + 2.0 / 3.0) / 2.0);  // 0.8333...

    // Relevant items never retrieved still count in the denominator.
    CHECK(dwh::average_precision(ranking, {"r1", "missing"}) == 0.5);
    CHECK_THROWS_AS((void)dwh::average_precision(ranking, {}), dwh::ValidationError);
}

TEST_CASE("random rankings average to the enumerated expected precision") {
    const int total = 6, relevant = 2;
    const double expected = support::expected_random_ap(total, relevant);
    std::vector<std::string> ids;
    for (int i = 0; i < total; ++i) ids.push_back("i" + std::to_string(i));
    const std::set<std::string> truth{"i0", "i1"};
    dwh::Rng rng(29);
    double sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::string> order = ids;
        dwh::shuffle(order, rng);
        sum += dwh::average_precision(as_ranking(order), truth);
    }
    CHECK(std::abs(sum / trials - expected) < 0.01);
}

TEST_CASE("precision-recall curve walks the ranking") {
    const Ranking ranking = as_ranking({"r1", "n1", "r2"});
    const auto curve = dwh::precision_recall_curve(ranking, {"r1", "r2"});
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].recall == 0.5);
    CHECK(curve[0].precision == 1.0);
    CHECK(curve[1].recall == 0.5);
    CHECK(curve[1].precision == 0.5);
    CHECK(curve[2].recall == 1.0);
    CHECK(curve[2].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].recall >= curve[i - 1].recall);
}

TEST_CASE("self-retrieval over separable labels is perfect") {
    const LatentMatrix latents = two_label_latents();
    const auto eval =
        dwh::retrieval_eval(latents, kTwoLabels, latents.ids, latents.ids);
    CHECK(eval.mean_ap == 1.0);
    CHECK(eval.skipped.empty());
    REQUIRE(eval.per_query.size() == 4);
    for (const auto& [id, ap] : eval.per_query) CHECK(ap == 1.0);
    REQUIRE(eval.pr_curve.size() == 11);
    CHECK(eval.pr_curve.front().recall == 0.0);
    CHECK(eval.pr_curve.back().recall == 1.0);
    for (const auto& point : eval.pr_curve) CHECK(point.precision == 1.0);
}

TEST_CASE("queries without same-label index support are skipped") {
    LatentMatrix latents = two_label_latents();
    latents.ids.push_back("c0");
    latents.rows.conservativeResize(5, 2);
    latents.rows.row(4) << 1, 1;
    std::vector<std::string> labels = kTwoLabels;
    labels.push_back("C");

    const auto eval = dwh::retrieval_eval(latents, labels, {"a0", "c0"}, {"a1", "b1"});
    REQUIRE(eval.skipped.size() == 1);
    CHECK(eval.skipped[0] == "c0");
    REQUIRE(eval.per_query.size() == 1);
    CHECK(eval.per_query[0].first == "a0");
    CHECK(eval.mean_ap == 1.0);

    CHECK_THROWS_AS(
        (void)dwh::retrieval_eval(latents, kTwoLabels, {"a0"}, {"a1"}),  // labels misaligned
        dwh::ShapeError);
    CHECK_THROWS_AS((void)dwh::retrieval_eval(latents, labels, {"nope"}, {"a1"}),
                    dwh::ValidationError);
}

TEST_CASE("annotation evaluation scores word recovery against the bias ranking") {
    HarmoniumParams params = dwh::zero_params({3, 1, 1});
    params.alpha << 0.1, 0.5, -0.2;  // ranking: b, a, c

    Corpus test;
    test.vocab = {"a", "b", "c"};
    test.bin_labels = {"b0"};
    Vector xa(3), xb(3), empty(3), z(1);
    xa << 1, 0, 0;
    xb << 0, 2, 1;
    empty.setZero();
    z << 0.4;
    test.ids = {"docA", "docB", "docE"};
    test.observations = {dwh::make_observation(xa, z), dwh::make_observation(xb, z),
                         dwh::make_observation(empty, z)};

    const auto eval = dwh::annotation_eval(params, test, {1, 3});
    REQUIRE(eval.top_n == std::vector<Index>{1, 3});
    REQUIRE(eval.skipped.size() == 1);
    CHECK(eval.skipped[0] == "docE");
    REQUIRE(eval.mean_ap.size() == 2);
    // docA: {a} found at rank 2 -> 1/2. docB: {b, c} at ranks 1, 3 -> (1 + 2/3)/2.
    CHECK(eval.mean_ap[0] == doctest::Approx((0.0 + 0.5) / 2.0).epsilon(1e-12));
    CHECK(eval.mean_ap[1] ==
          doctest::Approx((0.5 + (1.0 + 2.0 / 3.0) / 2.0) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)dwh::annotation_eval(params, test, {}), dwh::ValidationError);
    CHECK_THROWS_AS((void)dwh::annotation_eval(params, test, {4}), dwh::ValidationError);
    CHECK_THROWS_AS((void)dwh::annotation_eval(params, test, {0}), dwh::ValidationError);
}

TEST_CASE("diverging annotation solves are skipped, not fatal") {
    // The histogram block is clamped during annotation, so the failure mode is
    // the word loop blowing through the exponent cap.
    HarmoniumParams params = dwh::zero_params({1, 1, 1});
    params.alpha[0] = 2.0;
    params.W(0, 0) = 1.6;
    params.U(0, 0) = 0.3;

    Corpus test;
    test.vocab = {"a"};
    test.bin_labels = {"b0"};
    Vector x(1), z(1);
    x << 1;
    z << 0.5;
    test.ids = {"doc"};
    test.observations = {dwh::make_observation(x, z)};

    const auto eval = dwh::annotation_eval(params, test, {1});
    REQUIRE(eval.skipped.size() == 1);
    CHECK(eval.skipped[0] == "doc");
    CHECK(eval.mean_ap[0] == 0.0);
}

TEST_CASE("nearest centroid classification with hand-set centroids") {
    LatentMatrix latents;
    latents.ids = {"t0", "t1", "t2", "t3", "s0", "s1", "s2"};
    latents.rows = Matrix::Zero(7, 1);
    latents.rows << 0.0, 0.2, 1.0, 1.2, 0.05, 1.4, 0.9;
    const std::vector<std::string> labels{"A", "A", "B", "B", "A", "B", "A"};

    const auto eval = dwh::nearest_centroid_eval(latents, labels, {"t0", "t1", "t2", "t3"},
                                                 {"s0", "s1", "s2"});
    // Centroids: A at 0.1, B at 1.1; s2 (true A at 0.9) lands on B.
    CHECK(eval.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    REQUIRE(eval.label_order == std::vector<std::string>{"A", "B"});
    CHECK(eval.confusion(0, 0) == 1.0);
    CHECK(eval.confusion(0, 1) == 1.0);
    CHECK(eval.confusion(1, 1) == 1.0);
    CHECK(eval.confusion(1, 0) == 0.0);

    SUBCASE("distance ties resolve to the first label in order") {
        LatentMatrix tied = latents;
        tied.rows(4, 0) = 0.6;  // equidistant from both centroids
        const auto tie_eval =
            dwh::nearest_centroid_eval(tied, labels, {"t0", "t1", "t2", "t3"}, {"s0"});
        CHECK(tie_eval.confusion(0, 0) == 1.0);
    }
    SUBCASE("unseen test labels are an error") {
        std::vector<std::string> with_c = labels;
        with_c[4] = "C";
        CHECK_THROWS_AS((void)dwh::nearest_centroid_eval(latents, with_c, {"t0", "t2"}, {"s0"}),
                        dwh::ValidationError);
    }
    SUBCASE("empty splits are an error") {
        CHECK_THROWS_AS((void)dwh::nearest_centroid_eval(latents, labels, {}, {"s0"}),
                        dwh::ValidationError);
    }
}

TEST_CASE("topic report orders words by coupling weight and documents by latent value") {
    Corpus corpus = labeled_corpus();
    HarmoniumParams params = dwh::zero_params({3, 2, 2});
    params.W << 0.5, 0.2, -0.1, 0.1, 0.9, 0.2;  // column 1 ties "a" with "c"

    const auto report = dwh::topic_report(params, corpus, 2, 2);
    REQUIRE(report.aspects.size() == 2);
    CHECK(report.aspects[0].words[0].first == "c");  // W(2,0) = 0.9
    CHECK(report.aspects[0].words[0].second == 0.9);
    CHECK(report.aspects[0].words[1].first == "a");
    // Tie in column 1 between a (0.2) and c (0.2): lower index first.
    CHECK(report.aspects[1].words[0].first == "a");
    CHECK(report.aspects[1].words[1].first == "c");

    // Document ordering matches the projected coordinate.
    const LatentMatrix latents = dwh::project(params, corpus);
    for (Index j = 0; j < 2; ++j) {
        const auto& docs = report.aspects[static_cast<std::size_t>(j)].documents;
        REQUIRE(docs.size() == 2);
        CHECK(docs[0].second >= docs[1].second);
        const Index top_row = docs[0].first == "d0" ? 0 : 1;
        CHECK(docs[0].second == latents.rows(top_row, j));
    }

    const std::string text = dwh::format_topic_report(report);
    CHECK(text.find("aspect 0") != std::string::npos);
    CHECK(text.find("aspect 1") != std::string::npos);
    CHECK(text.find('c') != std::string::npos);

    Corpus mismatched = corpus;
    mismatched.vocab.push_back("d");
    CHECK_THROWS_AS((void)dwh::topic_report(params, mismatched, 2, 2), dwh::ShapeError);
}

TEST_CASE("latent-semantic baseline scales left singular vectors") {
    const Corpus corpus = labeled_corpus();
    Index padded = -1;
    const LatentMatrix lsi = dwh::lsi_project(corpus, 2, &padded, 3);
    CHECK(padded == 0);
    CHECK(lsi.ids == corpus.ids);
    const auto svd = dwh::truncated_svd(dwh::design_matrix(corpus), 2, 3);
    CHECK(lsi.rows == svd.left * svd.singular.asDiagonal());

    Corpus duplicated = corpus;
    duplicated.observations[1] = duplicated.observations[0];
    const LatentMatrix rank1 = dwh::lsi_project(duplicated, 2, &padded, 3);
    CHECK(padded == 1);
    CHECK(rank1.rows.col(1).isZero());
}

TEST_CASE("even split alternates train and test positions") {
    const auto split = dwh::even_split({"a", "b", "c", "d", "e"});
    CHECK(split.train_ids == std::vector<std::string>{"a", "c", "e"});
    CHECK(split.test_ids == std::vector<std::string>{"b", "d"});
    const auto empty = dwh::even_split({});
    CHECK(empty.train_ids.empty());
    CHECK(empty.test_ids.empty());
}
