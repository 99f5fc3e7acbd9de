#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dwh/io.hpp"
#include "dwh/model.hpp"
#include "dwh/oracle.hpp"
#include "dwh/tasks.hpp"
#include "dwh/trainer.hpp"

namespace {

using dwh::Index;

std::vector<std::string> read_id_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dwh::Error("cannot open " + path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

std::vector<std::string> read_vocab_file(const std::string& path) {
    return read_id_file(path);
}

dwh::Corpus load_input(const std::string& text, const std::string& images,
                       const std::string& labels, bool normalize) {
    dwh::Corpus corpus = dwh::load_corpus(text, images, labels);
    if (normalize) dwh::normalize_features(corpus);
    return corpus;
}

void save_train_report(const dwh::TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw dwh::Error("cannot write " + path);
    out << "epoch\tgrad_norm\tclamp_events\tdivergences\tprojections\tobjective\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const auto& rec = report.epochs[e];
        out << e << '\t' << dwh::format_double(rec.grad_norm) << '\t' << rec.clamp_events << '\t'
            << rec.divergences << '\t' << rec.projections << '\t'
            << dwh::format_double(rec.objective) << '\n';
    }
}

struct CorpusArgs {
    std::string text;
    std::string images;
    std::string labels;
    bool no_normalize = false;

    void attach(CLI::App* cmd, bool labels_required = false) {
        cmd->add_option("--text", text, "text corpus file")->required();
        cmd->add_option("--images", images, "image feature file");
        auto* opt = cmd->add_option("--labels", labels, "category label file");
        if (labels_required) opt->required();
        cmd->add_flag("--no-normalize", no_normalize,
                      "skip per-observation feature-sum normalization");
    }

    dwh::Corpus load() const { return load_input(text, images, labels, !no_normalize); }
};

int run(int argc, char** argv) {
    CLI::App app{"dual-wing harmonium toolkit: training, retrieval, annotation"};
    app.require_subcommand(1);
    int exit_code = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic two-wing corpus");
    std::string synth_prefix;
    std::string synth_spec_path;
    Index synth_n = 400, synth_vocab = 50, synth_bins = 10;
    double synth_rate = 0.5, synth_separation = 0.3, synth_noise = 0.3;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out-prefix", synth_prefix, "output prefix (.text/.image/.labels)")
        ->required();
    synth->add_option("--spec", synth_spec_path, "JSON cluster spec (overrides the flags)");
    synth->add_option("--n", synth_n, "corpus size");
    synth->add_option("--vocab", synth_vocab, "vocabulary size");
    synth->add_option("--bins", synth_bins, "histogram bins");
    synth->add_option("--rate", synth_rate, "per-word Poisson rate on the cluster support");
    synth->add_option("--separation", synth_separation, "image signature magnitude");
    synth->add_option("--noise", synth_noise, "image noise standard deviation");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->callback([&] {
        dwh::SyntheticSpec spec;
        if (!synth_spec_path.empty()) {
            spec = dwh::load_synthetic_spec(synth_spec_path);
        } else {
            spec = dwh::two_cluster_spec(synth_vocab, synth_bins, synth_n, synth_rate,
                                         synth_separation, synth_noise, synth_seed);
        }
        const dwh::Corpus corpus = dwh::generate_synthetic(spec);
        dwh::save_corpus(corpus, synth_prefix + ".text", synth_prefix + ".image",
                         synth_prefix + ".labels");
        std::cout << "wrote " << corpus.size() << " observations (" << corpus.vocab_size()
                  << " words, " << corpus.bin_count() << " bins) to " << synth_prefix
                  << ".{text,image,labels}\n";
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a model by gradient ascent");
    CorpusArgs train_in;
    train_in.attach(train_cmd);
    std::string train_out;
    std::string train_report_path;
    std::string train_method = "cd";
    Index train_latent = 5;
    dwh::TrainConfig config;
    train_cmd->add_option("--model-out", train_out, "model file to write")->required();
    train_cmd->add_option("--report-out", train_report_path, "per-epoch report file");
    train_cmd->add_option("--method", train_method, "gradient estimator")
        ->check(CLI::IsMember({"cd", "gmf", "exact"}));
    train_cmd->add_option("--latent-dim", train_latent, "latent aspects")->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", config.epochs, "training epochs (default 1000)");
    train_cmd->add_option("--batch-size", config.batch_size, "mini-batch size");
    train_cmd->add_option("--learning-rate", config.learning_rate, "ascent step size");
    train_cmd->add_option("--momentum", config.momentum, "velocity mixing in [0,1)");
    train_cmd->add_option("--weight-decay", config.weight_decay, "decay on W and U");
    train_cmd->add_option("--seed", config.seed, "training seed");
    train_cmd->add_option("--cd-steps", config.gibbs.steps, "Gibbs sweeps per reconstruction");
    train_cmd->add_option("--max-count", config.gibbs.max_count, "sampled count clamp");
    train_cmd->add_option("--gmf-tol", config.gmf.tol, "mean-field stopping tolerance");
    train_cmd->add_option("--gmf-max-iter", config.gmf.max_iter, "mean-field iteration cap");
    train_cmd->add_option("--damping", config.gmf.damping, "mean-field damping in [0,1)");
    train_cmd->add_option("--init-scale", config.init_scale, "coupling init scale");
    train_cmd->add_option("--projection-margin", config.projection_margin,
                          "integrability projection headroom");
    train_cmd->add_flag("--freeze-couplings", config.freeze_couplings, "keep W = U = 0");
    train_cmd->callback([&] {
        config.normalize = !train_in.no_normalize;
        if (train_method == "cd") config.method = dwh::TrainMethod::cd;
        if (train_method == "gmf") config.method = dwh::TrainMethod::gmf;
        if (train_method == "exact") config.method = dwh::TrainMethod::exact;
        const dwh::Corpus corpus =
            dwh::load_corpus(train_in.text, train_in.images, train_in.labels);
        dwh::TrainResult result = dwh::train(corpus, train_latent, config);
        dwh::save_model(result.params, train_out);
        if (!train_report_path.empty()) save_train_report(result.report, train_report_path);
        const auto& last = result.report.epochs.back();
        std::cout << "trained " << result.report.epochs.size() << " epochs; final grad norm "
                  << last.grad_norm << "; projections ";
        Index projections = 0;
        long clamps = 0;
        for (const auto& rec : result.report.epochs) {
            projections += rec.projections;
            clamps += rec.clamp_events;
        }
        std::cout << projections << "; clamped draws " << clamps << "; "
                  << result.report.seconds << " s\n";
        std::cout << "model written to " << train_out << "\n";
    });

    // project
    auto* project_cmd = app.add_subcommand("project", "write latent vectors for a corpus");
    CorpusArgs project_in;
    project_in.attach(project_cmd);
    std::string project_model;
    std::string project_out;
    project_cmd->add_option("--model", project_model, "model file")->required();
    project_cmd->add_option("--out", project_out, "latent file to write")->required();
    project_cmd->callback([&] {
        const dwh::HarmoniumParams params = dwh::load_model(project_model);
        const dwh::Corpus corpus = project_in.load();
        dwh::save_latents(dwh::project(params, corpus), project_out);
        std::cout << "wrote " << corpus.size() << " latent vectors to " << project_out << "\n";
    });

    // retrieve
    auto* retrieve_cmd = app.add_subcommand("retrieve", "same-label retrieval evaluation");
    CorpusArgs retrieve_in;
    retrieve_in.attach(retrieve_cmd, true);
    std::string retrieve_model;
    std::string retrieve_prefix;
    std::string retrieve_features = "latent";
    std::string query_id_path;
    std::string index_id_path;
    retrieve_cmd->add_option("--model", retrieve_model, "model file (latent features)");
    retrieve_cmd->add_option("--out-prefix", retrieve_prefix, "output prefix (.ap.tsv/.pr.tsv)")
        ->required();
    retrieve_cmd->add_option("--features", retrieve_features, "representation")
        ->check(CLI::IsMember({"latent", "raw"}));
    retrieve_cmd->add_option("--query-ids", query_id_path, "query id file (default: odd split)");
    retrieve_cmd->add_option("--index-ids", index_id_path, "index id file (default: even split)");
    retrieve_cmd->callback([&] {
        const dwh::Corpus corpus = retrieve_in.load();
        dwh::LatentMatrix latents;
        if (retrieve_features == "raw") {
            latents = dwh::raw_features(corpus);
        } else {
            if (retrieve_model.empty()) {
                throw CLI::ValidationError("--model", "required for --features latent");
            }
            latents = dwh::project(dwh::load_model(retrieve_model), corpus);
        }
        const dwh::Split split = dwh::even_split(corpus.ids);
        const auto queries =
            query_id_path.empty() ? split.test_ids : read_id_file(query_id_path);
        const auto index_ids =
            index_id_path.empty() ? split.train_ids : read_id_file(index_id_path);
        const dwh::RetrievalEval eval =
            dwh::retrieval_eval(latents, corpus.labels, queries, index_ids);
        dwh::save_per_query_ap(eval.per_query, retrieve_prefix + ".ap.tsv");
        dwh::save_pr_curve(eval.pr_curve, retrieve_prefix + ".pr.tsv");
        std::printf("mean AP %.4f over %zu queries\n", eval.mean_ap, eval.per_query.size());
        if (!eval.skipped.empty()) {
            std::cout << "skipped " << eval.skipped.size() << " queries without index support\n";
        }
    });

    // annotate
    auto* annotate_cmd = app.add_subcommand("annotate", "rank words for image vectors");
    std::string annotate_model;
    std::string annotate_images;
    std::string annotate_vocab_path;
    Index annotate_top = 10;
    dwh::GmfConfig annotate_gmf;
    annotate_cmd->add_option("--model", annotate_model, "model file")->required();
    annotate_cmd->add_option("--images", annotate_images, "image feature file")->required();
    annotate_cmd->add_option("--top-n", annotate_top, "words per image")->check(CLI::PositiveNumber);
    annotate_cmd->add_option("--vocab", annotate_vocab_path,
                             "vocabulary file, one token per line (default: indices)");
    annotate_cmd->add_option("--gmf-tol", annotate_gmf.tol, "mean-field stopping tolerance");
    annotate_cmd->add_option("--gmf-max-iter", annotate_gmf.max_iter, "mean-field iteration cap");
    annotate_cmd->add_option("--damping", annotate_gmf.damping, "mean-field damping");
    annotate_cmd->callback([&] {
        const dwh::HarmoniumParams params = dwh::load_model(annotate_model);
        std::vector<std::string> vocab;
        if (!annotate_vocab_path.empty()) {
            vocab = read_vocab_file(annotate_vocab_path);
            if (static_cast<Index>(vocab.size()) != params.dims.vocab_size) {
                throw dwh::ValidationError("vocabulary size does not match the model");
            }
        }
        // Reuse the corpus image parser by loading a text-less corpus shell.
        std::ifstream in(annotate_images);
        if (!in) throw dwh::Error("cannot open " + annotate_images);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw dwh::ParseError(annotate_images + ":" + std::to_string(line_no) +
                                      ": expected `id<TAB>v1,v2,...`");
            }
            const std::string id = line.substr(0, tab);
            std::vector<double> values;
            std::string cell;
            std::istringstream cells(line.substr(tab + 1));
            while (std::getline(cells, cell, ',')) {
                values.push_back(std::stod(cell));
            }
            if (static_cast<Index>(values.size()) != params.dims.bin_count) {
                throw dwh::ParseError(annotate_images + ":" + std::to_string(line_no) +
                                      ": expected " + std::to_string(params.dims.bin_count) +
                                      " values");
            }
            const dwh::Vector z =
                Eigen::Map<const dwh::Vector>(values.data(), static_cast<Index>(values.size()));
            const auto ranked = dwh::annotate(
                params, z, std::min(annotate_top, params.dims.vocab_size), annotate_gmf);
            std::cout << id << '\t';
            for (std::size_t r = 0; r < ranked.size(); ++r) {
                if (r) std::cout << ' ';
                if (vocab.empty()) {
                    std::cout << ranked[r].word;
                } else {
                    std::cout << vocab[static_cast<std::size_t>(ranked[r].word)];
                }
                std::printf(":%.6g", ranked[r].score);
            }
            std::cout << '\n';
        }
    });

    // eval-annotation
    auto* eval_ann = app.add_subcommand("eval-annotation", "word-prediction average precision");
    CorpusArgs eval_ann_in;
    eval_ann_in.attach(eval_ann);
    std::string eval_ann_model;
    std::vector<Index> eval_ann_tops;
    eval_ann->add_option("--model", eval_ann_model, "model file")->required();
    eval_ann->add_option("--top-n", eval_ann_tops, "ranking cutoffs (default: full vocabulary)");
    eval_ann->callback([&] {
        const dwh::HarmoniumParams params = dwh::load_model(eval_ann_model);
        const dwh::Corpus corpus = eval_ann_in.load();
        std::vector<Index> grid = eval_ann_tops;
        if (grid.empty()) grid.push_back(params.dims.vocab_size);
        const dwh::AnnotationEval eval = dwh::annotation_eval(params, corpus, grid);
        for (std::size_t g = 0; g < eval.top_n.size(); ++g) {
            std::printf("top-%lld mean AP %.4f\n", static_cast<long long>(eval.top_n[g]),
                        eval.mean_ap[g]);
        }
        if (!eval.skipped.empty()) {
            std::cout << "skipped " << eval.skipped.size() << " observations\n";
        }
    });

    // eval-classify
    auto* eval_cls = app.add_subcommand("eval-classify", "nearest-centroid accuracy in latent space");
    CorpusArgs eval_cls_in;
    eval_cls_in.attach(eval_cls, true);
    std::string eval_cls_model;
    eval_cls->add_option("--model", eval_cls_model, "model file")->required();
    eval_cls->callback([&] {
        const dwh::HarmoniumParams params = dwh::load_model(eval_cls_model);
        const dwh::Corpus corpus = eval_cls_in.load();
        const dwh::LatentMatrix latents = dwh::project(params, corpus);
        const dwh::Split split = dwh::even_split(corpus.ids);
        const dwh::ClassifyEval eval =
            dwh::nearest_centroid_eval(latents, corpus.labels, split.train_ids, split.test_ids);
        std::printf("accuracy %.4f over %zu test observations\n", eval.accuracy,
                    split.test_ids.size());
        std::cout << "confusion (rows true, cols predicted):";
        for (const auto& label : eval.label_order) std::cout << ' ' << label;
        std::cout << '\n';
        for (Index r = 0; r < eval.confusion.rows(); ++r) {
            std::cout << eval.label_order[static_cast<std::size_t>(r)];
            for (Index c = 0; c < eval.confusion.cols(); ++c) {
                std::cout << '\t' << static_cast<long>(eval.confusion(r, c));
            }
            std::cout << '\n';
        }
    });

    // topics
    auto* topics_cmd = app.add_subcommand("topics", "top words and documents per aspect");
    CorpusArgs topics_in;
    topics_in.attach(topics_cmd);
    std::string topics_model;
    Index topics_words = 10, topics_docs = 5;
    topics_cmd->add_option("--model", topics_model, "model file")->required();
    topics_cmd->add_option("--top-words", topics_words, "words per aspect");
    topics_cmd->add_option("--top-docs", topics_docs, "documents per aspect");
    topics_cmd->callback([&] {
        const dwh::HarmoniumParams params = dwh::load_model(topics_model);
        const dwh::Corpus corpus = topics_in.load();
        std::cout << dwh::format_topic_report(
            dwh::topic_report(params, corpus, topics_words, topics_docs));
    });

    // lsi
    auto* lsi_cmd = app.add_subcommand("lsi", "latent-semantic baseline projection");
    CorpusArgs lsi_in;
    lsi_in.attach(lsi_cmd);
    std::string lsi_out;
    Index lsi_dim = 5;
    std::uint64_t lsi_seed = 0;
    lsi_cmd->add_option("--out", lsi_out, "latent file to write")->required();
    lsi_cmd->add_option("--latent-dim", lsi_dim, "projection rank")->check(CLI::PositiveNumber);
    lsi_cmd->add_option("--seed", lsi_seed, "seed for rank-deficient completion");
    lsi_cmd->callback([&] {
        const dwh::Corpus corpus = lsi_in.load();
        Index padded = 0;
        const dwh::LatentMatrix latents = dwh::lsi_project(corpus, lsi_dim, &padded, lsi_seed);
        dwh::save_latents(latents, lsi_out);
        std::cout << "wrote " << corpus.size() << " latent vectors to " << lsi_out << "\n";
        if (padded > 0) std::cout << "padded " << padded << " columns beyond the rank\n";
    });

    // oracle-check
    auto* oracle_cmd = app.add_subcommand("oracle-check", "finite-difference gradient audit");
    Index oracle_draws = 5;
    double oracle_tol = 1e-5;
    std::uint64_t oracle_seed = 20240101;
    oracle_cmd->add_option("--draws", oracle_draws, "random parameter draws");
    oracle_cmd->add_option("--tol", oracle_tol, "relative error tolerance");
    oracle_cmd->add_option("--seed", oracle_seed, "draw seed");
    oracle_cmd->callback([&] {
        const dwh::OracleCheck check =
            dwh::run_gradient_oracle(oracle_draws, oracle_tol, oracle_seed);
        for (std::size_t d = 0; d < check.per_draw_max_rel_err.size(); ++d) {
            std::printf("draw %zu: max relative error %.3e\n", d, check.per_draw_max_rel_err[d]);
        }
        if (check.ok) {
            std::printf("PASS: gradients match finite differences within %g\n", oracle_tol);
        } else {
            std::printf("FAIL: max relative error %.3e exceeds %g\n", check.max_rel_err,
                        oracle_tol);
            exit_code = 2;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
