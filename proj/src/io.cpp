#include "dwh/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dwh {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> parts;
    std::istringstream stream(text);
    std::string part;
    while (stream >> part) parts.push_back(part);
    return parts;
}

std::vector<std::string> split_char(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream stream(text);
    while (std::getline(stream, part, sep)) parts.push_back(part);
    if (!text.empty() && text.back() == sep) parts.push_back("");
    return parts;
}

/// Splits `id<TAB>payload`; the payload may be empty.
std::pair<std::string, std::string> split_id_line(const std::string& path, std::size_t line_no,
                                                  const std::string& line) {
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) fail_at(path, line_no, "expected `id<TAB>...`");
    return {line.substr(0, tab), line.substr(tab + 1)};
}

double parse_double(const std::string& path, std::size_t line_no, const std::string& text) {
    if (text.empty()) fail_at(path, line_no, "empty number");
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) fail_at(path, line_no, "bad number '" + text + "'");
    return value;
}

long parse_count(const std::string& path, std::size_t line_no, const std::string& text) {
    if (text.empty()) fail_at(path, line_no, "empty count");
    char* end = nullptr;
    const long value = std::strtol(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || value < 0) {
        fail_at(path, line_no, "bad count '" + text + "'");
    }
    return value;
}

bool all_digits(const std::string& text) {
    if (text.empty()) return false;
    for (char c : text) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

void check_token(const std::string& token) {
    if (token.empty()) throw ValidationError("empty vocabulary token");
    for (char c : token) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
            throw ValidationError("vocabulary token '" + token + "' contains whitespace or ':'");
        }
    }
}

constexpr const char* kModelMagic = "DWH";
constexpr const char* kModelVersion = "v1";

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

Corpus load_corpus(const std::string& text_path, const std::string& image_path,
                   const std::string& labels_path) {
    const auto lines = read_lines(text_path);
    Corpus corpus;
    std::unordered_map<std::string, Index> vocab_index;
    bool has_header = false;
    std::size_t first_data = 0;
    if (!lines.empty() && lines[0].rfind("#vocab", 0) == 0) {
        has_header = true;
        first_data = 1;
        const auto tokens = split_ws(lines[0].substr(6));
        for (const auto& token : tokens) {
            check_token(token);
            if (!vocab_index.emplace(token, static_cast<Index>(corpus.vocab.size())).second) {
                fail_at(text_path, 1, "duplicate vocabulary token '" + token + "'");
            }
            corpus.vocab.push_back(token);
        }
        if (corpus.vocab.empty()) fail_at(text_path, 1, "empty #vocab header");
    }

    std::vector<std::vector<std::pair<Index, double>>> entries;
    std::unordered_set<std::string> seen;
    Index max_index = -1;
    for (std::size_t line_no = first_data; line_no < lines.size(); ++line_no) {
        const std::string& line = lines[line_no];
        if (line.empty()) continue;
        const auto [id, payload] = split_id_line(text_path, line_no + 1, line);
        if (!seen.insert(id).second) fail_at(text_path, line_no + 1, "duplicate id '" + id + "'");
        std::vector<std::pair<Index, double>> row;
        for (const std::string& entry : split_ws(payload)) {
            const std::size_t colon = entry.rfind(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == entry.size()) {
                fail_at(text_path, line_no + 1, "expected word:count, got '" + entry + "'");
            }
            const std::string word = entry.substr(0, colon);
            const long count = parse_count(text_path, line_no + 1, entry.substr(colon + 1));
            Index index = -1;
            if (has_header) {
                const auto hit = vocab_index.find(word);
                if (hit != vocab_index.end()) {
                    index = hit->second;
                } else if (all_digits(word)) {
                    index = static_cast<Index>(std::strtol(word.c_str(), nullptr, 10));
                    if (index >= static_cast<Index>(corpus.vocab.size())) {
                        fail_at(text_path, line_no + 1, "word index " + word + " out of range");
                    }
                } else {
                    fail_at(text_path, line_no + 1, "unknown word '" + word + "'");
                }
            } else {
                if (!all_digits(word)) {
                    fail_at(text_path, line_no + 1,
                            "word '" + word + "' needs a #vocab header or an integer index");
                }
                index = static_cast<Index>(std::strtol(word.c_str(), nullptr, 10));
            }
            max_index = std::max(max_index, index);
            if (count > 0) row.emplace_back(index, static_cast<double>(count));
        }
        corpus.ids.push_back(id);
        entries.push_back(std::move(row));
    }
    if (!has_header) {
        for (Index i = 0; i <= max_index; ++i) corpus.vocab.push_back("w" + std::to_string(i));
    }
    const Index m = corpus.vocab_size();

    std::unordered_map<std::string, Vector> histograms;
    Index k = 0;
    if (!image_path.empty()) {
        const auto image_lines = read_lines(image_path);
        bool first = true;
        for (std::size_t line_no = 0; line_no < image_lines.size(); ++line_no) {
            const std::string& line = image_lines[line_no];
            if (line.empty()) continue;
            const auto [id, payload] = split_id_line(image_path, line_no + 1, line);
            std::vector<std::string> cells =
                payload.empty() ? std::vector<std::string>{} : split_char(payload, ',');
            if (first) {
                k = static_cast<Index>(cells.size());
                first = false;
            } else if (static_cast<Index>(cells.size()) != k) {
                fail_at(image_path, line_no + 1,
                        "expected " + std::to_string(k) + " values, got " +
                            std::to_string(cells.size()));
            }
            Vector z(k);
            for (Index c = 0; c < k; ++c) {
                z[c] = parse_double(image_path, line_no + 1, cells[static_cast<std::size_t>(c)]);
            }
            if (!histograms.emplace(id, std::move(z)).second) {
                fail_at(image_path, line_no + 1, "duplicate id '" + id + "'");
            }
        }
        for (const auto& [id, z] : histograms) {
            if (!seen.count(id)) throw Error(image_path + ": id '" + id + "' has no text entry");
        }
    }

    for (std::size_t n = 0; n < corpus.ids.size(); ++n) {
        Vector counts = Vector::Zero(m);
        for (const auto& [index, value] : entries[n]) counts[index] += value;
        Vector z = Vector::Zero(k);
        if (!image_path.empty()) {
            const auto hit = histograms.find(corpus.ids[n]);
            if (hit == histograms.end()) {
                throw Error(image_path + ": missing image for id '" + corpus.ids[n] + "'");
            }
            z = hit->second;
        }
        corpus.observations.push_back(make_observation(counts, z));
    }
    for (Index i = 0; i < k; ++i) corpus.bin_labels.push_back("bin" + std::to_string(i));

    if (!labels_path.empty()) {
        const auto label_lines = read_lines(labels_path);
        std::unordered_map<std::string, std::string> label_of;
        for (std::size_t line_no = 0; line_no < label_lines.size(); ++line_no) {
            const std::string& line = label_lines[line_no];
            if (line.empty()) continue;
            const auto [id, label] = split_id_line(labels_path, line_no + 1, line);
            if (!label_of.emplace(id, label).second) {
                fail_at(labels_path, line_no + 1, "duplicate id '" + id + "'");
            }
            if (!seen.count(id)) throw Error(labels_path + ": id '" + id + "' has no text entry");
        }
        for (const auto& id : corpus.ids) {
            const auto hit = label_of.find(id);
            if (hit == label_of.end()) throw Error(labels_path + ": missing label for id '" + id + "'");
            corpus.labels.push_back(hit->second);
        }
    }
    check_corpus(corpus);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& text_path, const std::string& image_path,
                 const std::string& labels_path) {
    check_corpus(corpus);
    for (const auto& token : corpus.vocab) check_token(token);
    {
        auto out = open_out(text_path);
        out << "#vocab";
        for (const auto& token : corpus.vocab) out << ' ' << token;
        out << '\n';
        for (Index n = 0; n < corpus.size(); ++n) {
            out << corpus.ids[static_cast<std::size_t>(n)] << '\t';
            bool space = false;
            for (SparseVector::InnerIterator it(
                     corpus.observations[static_cast<std::size_t>(n)].word_counts);
                 it; ++it) {
                if (it.value() == 0.0) continue;
                if (space) out << ' ';
                out << corpus.vocab[static_cast<std::size_t>(it.index())] << ':'
                    << static_cast<long>(it.value());
                space = true;
            }
            out << '\n';
        }
    }
    if (!image_path.empty()) {
        auto out = open_out(image_path);
        for (Index n = 0; n < corpus.size(); ++n) {
            const Vector& z = corpus.observations[static_cast<std::size_t>(n)].histogram;
            out << corpus.ids[static_cast<std::size_t>(n)] << '\t';
            for (Index c = 0; c < z.size(); ++c) {
                if (c) out << ',';
                out << format_double(z[c]);
            }
            out << '\n';
        }
    }
    if (!labels_path.empty()) {
        if (corpus.labels.empty()) throw ValidationError("corpus has no labels to save");
        auto out = open_out(labels_path);
        for (std::size_t n = 0; n < corpus.labels.size(); ++n) {
            out << corpus.ids[n] << '\t' << corpus.labels[n] << '\n';
        }
    }
}

void save_model(const HarmoniumParams& params, const std::string& path) {
    const ValidityReport report = validate_params(params);
    if (!report.ok) throw ValidationError("refusing to save invalid model: " + report.violations.front());
    auto out = open_out(path);
    out << kModelMagic << ' ' << kModelVersion << ' ' << params.dims.vocab_size << ' '
        << params.dims.bin_count << ' ' << params.dims.latent_dim << '\n';
    auto write_vector = [&out](const char* name, const Vector& v) {
        out << name << '\n';
        for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
        if (v.size() > 0) out << '\n';
    };
    auto write_matrix = [&out](const char* name, const Matrix& m) {
        out << name << '\n';
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
            out << '\n';
        }
    };
    write_vector("alpha", params.alpha);
    write_vector("beta", params.beta);
    write_vector("sigma", params.sigma);
    write_matrix("W", params.W);
    write_matrix("U", params.U);
}

HarmoniumParams load_model(const std::string& path) {
    const auto lines = read_lines(path);
    std::size_t cursor = 0;
    auto next_line = [&]() -> const std::string& {
        while (cursor < lines.size() && lines[cursor].empty()) ++cursor;
        if (cursor >= lines.size()) fail_at(path, lines.size(), "unexpected end of file");
        return lines[cursor++];
    };

    const auto header = split_ws(next_line());
    if (header.size() != 5 || header[0] != kModelMagic) fail_at(path, 1, "not a DWH model file");
    if (header[1] != kModelVersion) {
        fail_at(path, 1, "unsupported model version '" + header[1] + "'");
    }
    ModelDims dims;
    dims.vocab_size = parse_count(path, 1, header[2]);
    dims.bin_count = parse_count(path, 1, header[3]);
    dims.latent_dim = parse_count(path, 1, header[4]);
    if (dims.vocab_size < 1 || dims.latent_dim < 1) fail_at(path, 1, "invalid dimensions");

    HarmoniumParams params = zero_params(dims);
    auto read_section = [&](const char* name, double* data, Index rows, Index cols) {
        const std::string& tag = next_line();
        if (tag != name) fail_at(path, cursor, "expected section '" + std::string(name) + "'");
        for (Index r = 0; r < rows; ++r) {
            const std::size_t line_no = cursor + 1;
            const auto cells = split_ws(next_line());
            if (static_cast<Index>(cells.size()) != cols) {
                fail_at(path, line_no, "expected " + std::to_string(cols) + " values");
            }
            for (Index c = 0; c < cols; ++c) {
                data[r * cols + c] = parse_double(path, line_no, cells[static_cast<std::size_t>(c)]);
            }
        }
    };
    read_section("alpha", params.alpha.data(), params.alpha.size() > 0 ? 1 : 0, dims.vocab_size);
    read_section("beta", params.beta.data(), dims.bin_count > 0 ? 1 : 0, dims.bin_count);
    read_section("sigma", params.sigma.data(), dims.bin_count > 0 ? 1 : 0, dims.bin_count);
    std::vector<double> buffer(static_cast<std::size_t>(dims.vocab_size * dims.latent_dim));
    read_section("W", buffer.data(), dims.vocab_size, dims.latent_dim);
    for (Index r = 0; r < dims.vocab_size; ++r) {
        for (Index c = 0; c < dims.latent_dim; ++c) {
            params.W(r, c) = buffer[static_cast<std::size_t>(r * dims.latent_dim + c)];
        }
    }
    buffer.assign(static_cast<std::size_t>(dims.bin_count * dims.latent_dim), 0.0);
    read_section("U", buffer.data(), dims.bin_count, dims.latent_dim);
    for (Index r = 0; r < dims.bin_count; ++r) {
        for (Index c = 0; c < dims.latent_dim; ++c) {
            params.U(r, c) = buffer[static_cast<std::size_t>(r * dims.latent_dim + c)];
        }
    }
    while (cursor < lines.size()) {
        if (!lines[cursor].empty()) fail_at(path, cursor + 1, "trailing content");
        ++cursor;
    }
    const ValidityReport report = validate_params(params);
    if (!report.ok) {
        throw ValidationError(path + ": invalid model: " + report.violations.front());
    }
    return params;
}

void save_latents(const LatentMatrix& latents, const std::string& path) {
    auto out = open_out(path);
    for (Index n = 0; n < latents.size(); ++n) {
        out << latents.ids[static_cast<std::size_t>(n)] << '\t';
        for (Index j = 0; j < latents.rows.cols(); ++j) {
            if (j) out << ',';
            out << format_double(latents.rows(n, j));
        }
        out << '\n';
    }
}

void save_pr_curve(const std::vector<PrPoint>& curve, const std::string& path) {
    auto out = open_out(path);
    for (const PrPoint& point : curve) {
        out << format_double(point.recall) << '\t' << format_double(point.precision) << '\n';
    }
}

void save_per_query_ap(const std::vector<std::pair<std::string, double>>& per_query,
                       const std::string& path) {
    auto out = open_out(path);
    for (const auto& [id, ap] : per_query) out << id << '\t' << format_double(ap) << '\n';
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        SyntheticSpec spec;
        spec.size = doc.at("size").get<Index>();
        spec.noise = doc.value("noise", 1.0);
        spec.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& entry : doc.at("clusters")) {
            ClusterSpec cluster;
            cluster.weight = entry.at("weight").get<double>();
            const auto rates = entry.at("word_rate").get<std::vector<double>>();
            const auto means = entry.at("image_mean").get<std::vector<double>>();
            cluster.word_rate = Eigen::Map<const Vector>(rates.data(), static_cast<Index>(rates.size()));
            cluster.image_mean = Eigen::Map<const Vector>(means.data(), static_cast<Index>(means.size()));
            spec.clusters.push_back(std::move(cluster));
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace dwh
