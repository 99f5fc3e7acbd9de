#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dwh/corpus.hpp"
#include "dwh/tasks.hpp"
#include "dwh/types.hpp"

namespace dwh {

/// Text corpus format, one observation per line: `id<TAB>word:count ...`,
/// words either tokens resolved through an optional `#vocab w0 w1 ...` header
/// line or 0-based integer indices. Image format: `id<TAB>v1,v2,...,vK`.
/// Labels: `id<TAB>label`. Ids are joined across files; the text file fixes
/// the corpus order. Empty image path loads a text-only corpus (K = 0).
Corpus load_corpus(const std::string& text_path, const std::string& image_path = "",
                   const std::string& labels_path = "");

/// Canonical emitter for load_corpus's formats: vocabulary header plus
/// token:count entries, 17-significant-digit histogram values. Labels are
/// written only when a path is given (requires a labeled corpus).
void save_corpus(const Corpus& corpus, const std::string& text_path,
                 const std::string& image_path = "", const std::string& labels_path = "");

/// Versioned text model format: `DWH v1 M K J` header, then sections alpha,
/// beta, sigma, W, U (matrices row per line) with 17 significant digits, which
/// round-trips 64-bit floats exactly. Loading re-validates all invariants.
void save_model(const HarmoniumParams& params, const std::string& path);
HarmoniumParams load_model(const std::string& path);

/// Latent projection rows: `id<TAB>g1,...,gJ`.
void save_latents(const LatentMatrix& latents, const std::string& path);

/// Plot data, one `recall<TAB>precision` line per point.
void save_pr_curve(const std::vector<PrPoint>& curve, const std::string& path);

/// Per-query results, one `id<TAB>ap` line per query.
void save_per_query_ap(const std::vector<std::pair<std::string, double>>& per_query,
                       const std::string& path);

/// JSON synthetic-corpus description: {"size", "noise", "seed", "clusters":
/// [{"weight", "word_rate": [...], "image_mean": [...]}, ...]}.
SyntheticSpec load_synthetic_spec(const std::string& path);

/// Lossless decimal rendering of a double (17 significant digits).
std::string format_double(double value);

}  // namespace dwh
