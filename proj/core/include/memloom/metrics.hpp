#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memloom/backends.hpp"
#include "memloom/segmentation.hpp"

namespace memloom::metrics {

/// Lowercases, splits punctuation into single-char tokens, collapses
/// whitespace. Shared by all lexical metrics.
std::vector<std::string> tokenize(const std::string& text);

struct BleuOptions {
    /// Add-one smoothing on n>=2 precisions, for sentence-level diagnostics.
    /// Corpus scores default to unsmoothed (any zero precision -> 0).
    bool smooth_add_one = false;
};

/// Corpus-level BLEU-4: geometric mean of modified 1..4-gram precisions times
/// the brevity penalty exp(min(0, 1 - r/c)).
double bleu4(const std::vector<std::string>& candidates,
             const std::vector<std::string>& references, const BleuOptions& options = {});

/// LCS F1 (beta = 1): R = LCS/|ref|, P = LCS/|cand|. 0 when either side is empty.
double rouge_l(const std::string& candidate, const std::string& reference);

/// Exact-match METEOR: unigram matches under a maximal one-to-one alignment
/// with the fewest chunks; Fmean = 10PR/(R+9P); penalty = 0.5 (chunks/m)^3.
double meteor(const std::string& candidate, const std::string& reference);

/// u.v / (|u||v|). Throws ArgumentError on dimension mismatch or zero vectors.
double cosine(std::span<const double> u, std::span<const double> v);

/// Percentage of predictions equal to gold. Throws on empty or mismatched input.
double mcq_accuracy(const std::vector<int>& predictions, const std::vector<int>& gold);

struct BoundaryScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Greedy nearest-first one-to-one matching within +/-tol. Both sides empty
/// scores a perfect 1.
BoundaryScore boundary_f1(const seg::BoundarySet& pred, const seg::BoundarySet& gold,
                          double tol);

struct SimilarityReport {
    double bleu = 0.0;
    double rouge_l = 0.0;
    double meteor = 0.0;
    double cosine_mean = 0.0;
    size_t pairs = 0;
};

/// Corpus BLEU-4 plus mean sentence ROUGE-L / METEOR / embedding cosine over
/// (hypothesis, reference) pairs.
SimilarityReport caption_similarity_report(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    backend::Embedder& embedder);

}  // namespace memloom::metrics
