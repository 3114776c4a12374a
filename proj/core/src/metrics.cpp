#include "memloom/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>

#include "memloom/errors.hpp"

namespace memloom::metrics {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string word;
    auto flush = [&]() {
        if (!word.empty()) {
            tokens.push_back(word);
            word.clear();
        }
    };
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (std::isspace(c)) {
            flush();
        } else {
            flush();
            tokens.push_back(std::string(1, raw));
        }
    }
    flush();
    return tokens;
}

// ---- BLEU-4 ----

namespace {

using NgramCounts = std::map<std::vector<std::string>, long long>;

NgramCounts ngram_counts(const std::vector<std::string>& tokens, size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string> gram(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i + n));
        ++counts[std::move(gram)];
    }
    return counts;
}

}  // namespace

double bleu4(const std::vector<std::string>& candidates,
             const std::vector<std::string>& references, const BleuOptions& options) {
    if (candidates.empty()) {
        throw ArgumentError("BLEU needs at least one candidate");
    }
    if (candidates.size() != references.size()) {
        throw ArgumentError("BLEU needs one reference per candidate");
    }

    long long matched[4] = {0, 0, 0, 0};
    long long total[4] = {0, 0, 0, 0};
    long long cand_len = 0;
    long long ref_len = 0;

    for (size_t i = 0; i < candidates.size(); ++i) {
        std::vector<std::string> cand = tokenize(candidates[i]);
        std::vector<std::string> ref = tokenize(references[i]);
        cand_len += static_cast<long long>(cand.size());
        ref_len += static_cast<long long>(ref.size());
        for (size_t n = 1; n <= 4; ++n) {
            NgramCounts cand_counts = ngram_counts(cand, n);
            NgramCounts ref_counts = ngram_counts(ref, n);
            for (const auto& [gram, count] : cand_counts) {
                auto it = ref_counts.find(gram);
                long long clip = it == ref_counts.end() ? 0 : it->second;
                matched[n - 1] += std::min(count, clip);
            }
            if (cand.size() >= n) {
                total[n - 1] += static_cast<long long>(cand.size() - n + 1);
            }
        }
    }

    if (cand_len == 0) return 0.0;

    double log_sum = 0.0;
    for (int n = 0; n < 4; ++n) {
        long long num = matched[n];
        long long den = total[n];
        if (options.smooth_add_one && n >= 1) {
            num += 1;
            den += 1;
        }
        if (num == 0 || den == 0) return 0.0;
        log_sum += 0.25 * std::log(static_cast<double>(num) / static_cast<double>(den));
    }

    double ratio = static_cast<double>(ref_len) / static_cast<double>(cand_len);
    double brevity = std::exp(std::min(0.0, 1.0 - ratio));
    return brevity * std::exp(log_sum);
}

// ---- ROUGE-L ----

double rouge_l(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> cand = tokenize(candidate);
    std::vector<std::string> ref = tokenize(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    size_t m = cand.size();
    size_t n = ref.size();
    std::vector<size_t> prev(n + 1, 0);
    std::vector<size_t> cur(n + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            if (cand[i - 1] == ref[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    double lcs = static_cast<double>(prev[n]);
    if (lcs == 0.0) return 0.0;
    double recall = lcs / static_cast<double>(n);
    double precision = lcs / static_cast<double>(m);
    return 2.0 * precision * recall / (precision + recall);
}

// ---- METEOR ----

namespace {

struct Alignment {
    int matches = 0;
    int chunks = 0;
};

// Greedy longest-run-first matching; always reaches the maximum match count
// (matching is count-wise unconstrained), used as the initial chunk bound.
Alignment align_greedy(const std::vector<std::string>& cand,
                       const std::vector<std::string>& ref, std::vector<int>& cand_to_ref) {
    size_t m = cand.size();
    size_t n = ref.size();
    std::vector<bool> cand_used(m, false);
    std::vector<bool> ref_used(n, false);
    cand_to_ref.assign(m, -1);
    Alignment out;

    while (true) {
        size_t best_len = 0;
        size_t best_i = 0;
        size_t best_j = 0;
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < n; ++j) {
                size_t len = 0;
                while (i + len < m && j + len < n && !cand_used[i + len] &&
                       !ref_used[j + len] && cand[i + len] == ref[j + len]) {
                    ++len;
                }
                if (len > best_len) {
                    best_len = len;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_len == 0) break;
        for (size_t k = 0; k < best_len; ++k) {
            cand_used[best_i + k] = true;
            ref_used[best_j + k] = true;
            cand_to_ref[best_i + k] = static_cast<int>(best_j + k);
        }
        out.matches += static_cast<int>(best_len);
    }

    int last_ref = -2;
    for (size_t i = 0; i < m; ++i) {
        if (cand_to_ref[i] < 0) continue;
        bool continues = i > 0 && cand_to_ref[i - 1] == cand_to_ref[i] - 1;
        if (!continues || cand_to_ref[i] != last_ref + 1) {
            ++out.chunks;
        }
        last_ref = cand_to_ref[i];
    }
    return out;
}

struct ChunkSearch {
    const std::vector<std::string>& cand;
    const std::vector<std::string>& ref;
    std::vector<bool> ref_used;
    std::map<std::string, int> cand_avail;  // unprocessed candidate occurrences
    std::map<std::string, int> ref_avail;   // unmatched reference occurrences
    int target_matches;
    int best_chunks;
    long long nodes = 0;
    static constexpr long long kNodeCap = 500000;

    // Remaining achievable matches given current availability.
    int achievable() const {
        int total = 0;
        for (const auto& [token, count] : cand_avail) {
            auto it = ref_avail.find(token);
            if (it != ref_avail.end()) total += std::min(count, it->second);
        }
        return total;
    }

    // i: next candidate position; matched: pairs chosen so far;
    // chunks: chunks so far; last_j: ref index of the pair at i-1, or -2.
    void search(size_t i, int matched, int chunks, int last_j) {
        if (++nodes > kNodeCap) return;
        if (chunks >= best_chunks) return;
        if (matched + achievable() < target_matches) return;
        if (i == cand.size()) {
            if (matched == target_matches) best_chunks = chunks;
            return;
        }
        const std::string& token = cand[i];
        auto ref_it = ref_avail.find(token);
        bool matchable = ref_it != ref_avail.end() && ref_it->second > 0;

        if (matchable) {
            // Try continuing the current chunk first so good bounds come early.
            std::vector<size_t> js;
            for (size_t j = 0; j < ref.size(); ++j) {
                if (!ref_used[j] && ref[j] == token) js.push_back(j);
            }
            std::sort(js.begin(), js.end(), [&](size_t a, size_t b) {
                bool a_cont = static_cast<int>(a) == last_j + 1;
                bool b_cont = static_cast<int>(b) == last_j + 1;
                if (a_cont != b_cont) return a_cont;
                return a < b;
            });
            for (size_t j : js) {
                bool continues = static_cast<int>(j) == last_j + 1;
                ref_used[j] = true;
                --ref_it->second;
                --cand_avail[token];
                search(i + 1, matched + 1, chunks + (continues ? 0 : 1),
                       static_cast<int>(j));
                ++cand_avail[token];
                ++ref_it->second;
                ref_used[j] = false;
            }
        }

        // Leave position i unmatched.
        auto cand_it = cand_avail.find(token);
        --cand_it->second;
        search(i + 1, matched, chunks, -2);
        ++cand_it->second;
    }
};

Alignment align_min_chunks(const std::vector<std::string>& cand,
                           const std::vector<std::string>& ref) {
    std::vector<int> cand_to_ref;
    Alignment greedy = align_greedy(cand, ref, cand_to_ref);
    if (greedy.matches == 0 || greedy.chunks == 1) return greedy;

    ChunkSearch search{cand, ref, std::vector<bool>(ref.size(), false), {}, {},
                       greedy.matches, greedy.chunks};
    for (const std::string& t : cand) ++search.cand_avail[t];
    for (const std::string& t : ref) ++search.ref_avail[t];
    search.search(0, 0, 0, -2);
    return Alignment{greedy.matches, search.best_chunks};
}

}  // namespace

double meteor(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> cand = tokenize(candidate);
    std::vector<std::string> ref = tokenize(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    Alignment aligned = align_min_chunks(cand, ref);
    if (aligned.matches == 0) return 0.0;

    double m = static_cast<double>(aligned.matches);
    double precision = m / static_cast<double>(cand.size());
    double recall = m / static_cast<double>(ref.size());
    double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    double frag = static_cast<double>(aligned.chunks) / m;
    double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

// ---- vector and task metrics ----

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ArgumentError("cosine needs vectors of equal dimension");
    }
    if (u.empty()) {
        throw ArgumentError("cosine needs non-empty vectors");
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw ArgumentError("cosine is undefined for zero vectors");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double mcq_accuracy(const std::vector<int>& predictions, const std::vector<int>& gold) {
    if (predictions.empty()) {
        throw ArgumentError("accuracy needs at least one prediction");
    }
    if (predictions.size() != gold.size()) {
        throw ArgumentError("predictions and gold answers must pair up");
    }
    size_t correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == gold[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

BoundaryScore boundary_f1(const seg::BoundarySet& pred, const seg::BoundarySet& gold,
                          double tol) {
    if (pred.domain != gold.domain) {
        throw ArgumentError("boundary sets must share a domain");
    }
    if (tol < 0.0) {
        throw ArgumentError("tolerance must be non-negative");
    }
    if (pred.values.empty() && gold.values.empty()) {
        return BoundaryScore{1.0, 1.0, 1.0};
    }
    if (pred.values.empty() || gold.values.empty()) {
        return BoundaryScore{0.0, 0.0, 0.0};
    }

    struct Pair {
        double dist;
        size_t p;
        size_t g;
    };
    std::vector<Pair> pairs;
    for (size_t p = 0; p < pred.values.size(); ++p) {
        for (size_t g = 0; g < gold.values.size(); ++g) {
            double dist = std::abs(pred.values[p] - gold.values[g]);
            if (dist <= tol) pairs.push_back(Pair{dist, p, g});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.dist, a.p, a.g) < std::tie(b.dist, b.p, b.g);
    });

    std::vector<bool> pred_used(pred.values.size(), false);
    std::vector<bool> gold_used(gold.values.size(), false);
    size_t tp = 0;
    for (const Pair& pair : pairs) {
        if (pred_used[pair.p] || gold_used[pair.g]) continue;
        pred_used[pair.p] = true;
        gold_used[pair.g] = true;
        ++tp;
    }

    BoundaryScore score;
    score.precision = static_cast<double>(tp) / static_cast<double>(pred.values.size());
    score.recall = static_cast<double>(tp) / static_cast<double>(gold.values.size());
    if (score.precision + score.recall > 0.0) {
        score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
    }
    return score;
}

SimilarityReport caption_similarity_report(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    backend::Embedder& embedder) {
    if (pairs.empty()) {
        throw ArgumentError("similarity report needs at least one pair");
    }
    std::vector<std::string> candidates;
    std::vector<std::string> references;
    candidates.reserve(pairs.size());
    references.reserve(pairs.size());
    for (const auto& [hyp, ref] : pairs) {
        candidates.push_back(hyp);
        references.push_back(ref);
    }

    SimilarityReport report;
    report.pairs = pairs.size();
    report.bleu = bleu4(candidates, references);

    double rouge_sum = 0.0;
    double meteor_sum = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        rouge_sum += rouge_l(candidates[i], references[i]);
        meteor_sum += meteor(candidates[i], references[i]);
    }
    report.rouge_l = rouge_sum / static_cast<double>(pairs.size());
    report.meteor = meteor_sum / static_cast<double>(pairs.size());

    std::vector<std::string> all_texts = candidates;
    all_texts.insert(all_texts.end(), references.begin(), references.end());
    std::vector<std::vector<double>> vectors = embedder.embed(all_texts);
    if (vectors.size() != all_texts.size()) {
        throw ProtocolError("embedder returned a mismatched vector count");
    }
    double cos_sum = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        cos_sum += cosine(vectors[i], vectors[pairs.size() + i]);
    }
    report.cosine_mean = cos_sum / static_cast<double>(pairs.size());
    return report;
}

}  // namespace memloom::metrics
