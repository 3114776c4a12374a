#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace testsupport {

namespace seg = memloom::seg;
namespace decode = memloom::decode;

double placement_scatter(const seg::Kernel& kernel, const std::vector<int>& bounds) {
    double total = 0.0;
    int start = 0;
    for (int b : bounds) {
        total += seg::kts_scatter(kernel, start, b - 1);
        start = b;
    }
    total += seg::kts_scatter(kernel, start, kernel.n - 1);
    return total;
}

namespace {

// Enumerates m-1 strictly increasing change points from {1..n-1} in
// lexicographic order, invoking fn on each placement.
template <typename Fn>
void for_each_placement(int n, int m, Fn&& fn) {
    std::vector<int> bounds(m - 1);
    for (int i = 0; i < m - 1; ++i) bounds[i] = i + 1;
    if (m == 1) {
        fn(std::vector<int>{});
        return;
    }
    while (true) {
        fn(bounds);
        int i = m - 2;
        while (i >= 0 && bounds[i] == n - (m - 1 - i)) --i;
        if (i < 0) break;
        ++bounds[i];
        for (int j = i + 1; j < m - 1; ++j) bounds[j] = bounds[j - 1] + 1;
    }
}

}  // namespace

BruteSegmentation brute_kts_fixed(const seg::Kernel& kernel, int m) {
    const int n = kernel.n;
    if (m < 1 || m > n) throw std::invalid_argument("brute_kts_fixed: bad segment count");
    BruteSegmentation best;
    best.scatter = std::numeric_limits<double>::infinity();
    for_each_placement(n, m, [&](const std::vector<int>& bounds) {
        double s = placement_scatter(kernel, bounds);
        bool take = s < best.scatter;
        if (!take && s == best.scatter) {
            // Exact-tie rule mirrors the DP, which keeps the earliest minimizer
            // at every level: of two equal-scatter placements the one whose
            // LAST differing boundary is smaller wins (colex order).
            for (size_t i = bounds.size(); i-- > 0;) {
                if (bounds[i] != best.boundaries[i]) {
                    take = bounds[i] < best.boundaries[i];
                    break;
                }
            }
        }
        if (take) {
            best.scatter = s;
            best.boundaries = bounds;
        }
    });
    for_each_placement(n, m, [&](const std::vector<int>& bounds) {
        if (bounds == best.boundaries) return;
        best.second_scatter = std::min(best.second_scatter, placement_scatter(kernel, bounds));
    });
    best.num_segments = m;
    return best;
}

BruteSegmentation brute_kts_full(const seg::Kernel& kernel, int max_segments, double penalty) {
    const int n = kernel.n;
    BruteSegmentation best;
    bool have = false;
    const int top = std::min(max_segments, n);
    for (int m = 1; m <= top; ++m) {
        BruteSegmentation cand = brute_kts_fixed(kernel, m);
        cand.objective =
            cand.scatter + penalty * m * (std::log(static_cast<double>(n) / m) + 1.0);
        if (!have || cand.objective < best.objective) {
            best = cand;
            have = true;
        }
    }
    return best;
}

seg::FeatureSequence random_features(int n, int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    seg::FeatureSequence fs(n, dim, 1.0);
    for (auto& v : fs.data) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = static_cast<float>(2.0 * u - 1.0);
    }
    return fs;
}

TableLm TableLm::load(const std::string& path, const decode::Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TableLm: cannot open " + path);
    TableLm lm;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto arrow = line.find("->");
        if (arrow == std::string::npos)
            throw std::runtime_error("TableLm: missing '->' in: " + line);
        std::istringstream left(line.substr(0, arrow));
        std::istringstream right(line.substr(arrow + 2));
        std::vector<decode::TokenId> suffix;
        bool wildcard = false;
        std::string tok;
        while (left >> tok) {
            if (tok == "*") {
                wildcard = true;
            } else {
                suffix.push_back(vocab.id_of(tok));
            }
        }
        decode::Logits logits;
        double x;
        while (right >> x) logits.push_back(x);
        if (logits.size() != vocab.size())
            throw std::runtime_error("TableLm: expected one logit per vocab token in: " + line);
        if (wildcard && suffix.empty()) {
            lm.fallback = std::move(logits);
            lm.has_fallback = true;
        } else {
            lm.rules.push_back({std::move(suffix), std::move(logits)});
        }
    }
    if (!lm.has_fallback)
        throw std::runtime_error("TableLm: fixture needs a '*' fallback line");
    return lm;
}

decode::Logits TableLm::operator()(std::span<const decode::TokenId> context) const {
    const Rule* best = nullptr;
    for (const auto& rule : rules) {
        if (rule.suffix.size() > context.size()) continue;
        bool match = true;
        size_t off = context.size() - rule.suffix.size();
        for (size_t i = 0; i < rule.suffix.size(); ++i) {
            if (context[off + i] != rule.suffix[i]) {
                match = false;
                break;
            }
        }
        if (match && (!best || rule.suffix.size() > best->suffix.size())) best = &rule;
    }
    return best ? best->logits : fallback;
}

TempDir::TempDir(const std::string& prefix) {
    auto root = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
        auto candidate = root / (prefix + "-" + std::to_string(rd()));
        std::error_code ec;
        if (std::filesystem::create_directory(candidate, ec)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("TempDir: could not create scratch directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace testsupport
