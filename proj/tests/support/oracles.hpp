#pragma once

// Independent reference implementations used to cross-check the library, plus
// small fixtures shared by the unit and acceptance suites. Everything here is
// deliberately naive: exhaustive enumeration instead of DP, linear scans
// instead of clever data structures.

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "memloom/decoding.hpp"
#include "memloom/segmentation.hpp"

namespace testsupport {

struct BruteSegmentation {
    std::vector<int> boundaries;  // internal change points, frame indices
    double scatter = 0.0;
    int num_segments = 1;
    double objective = 0.0;
    // Best scatter over placements other than `boundaries`; +inf when m == 1
    // leaves a single placement. A gap between this and `scatter` proves the
    // optimum is unique, so callers know when comparing argmins is meaningful.
    double second_scatter = std::numeric_limits<double>::infinity();
};

/// Total within-segment scatter of one placement. `boundaries` lists the
/// internal change points (segment start indices, excluding 0) in increasing
/// order; segments cover [0,b1), [b1,b2), ..., [bk,n).
double placement_scatter(const memloom::seg::Kernel& kernel,
                         const std::vector<int>& boundaries);

/// Exhaustively enumerates all C(n-1, m-1) placements of m-1 internal change
/// points and returns the minimum-scatter segmentation. Exact scatter ties
/// keep the placement whose last differing change point is smaller, matching
/// the DP's earliest-minimizer rule. Near-ties below rounding noise make the
/// argmin order-dependent, which is what `second_scatter` lets callers detect.
BruteSegmentation brute_kts_fixed(const memloom::seg::Kernel& kernel, int m);

/// Runs brute_kts_fixed for every m in 1..max_segments and picks the m that
/// minimizes scatter + penalty * m * (log(n/m) + 1). Ties go to fewer segments.
BruteSegmentation brute_kts_full(const memloom::seg::Kernel& kernel, int max_segments,
                                 double penalty);

/// Deterministic random feature stream (uniform components in [-1, 1]).
memloom::seg::FeatureSequence random_features(int n, int dim, uint64_t seed);

/// Suffix-matched logit table backing an LmOracle, loaded from a text fixture:
///
///   # comment
///   A B -> 0.5 2.0 1.0
///   * -> 3.0 1.0 0.0
///
/// Left side is a context suffix ("*" matches everything, including an empty
/// context); right side lists one logit per vocabulary token. The longest
/// matching suffix wins; earlier lines win length ties.
struct TableLm {
    struct Rule {
        std::vector<memloom::decode::TokenId> suffix;
        memloom::decode::Logits logits;
    };
    std::vector<Rule> rules;
    memloom::decode::Logits fallback;
    bool has_fallback = false;

    static TableLm load(const std::string& path, const memloom::decode::Vocabulary& vocab);

    memloom::decode::Logits operator()(std::span<const memloom::decode::TokenId> context) const;
};

/// Self-deleting scratch directory under the system temp root.
class TempDir {
  public:
    explicit TempDir(const std::string& prefix);
    ~TempDir();

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

}  // namespace testsupport
