#include "memloom/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "memloom/util.hpp"

namespace memloom::seg {

FeatureSequence::FeatureSequence(int n_frames, int dim_, double fps_)
    : n(n_frames), dim(dim_), fps(fps_), data(static_cast<size_t>(n_frames) * dim_, 0.0f) {
    if (n < 1 || dim < 1) {
        throw ArgumentError("feature sequence needs n >= 1 and dim >= 1");
    }
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw ArgumentError("fps must be positive and finite");
    }
}

void FeatureSequence::validate() const {
    if (n < 1 || dim < 1) {
        throw ArgumentError("feature sequence needs n >= 1 and dim >= 1");
    }
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw ArgumentError("fps must be positive and finite");
    }
    if (data.size() != static_cast<size_t>(n) * dim) {
        throw ArgumentError("feature data size does not match n*dim");
    }
    for (float v : data) {
        if (!std::isfinite(v)) {
            throw ArgumentError("feature values must be finite");
        }
    }
}

FrameRaster::FrameRaster(int w, int h)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {
    if (w < 1 || h < 1) {
        throw ArgumentError("raster dimensions must be positive");
    }
}

void BoundarySet::validate() const {
    for (size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw ArgumentError("boundaries must be finite and non-negative");
        }
        if (i > 0 && values[i] <= values[i - 1]) {
            throw ArgumentError("boundaries must be strictly increasing");
        }
    }
}

BoundarySet segment_uniform(double duration, double interval) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ArgumentError("duration must be positive");
    }
    if (!(interval > 0.0) || !std::isfinite(interval)) {
        throw ArgumentError("interval must be positive");
    }
    BoundarySet out;
    out.domain = BoundaryDomain::Seconds;
    for (long long k = 0;; ++k) {
        double t = static_cast<double>(k) * interval;
        if (t >= duration) break;
        out.values.push_back(t);
    }
    return out;
}

double content_score(const FrameRaster& prev, const FrameRaster& cur,
                     const std::array<double, 3>& weights) {
    if (prev.width != cur.width || prev.height != cur.height) {
        throw ArgumentError("frame dimensions must match");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ArgumentError("channel weights must be non-negative");
        }
        wsum += w;
    }
    if (wsum <= 0.0) {
        throw ArgumentError("channel weights must not all be zero");
    }

    const size_t count = prev.pixel_count();
    double mad[3] = {0.0, 0.0, 0.0};
    for (size_t p = 0; p < count; ++p) {
        for (int c = 0; c < 3; ++c) {
            int d = static_cast<int>(prev.pixels[p * 3 + c]) -
                    static_cast<int>(cur.pixels[p * 3 + c]);
            mad[c] += std::abs(d);
        }
    }
    double score = 0.0;
    for (int c = 0; c < 3; ++c) {
        score += weights[c] * (mad[c] / static_cast<double>(count));
    }
    return score / wsum;
}

BoundarySet detect_content_cuts(const std::vector<double>& scores, double threshold,
                                int min_scene_len) {
    if (!(threshold > 0.0)) {
        throw ArgumentError("threshold must be positive");
    }
    if (min_scene_len < 1) {
        throw ArgumentError("min_scene_len must be at least 1");
    }
    BoundarySet out;
    out.domain = BoundaryDomain::Frames;
    std::optional<long long> last;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] < threshold) continue;
        long long frame = static_cast<long long>(i) + 1;
        if (last && frame - *last < min_scene_len) continue;
        out.values.push_back(static_cast<double>(frame));
        last = frame;
    }
    return out;
}

Kernel Kernel::linear(const FeatureSequence& features, bool l2_normalize) {
    features.validate();
    const int n = features.n;
    const int dim = features.dim;

    std::vector<double> rows(static_cast<size_t>(n) * dim);
    for (int i = 0; i < n; ++i) {
        const float* src = features.frame(i);
        double* dst = rows.data() + static_cast<size_t>(i) * dim;
        double norm_sq = 0.0;
        for (int d = 0; d < dim; ++d) {
            dst[d] = src[d];
            norm_sq += dst[d] * dst[d];
        }
        if (l2_normalize && norm_sq > 0.0) {
            double inv = 1.0 / std::sqrt(norm_sq);
            for (int d = 0; d < dim; ++d) dst[d] *= inv;
        }
    }

    Kernel k;
    k.n = n;
    k.values.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* xi = rows.data() + static_cast<size_t>(i) * dim;
        for (int j = i; j < n; ++j) {
            const double* xj = rows.data() + static_cast<size_t>(j) * dim;
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += xi[d] * xj[d];
            k.at(i, j) = dot;
            k.at(j, i) = dot;
        }
    }
    return k;
}

double kts_scatter(const Kernel& kernel, int a, int b) {
    if (a < 0 || b < a || b >= kernel.n) {
        throw OutOfRangeError("scatter indices out of range");
    }
    double diag = 0.0;
    double block = 0.0;
    for (int i = a; i <= b; ++i) {
        diag += kernel.at(i, i);
        for (int j = a; j <= b; ++j) {
            block += kernel.at(i, j);
        }
    }
    return diag - block / static_cast<double>(b - a + 1);
}

namespace {

// Scatter of every prefix-closed segment via cumulative sums:
// v(a, b) = (D[b+1]-D[a]) - (S(a..b, a..b)) / len, with S from a 2D prefix table.
struct ScatterTable {
    int n = 0;
    std::vector<double> diag_prefix;  // n+1
    std::vector<double> block_prefix; // (n+1)*(n+1)

    explicit ScatterTable(const Kernel& k) : n(k.n) {
        diag_prefix.assign(n + 1, 0.0);
        for (int i = 0; i < n; ++i) diag_prefix[i + 1] = diag_prefix[i] + k.at(i, i);

        block_prefix.assign(static_cast<size_t>(n + 1) * (n + 1), 0.0);
        auto bp = [&](int i, int j) -> double& {
            return block_prefix[static_cast<size_t>(i) * (n + 1) + j];
        };
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j) {
                bp(i, j) = k.at(i - 1, j - 1) + bp(i - 1, j) + bp(i, j - 1) - bp(i - 1, j - 1);
            }
        }
    }

    // inclusive frame range [a, b]
    double scatter(int a, int b) const {
        int len = b - a + 1;
        double diag = diag_prefix[b + 1] - diag_prefix[a];
        const auto& p = block_prefix;
        auto bp = [&](int i, int j) { return p[static_cast<size_t>(i) * (n + 1) + j]; };
        double block = bp(b + 1, b + 1) - bp(a, b + 1) - bp(b + 1, a) + bp(a, a);
        return diag - block / static_cast<double>(len);
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

KtsResult kts_segment_fixed(const Kernel& kernel, int m) {
    const int n = kernel.n;
    if (n < 1) {
        throw ArgumentError("empty kernel");
    }
    if (m < 1 || m > n) {
        throw ArgumentError("segment count must be in [1, n]");
    }
    ScatterTable table(kernel);

    // cost[k][j]: best scatter splitting the first j frames into k segments.
    // Backpointer keeps the start of the last segment. Strict '<' keeps the
    // earliest minimizing change point, so results are deterministic.
    std::vector<std::vector<double>> cost(m + 1, std::vector<double>(n + 1, kInf));
    std::vector<std::vector<int>> back(m + 1, std::vector<int>(n + 1, -1));
    cost[0][0] = 0.0;
    for (int k = 1; k <= m; ++k) {
        for (int j = k; j <= n; ++j) {
            double best = kInf;
            int best_t = -1;
            for (int t = k - 1; t <= j - 1; ++t) {
                if (cost[k - 1][t] == kInf) continue;
                double c = cost[k - 1][t] + table.scatter(t, j - 1);
                if (c < best) {
                    best = c;
                    best_t = t;
                }
            }
            cost[k][j] = best;
            back[k][j] = best_t;
        }
    }

    KtsResult result;
    result.num_segments = m;
    result.total_scatter = cost[m][n];
    result.boundaries.domain = BoundaryDomain::Frames;
    int j = n;
    for (int k = m; k >= 1; --k) {
        int t = back[k][j];
        if (k > 1) result.boundaries.values.push_back(static_cast<double>(t));
        j = t;
    }
    std::reverse(result.boundaries.values.begin(), result.boundaries.values.end());
    return result;
}

KtsResult kts_segment_full(const FeatureSequence& features, const KtsParams& params) {
    features.validate();
    if (params.max_segments < 1) {
        throw ArgumentError("max_segments must be at least 1");
    }
    if (params.penalty_weight < 0.0 || !std::isfinite(params.penalty_weight)) {
        throw ArgumentError("penalty_weight must be non-negative");
    }
    const int n = features.n;
    const int max_m = std::min(params.max_segments, n);

    Kernel kernel = Kernel::linear(features, params.l2_normalize);
    ScatterTable table(kernel);

    // One DP sweep gives cost[k][j] for every k <= max_m; model selection
    // then scores each m with the penalized objective.
    std::vector<std::vector<double>> cost(max_m + 1, std::vector<double>(n + 1, kInf));
    std::vector<std::vector<int>> back(max_m + 1, std::vector<int>(n + 1, -1));
    cost[0][0] = 0.0;
    for (int k = 1; k <= max_m; ++k) {
        for (int j = k; j <= n; ++j) {
            double best = kInf;
            int best_t = -1;
            for (int t = k - 1; t <= j - 1; ++t) {
                if (cost[k - 1][t] == kInf) continue;
                double c = cost[k - 1][t] + table.scatter(t, j - 1);
                if (c < best) {
                    best = c;
                    best_t = t;
                }
            }
            cost[k][j] = best;
            back[k][j] = best_t;
        }
    }

    int chosen_m = 1;
    double chosen_objective = kInf;
    for (int m = 1; m <= max_m; ++m) {
        double penalty = params.penalty_weight * m *
                         (std::log(static_cast<double>(n) / m) + 1.0);
        double objective = cost[m][n] + penalty;
        if (objective < chosen_objective) {
            chosen_objective = objective;
            chosen_m = m;
        }
    }

    KtsResult result;
    result.num_segments = chosen_m;
    result.total_scatter = cost[chosen_m][n];
    result.objective = chosen_objective;
    result.boundaries.domain = BoundaryDomain::Frames;
    int j = n;
    for (int k = chosen_m; k >= 1; --k) {
        int t = back[k][j];
        if (k > 1) result.boundaries.values.push_back(static_cast<double>(t));
        j = t;
    }
    std::reverse(result.boundaries.values.begin(), result.boundaries.values.end());
    return result;
}

BoundarySet kts_segment(const FeatureSequence& features, int max_segments,
                        double penalty_weight) {
    KtsParams params;
    params.max_segments = max_segments;
    params.penalty_weight = penalty_weight;
    return kts_segment_full(features, params).boundaries;
}

BoundarySet boundaries_to_seconds(const BoundarySet& boundaries, double fps) {
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw ArgumentError("fps must be positive");
    }
    if (boundaries.domain != BoundaryDomain::Frames) {
        throw ArgumentError("boundaries_to_seconds expects frame-domain input");
    }
    BoundarySet out;
    out.domain = BoundaryDomain::Seconds;
    out.values.reserve(boundaries.values.size());
    for (double frame : boundaries.values) {
        out.values.push_back(frame / fps);
    }
    return out;
}

// ---- file I/O ----

namespace {

void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32(const std::string& data, size_t offset) {
    return static_cast<uint32_t>(static_cast<unsigned char>(data[offset])) |
           (static_cast<uint32_t>(static_cast<unsigned char>(data[offset + 1])) << 8) |
           (static_cast<uint32_t>(static_cast<unsigned char>(data[offset + 2])) << 16) |
           (static_cast<uint32_t>(static_cast<unsigned char>(data[offset + 3])) << 24);
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(const std::string& data, size_t offset) {
    uint32_t bits = get_u32(data, offset);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

FeatureSequence load_feature_csv(const std::string& path) {
    std::string meta_path = path + ".meta.json";
    double fps = 1.0;
    try {
        nlohmann::json meta = nlohmann::json::parse(read_file(meta_path));
        fps = meta.at("fps").get<double>();
    } catch (const IoError&) {
        throw IoError("feature CSV needs a sidecar: " + meta_path);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed sidecar " + meta_path + ": " + e.what());
    }

    std::istringstream in(read_file(path));
    std::string line;
    std::vector<float> data;
    int dim = -1;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int row_dim = 0;
        while (std::getline(row, cell, ',')) {
            try {
                data.push_back(std::stof(cell));
            } catch (const std::exception&) {
                throw IoError("non-numeric cell in " + path + ": " + cell);
            }
            ++row_dim;
        }
        if (dim == -1) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw IoError("ragged rows in feature CSV: " + path);
        }
        ++n;
    }
    if (n == 0 || dim < 1) {
        throw IoError("feature CSV is empty: " + path);
    }
    FeatureSequence features(n, dim, fps);
    features.data = std::move(data);
    features.validate();
    return features;
}

}  // namespace

void save_feature_sequence(const FeatureSequence& features, const std::string& path) {
    features.validate();
    std::string out;
    out.reserve(16 + features.data.size() * 4);
    out += "FSEQ";
    put_u32(out, static_cast<uint32_t>(features.n));
    put_u32(out, static_cast<uint32_t>(features.dim));
    put_f32(out, static_cast<float>(features.fps));
    for (float v : features.data) put_f32(out, v);
    write_file_atomic(path, out);
}

FeatureSequence load_feature_sequence(const std::string& path) {
    if (ends_with(path, ".csv")) {
        return load_feature_csv(path);
    }
    std::string data = read_file(path);
    if (data.size() < 16 || data.compare(0, 4, "FSEQ") != 0) {
        throw IoError("not a FSEQ file: " + path);
    }
    uint32_t n = get_u32(data, 4);
    uint32_t dim = get_u32(data, 8);
    float fps = get_f32(data, 12);
    size_t expected = 16 + static_cast<size_t>(n) * dim * 4;
    if (n < 1 || dim < 1 || data.size() != expected) {
        throw IoError("truncated or corrupt FSEQ file: " + path);
    }
    FeatureSequence features(static_cast<int>(n), static_cast<int>(dim), fps);
    for (size_t i = 0; i < static_cast<size_t>(n) * dim; ++i) {
        features.data[i] = get_f32(data, 16 + i * 4);
    }
    features.validate();
    return features;
}

void save_raster_stream(const std::vector<FrameRaster>& frames, const std::string& path) {
    if (frames.empty()) {
        throw ArgumentError("raster stream must contain at least one frame");
    }
    const int w = frames.front().width;
    const int h = frames.front().height;
    std::string out;
    out += "RGB8";
    put_u32(out, static_cast<uint32_t>(w));
    put_u32(out, static_cast<uint32_t>(h));
    put_u32(out, static_cast<uint32_t>(frames.size()));
    for (const FrameRaster& f : frames) {
        if (f.width != w || f.height != h) {
            throw ArgumentError("all frames in a stream must share dimensions");
        }
        out.append(reinterpret_cast<const char*>(f.pixels.data()), f.pixels.size());
    }
    write_file_atomic(path, out);
}

std::vector<FrameRaster> load_raster_stream(const std::string& path) {
    std::string data = read_file(path);
    if (data.size() < 16 || data.compare(0, 4, "RGB8") != 0) {
        throw IoError("not an RGB8 stream: " + path);
    }
    uint32_t w = get_u32(data, 4);
    uint32_t h = get_u32(data, 8);
    uint32_t count = get_u32(data, 12);
    size_t frame_bytes = static_cast<size_t>(w) * h * 3;
    if (w < 1 || h < 1 || count < 1 || data.size() != 16 + frame_bytes * count) {
        throw IoError("truncated or corrupt RGB8 stream: " + path);
    }
    std::vector<FrameRaster> frames;
    frames.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        FrameRaster f(static_cast<int>(w), static_cast<int>(h));
        std::memcpy(f.pixels.data(), data.data() + 16 + frame_bytes * i, frame_bytes);
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace memloom::seg
