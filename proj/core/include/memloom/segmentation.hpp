#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "memloom/errors.hpp"

namespace memloom::seg {

/// Per-frame real-valued feature vectors, row-major, with the fps that maps
/// frame index to seconds.
struct FeatureSequence {
    int n = 0;
    int dim = 0;
    double fps = 1.0;
    std::vector<float> data;  // n * dim, row-major

    FeatureSequence() = default;
    FeatureSequence(int n_frames, int dim_, double fps_);

    const float* frame(int i) const { return data.data() + static_cast<size_t>(i) * dim; }
    float* frame(int i) { return data.data() + static_cast<size_t>(i) * dim; }

    void validate() const;  // throws ArgumentError on bad shape or non-finite values
};

/// One RGB frame, 8 bits per channel, pixels packed row-major.
struct FrameRaster {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // width * height * 3, RGB interleaved

    FrameRaster() = default;
    FrameRaster(int w, int h);

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

enum class BoundaryDomain : uint8_t {
    Frames,
    Seconds,
};

/// Strictly increasing scene-change positions, either frame indices or
/// timestamps depending on the domain tag.
struct BoundarySet {
    BoundaryDomain domain = BoundaryDomain::Seconds;
    std::vector<double> values;

    void validate() const;  // strictly increasing, non-negative
};

/// Boundaries {0, interval, 2*interval, ...} below duration; always contains 0.
BoundarySet segment_uniform(double duration, double interval);

/// Weighted mean absolute per-pixel channel difference between two frames,
/// in [0, 255]. weights are per RGB channel, non-negative, not all zero.
double content_score(const FrameRaster& prev, const FrameRaster& cur,
                     const std::array<double, 3>& weights);

struct ContentDetectorParams {
    std::array<double, 3> weights{1.0, 1.0, 1.0};
    double threshold = 27.0;
    int min_scene_len = 15;  // frames
};

/// Thresholds adjacent-frame scores into cut positions. scores[i] compares
/// frames i and i+1; a crossing puts a boundary at frame i+1. After the first
/// emitted boundary, later ones must be at least min_scene_len frames apart.
BoundarySet detect_content_cuts(const std::vector<double>& scores, double threshold,
                                int min_scene_len);

/// Symmetric kernel matrix over frames.
struct Kernel {
    int n = 0;
    std::vector<double> values;  // n * n

    double at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }

    /// Gram matrix of the features; rows L2-normalized first when requested
    /// (zero rows are left untouched).
    static Kernel linear(const FeatureSequence& features, bool l2_normalize = true);
};

/// Within-segment scatter of frames [a, b] under kernel K:
///   sum_i K_ii - (1/(b-a+1)) * sum_{i,j} K_ij
/// For a linear kernel this equals sum ||x_i - mean||^2.
double kts_scatter(const Kernel& kernel, int a, int b);

struct KtsParams {
    int max_segments = 20;
    double penalty_weight = 1.0;
    bool l2_normalize = true;
};

struct KtsResult {
    BoundarySet boundaries;  // internal change points, frame domain
    int num_segments = 1;
    double total_scatter = 0.0;
    double objective = 0.0;  // scatter + penalty_weight * m * (log(n/m) + 1)
};

/// Kernel temporal segmentation: exact DP over change points for each
/// candidate segment count m in 1..max_segments, then picks the m minimizing
/// scatter + penalty_weight * m * (log(n/m) + 1). Ties go to fewer segments.
KtsResult kts_segment_full(const FeatureSequence& features, const KtsParams& params);
BoundarySet kts_segment(const FeatureSequence& features, int max_segments,
                        double penalty_weight);

/// Best segmentation with exactly m segments (penalty ignored).
/// Returned boundaries are the m-1 internal change points.
KtsResult kts_segment_fixed(const Kernel& kernel, int m);

/// Maps frame-domain boundaries to seconds (index / fps).
BoundarySet boundaries_to_seconds(const BoundarySet& boundaries, double fps);

// ---- file formats ----
//
// FeatureSequence binary (.fseq): little-endian, header "FSEQ",
// u32 n, u32 dim, f32 fps, then n*dim f32 row-major.
// CSV alternative: one frame per row; fps comes from a "<path>.meta.json"
// sidecar {"fps": ...}.
// FrameRaster stream (.rgb8): "RGB8", u32 width, u32 height, u32 count,
// then count packed frames of width*height*3 bytes.

void save_feature_sequence(const FeatureSequence& features, const std::string& path);
FeatureSequence load_feature_sequence(const std::string& path);

void save_raster_stream(const std::vector<FrameRaster>& frames, const std::string& path);
std::vector<FrameRaster> load_raster_stream(const std::string& path);

}  // namespace memloom::seg
