#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "memloom/mocks.hpp"
#include "memloom/segmentation.hpp"

namespace memloom::synth {

// Deterministic fixtures. All randomness comes from mt19937_64 seeded
// explicitly; Gaussian draws use the Marsaglia polar method on 53-bit
// uniforms, so a seed pins the stream byte-for-byte for a given build.

struct FeatureStreamSpec {
    uint64_t seed = 0;
    int n = 60;
    int dim = 8;
    std::vector<int> boundaries;  // planted internal change points, strictly increasing in (0, n)
    double noise_sigma = 0.0;
    double fps = 1.0;
};

/// Piecewise-constant unit-norm segment means (consecutive means at least 0.5
/// apart in L2) plus additive Gaussian noise. Returns the stream and the
/// planted boundaries (frame domain).
std::pair<seg::FeatureSequence, seg::BoundarySet> gen_feature_stream(
    const FeatureStreamSpec& spec);

std::pair<seg::FeatureSequence, seg::BoundarySet> gen_feature_stream(
    uint64_t seed, int n, int dim, const std::vector<int>& boundaries, double noise_sigma);

struct MockWorldSpec {
    uint64_t seed = 0;
    double duration = 48.0;
    double chunk_len = 4.0;
    std::vector<double> boundaries_s{0.0};
    std::string video_id;  // defaults to "synth-<seed>"
    int num_tasks = -1;    // -1: one per chunk, capped at 8
};

/// Scripted transcripts (unique per-chunk action strings, per-boundary scene
/// strings) and MCQ tasks whose gold option equals the scripted text at the
/// asked timestamp, so OracleReasoner answers every task correctly.
backend::ScriptedWorld gen_mock_world(const MockWorldSpec& spec);

/// Solid-color frame fixtures for the content detector.
seg::FrameRaster solid_frame(int width, int height, uint8_t r, uint8_t g, uint8_t b);

}  // namespace memloom::synth
