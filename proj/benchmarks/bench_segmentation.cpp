#include <benchmark/benchmark.h>

#include "memloom/segmentation.hpp"
#include "memloom/synth.hpp"

namespace seg = memloom::seg;

static void BM_KtsSegmentFull(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto [features, planted] =
        memloom::synth::gen_feature_stream(7, n, 8, {n / 3, 2 * n / 3}, 0.05);
    seg::KtsParams params;
    params.max_segments = 10;
    for (auto _ : state) {
        auto result = seg::kts_segment_full(features, params);
        benchmark::DoNotOptimize(result.total_scatter);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_KtsSegmentFull)->Arg(60)->Arg(120)->Arg(240)->Complexity();

static void BM_KernelLinear(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto [features, planted] =
        memloom::synth::gen_feature_stream(3, n, 8, {n / 2}, 0.05);
    for (auto _ : state) {
        auto kernel = seg::Kernel::linear(features, true);
        benchmark::DoNotOptimize(kernel.values.data());
    }
}
BENCHMARK(BM_KernelLinear)->Arg(60)->Arg(240);

static void BM_ContentScore(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    auto a = memloom::synth::solid_frame(side, side, 10, 20, 30);
    auto b = memloom::synth::solid_frame(side, side, 200, 180, 160);
    const std::array<double, 3> weights{1.0, 1.0, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(seg::content_score(a, b, weights));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * side * side * 6);
}
BENCHMARK(BM_ContentScore)->Arg(64)->Arg(256);

static void BM_DetectContentCuts(benchmark::State& state) {
    std::vector<double> scores(static_cast<size_t>(state.range(0)));
    for (size_t i = 0; i < scores.size(); ++i) {
        scores[i] = (i % 97 == 0) ? 50.0 : 5.0;
    }
    for (auto _ : state) {
        auto cuts = seg::detect_content_cuts(scores, 27.0, 15);
        benchmark::DoNotOptimize(cuts.values.data());
    }
}
BENCHMARK(BM_DetectContentCuts)->Arg(1000)->Arg(100000);
