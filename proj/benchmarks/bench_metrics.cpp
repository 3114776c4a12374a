#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "memloom/metrics.hpp"
#include "memloom/mocks.hpp"
#include "memloom/synth.hpp"

namespace metrics = memloom::metrics;

namespace {

// Caption-sized sentence pairs drawn from a scripted world's transcripts.
std::vector<std::pair<std::string, std::string>> caption_pairs(size_t count) {
    auto world = memloom::synth::gen_mock_world(
        {.seed = 13, .duration = 4.0 * static_cast<double>(count), .chunk_len = 4.0});
    std::vector<std::pair<std::string, std::string>> pairs;
    for (size_t i = 0; i < world.actions.size() && pairs.size() < count; ++i) {
        const std::string& ref = world.actions[i].text;
        std::string hyp = ref + " slowly";  // near miss
        pairs.emplace_back(hyp, ref);
    }
    return pairs;
}

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
    const std::string text =
        "The wearer cuts the onion, rinses the knife, and wipes the counter. Then "
        "they open the fridge!";
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::tokenize(text));
    }
}
BENCHMARK(BM_Tokenize);

static void BM_Bleu4Corpus(benchmark::State& state) {
    auto pairs = caption_pairs(static_cast<size_t>(state.range(0)));
    std::vector<std::string> hyps, refs;
    for (auto& [h, r] : pairs) {
        hyps.push_back(h);
        refs.push_back(r);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::bleu4(hyps, refs));
    }
}
BENCHMARK(BM_Bleu4Corpus)->Arg(16)->Arg(128);

static void BM_RougeL(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::rouge_l(
            "the wearer cuts the onion on the board near the sink",
            "the wearer slices an onion on a cutting board by the sink"));
    }
}
BENCHMARK(BM_RougeL);

static void BM_Meteor(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::meteor(
            "the wearer cuts the onion on the board near the sink",
            "the wearer slices an onion on a cutting board by the sink"));
    }
}
BENCHMARK(BM_Meteor);

static void BM_SimilarityReport(benchmark::State& state) {
    auto pairs = caption_pairs(static_cast<size_t>(state.range(0)));
    memloom::backend::MockEmbedder embedder(64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::caption_similarity_report(pairs, embedder));
    }
}
BENCHMARK(BM_SimilarityReport)->Arg(16)->Arg(64);
