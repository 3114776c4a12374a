#include <benchmark/benchmark.h>

#include <random>

#include "memloom/decoding.hpp"

namespace decode = memloom::decode;

namespace {

decode::Logits random_logits(size_t vocab, uint64_t seed) {
    std::mt19937_64 rng(seed);
    decode::Logits logits(vocab);
    for (auto& x : logits) {
        x = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 10.0;
    }
    return logits;
}

}  // namespace

static void BM_RepetitionPenalty(benchmark::State& state) {
    const size_t vocab = static_cast<size_t>(state.range(0));
    auto logits = random_logits(vocab, 11);
    std::unordered_set<decode::TokenId> history;
    for (decode::TokenId id = 0; id < static_cast<decode::TokenId>(vocab / 8); ++id) {
        history.insert(id * 7 % static_cast<decode::TokenId>(vocab));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode::apply_repetition_penalty(logits, history, 3.0));
    }
}
BENCHMARK(BM_RepetitionPenalty)->Arg(1024)->Arg(32768);

static void BM_NextDistribution(benchmark::State& state) {
    auto logits = random_logits(static_cast<size_t>(state.range(0)), 12);
    std::unordered_set<decode::TokenId> history{1, 5, 9};
    decode::GenerationConfig cfg;
    cfg.repetition_penalty = 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode::next_distribution(logits, history, cfg));
    }
}
BENCHMARK(BM_NextDistribution)->Arg(1024)->Arg(32768);

static void BM_GenerateGreedy(benchmark::State& state) {
    const size_t vocab = 512;
    auto base = random_logits(vocab, 13);
    decode::LmOracle lm = [&](std::span<const decode::TokenId> ctx) {
        decode::Logits logits = base;
        // cheap context dependence so the oracle is not constant-foldable
        logits[ctx.size() % vocab] += 1.0;
        return logits;
    };
    decode::GenerationConfig cfg;
    cfg.max_new_tokens = static_cast<int>(state.range(0));
    cfg.repetition_penalty = 3.0;
    std::vector<decode::TokenId> prompt{0, 1, 2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode::generate(lm, prompt, cfg));
    }
}
BENCHMARK(BM_GenerateGreedy)->Arg(16)->Arg(64);

static void BM_GenerateSampled(benchmark::State& state) {
    const size_t vocab = 512;
    auto base = random_logits(vocab, 14);
    decode::LmOracle lm = [&](std::span<const decode::TokenId>) { return base; };
    decode::GenerationConfig cfg;
    cfg.mode = decode::DecodeMode::Sample;
    cfg.seed = 7;
    cfg.max_new_tokens = 64;
    std::vector<decode::TokenId> prompt{0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode::generate(lm, prompt, cfg));
    }
}
BENCHMARK(BM_GenerateSampled);
