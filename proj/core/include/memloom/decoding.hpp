#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "memloom/errors.hpp"
#include "memloom/memory_log.hpp"

namespace memloom::decode {

using TokenId = int32_t;
using Logits = std::vector<double>;

/// Token table with the two control tokens registered at known ids.
struct Vocabulary {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, TokenId> ids;

    static Vocabulary from_tokens(std::vector<std::string> tokens);

    TokenId id_of(const std::string& token) const;      // throws ConfigError when absent
    std::optional<TokenId> find(const std::string& token) const;
    size_t size() const { return tokens.size(); }
};

enum class DecodeMode : uint8_t {
    Greedy,
    Sample,
};

struct GenerationConfig {
    double temperature = 1.0;
    double repetition_penalty = 3.0;  // >= 1
    int max_new_tokens = 64;
    std::unordered_set<TokenId> stop_ids;
    DecodeMode mode = DecodeMode::Greedy;
    uint64_t seed = 0;  // Sample mode only

    void validate() const;  // throws ArgumentError
};

/// Sign-aware CTRL-style penalty: for every id in history, positive logits are
/// divided by theta and negative ones multiplied; zeros and non-history ids
/// are untouched. theta = 1 is the identity.
Logits apply_repetition_penalty(Logits logits, const std::unordered_set<TokenId>& history,
                                double theta);

/// softmax(apply_repetition_penalty(logits, history, theta) / T).
std::vector<double> next_distribution(const Logits& logits,
                                      const std::unordered_set<TokenId>& history,
                                      const GenerationConfig& cfg);

/// Language-model oracle: maps the full token sequence so far to next-token logits.
using LmOracle = std::function<Logits(std::span<const TokenId>)>;

/// Iterative decoding. Greedy picks the argmax of next_distribution (ties go
/// to the lowest id); Sample draws from it with a per-call mt19937_64 seeded
/// from cfg.seed. Stops on a stop id (excluded from the output) or after
/// max_new_tokens. The penalty history is the set of tokens generated by this
/// call; the prompt is never penalized.
std::vector<TokenId> generate(const LmOracle& lm, std::span<const TokenId> prompt,
                              const GenerationConfig& cfg);

/// Single-token control prelude for the caption kind ([ACX] / [SCX]).
/// Throws ConfigError when the vocabulary lacks the control token.
std::vector<TokenId> control_prelude(CaptionKind kind, const Vocabulary& vocab);

}  // namespace memloom::decode
