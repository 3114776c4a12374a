#include "memloom/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace memloom::decode {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens_) {
    Vocabulary v;
    v.tokens = std::move(tokens_);
    for (size_t i = 0; i < v.tokens.size(); ++i) {
        auto [it, inserted] = v.ids.emplace(v.tokens[i], static_cast<TokenId>(i));
        if (!inserted) {
            throw ArgumentError("duplicate token in vocabulary: " + v.tokens[i]);
        }
    }
    return v;
}

TokenId Vocabulary::id_of(const std::string& token) const {
    auto it = ids.find(token);
    if (it == ids.end()) {
        throw ConfigError("token not registered in vocabulary: " + token);
    }
    return it->second;
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
    auto it = ids.find(token);
    if (it == ids.end()) return std::nullopt;
    return it->second;
}

void GenerationConfig::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ArgumentError("temperature must be positive");
    }
    if (repetition_penalty < 1.0 || !std::isfinite(repetition_penalty)) {
        throw ArgumentError("repetition penalty must be >= 1");
    }
    if (max_new_tokens < 1) {
        throw ArgumentError("max_new_tokens must be positive");
    }
}

Logits apply_repetition_penalty(Logits logits, const std::unordered_set<TokenId>& history,
                                double theta) {
    if (theta < 1.0 || !std::isfinite(theta)) {
        throw ArgumentError("repetition penalty must be >= 1");
    }
    if (theta == 1.0) {
        return logits;
    }
    for (TokenId id : history) {
        if (id < 0 || static_cast<size_t>(id) >= logits.size()) continue;
        double& x = logits[id];
        if (x > 0.0) {
            x /= theta;
        } else if (x < 0.0) {
            x *= theta;
        }
    }
    return logits;
}

std::vector<double> next_distribution(const Logits& logits,
                                      const std::unordered_set<TokenId>& history,
                                      const GenerationConfig& cfg) {
    cfg.validate();
    if (logits.empty()) {
        throw ArgumentError("logits must be non-empty");
    }
    for (double x : logits) {
        if (!std::isfinite(x)) {
            throw ArgumentError("logits must be finite");
        }
    }
    Logits scaled = apply_repetition_penalty(logits, history, cfg.repetition_penalty);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double& x : scaled) {
        x /= cfg.temperature;
        max_logit = std::max(max_logit, x);
    }
    double sum = 0.0;
    for (double& x : scaled) {
        x = std::exp(x - max_logit);
        sum += x;
    }
    for (double& x : scaled) {
        x /= sum;
    }
    return scaled;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; keeps sampling independent
// of the library's distribution implementations.
double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t pick_index(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

}  // namespace

std::vector<TokenId> generate(const LmOracle& lm, std::span<const TokenId> prompt,
                              const GenerationConfig& cfg) {
    cfg.validate();
    if (prompt.empty()) {
        throw ArgumentError("prompt must be non-empty");
    }
    if (!lm) {
        throw ArgumentError("language-model oracle must be callable");
    }

    std::vector<TokenId> sequence(prompt.begin(), prompt.end());
    std::vector<TokenId> generated;
    std::unordered_set<TokenId> history;
    std::mt19937_64 rng(cfg.seed);

    for (int step = 0; step < cfg.max_new_tokens; ++step) {
        Logits logits = lm(sequence);
        if (logits.empty()) {
            throw ProtocolError("language model returned empty logits");
        }
        std::vector<double> probs = next_distribution(logits, history, cfg);

        TokenId next;
        if (cfg.mode == DecodeMode::Greedy) {
            size_t best = 0;
            for (size_t i = 1; i < probs.size(); ++i) {
                if (probs[i] > probs[best]) best = i;
            }
            next = static_cast<TokenId>(best);
        } else {
            next = static_cast<TokenId>(pick_index(probs, uniform53(rng)));
        }

        if (cfg.stop_ids.count(next)) {
            break;
        }
        generated.push_back(next);
        sequence.push_back(next);
        history.insert(next);
    }
    return generated;
}

std::vector<TokenId> control_prelude(CaptionKind kind, const Vocabulary& vocab) {
    auto id = vocab.find(control_surface(kind));
    if (!id) {
        throw ConfigError("control token not registered: " + control_surface(kind));
    }
    return {*id};
}

}  // namespace memloom::decode
