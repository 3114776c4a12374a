#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memloom/backends.hpp"
#include "memloom/memory_log.hpp"

namespace memloom::backend {

// Deterministic stand-ins for the four model roles. They ship with the
// library (not just the tests) so the whole pipeline runs offline.

/// Pure function of its inputs: "mock-action <video>@<t>".
/// Rejects scene control tokens; see MockHybridCaptioner for those.
class MockActionCaptioner final : public ActionCaptioner {
public:
    std::string caption_action(const ClipRef& clip,
                               const std::optional<ControlToken>& control = {}) override;
};

/// Honors control tokens the way a finetuned hybrid captioner would:
/// [SCX] yields "mock-scene <video>@<t>", otherwise "mock-action <video>@<t>".
class MockHybridCaptioner final : public ActionCaptioner {
public:
    std::string caption_action(const ClipRef& clip,
                               const std::optional<ControlToken>& control = {}) override;
};

/// Pure function of its inputs: "mock-scene <video>@<t>". Records the last
/// prompt it was given.
class MockSceneDescriber final : public SceneDescriber {
public:
    std::string describe_scene(const ClipRef& frame, const std::string& prompt) override;

    const std::string& last_prompt() const { return last_prompt_; }

private:
    std::string last_prompt_;
};

/// Hash-derived unit vectors: identical texts map to identical vectors.
class MockEmbedder final : public Embedder {
public:
    explicit MockEmbedder(int dim = 16);

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    int dim_;
};

/// Always returns the same completion, whatever the prompt.
class ConstCompleter final : public Completer {
public:
    explicit ConstCompleter(std::string text) : text_(std::move(text)) {}

    std::string complete(const std::string& prompt) override;

private:
    std::string text_;
};

/// Keyed completions: replies "Answer: <gold>" for the first key found in the
/// prompt, falls back to a fixed default otherwise.
class ScriptedCompleter final : public Completer {
public:
    ScriptedCompleter(std::vector<std::pair<std::string, int>> keyed_answers,
                      std::string fallback = "unanswerable");

    std::string complete(const std::string& prompt) override;

private:
    std::vector<std::pair<std::string, int>> keyed_answers_;
    std::string fallback_;
};

struct TimedText {
    double t = 0.0;
    std::string text;
};

/// A scripted mock universe: per-chunk action strings, per-boundary scene
/// strings, and tasks whose gold answers can be read off the rendered log.
/// Serialized as a single JSON document (the mock transcript file).
struct ScriptedWorld {
    std::string video_id;
    double duration = 0.0;
    double chunk_len = 4.0;
    std::vector<double> boundaries_s;
    std::vector<TimedText> actions;  // keyed by chunk start time
    std::vector<TimedText> scenes;   // keyed by boundary time
    std::vector<McqTask> tasks;

    std::string to_json() const;
    static ScriptedWorld from_json(const std::string& content);
    void save(const std::string& path) const;
    static ScriptedWorld load(const std::string& path);
};

/// Replays the world's action transcript; with hybrid enabled it also serves
/// [SCX] requests from the scene transcript.
class ScriptedActionCaptioner final : public ActionCaptioner {
public:
    explicit ScriptedActionCaptioner(const ScriptedWorld& world, bool hybrid = false);

    std::string caption_action(const ClipRef& clip,
                               const std::optional<ControlToken>& control = {}) override;

private:
    const ScriptedWorld& world_;
    bool hybrid_;
};

class ScriptedSceneDescriber final : public SceneDescriber {
public:
    explicit ScriptedSceneDescriber(const ScriptedWorld& world);

    std::string describe_scene(const ClipRef& frame, const std::string& prompt) override;

private:
    const ScriptedWorld& world_;
};

/// Answers multiple-choice prompts by exact string lookup: extracts the
/// timestamp from the question, finds that log line inside the prompt, and
/// replies with the number of the option matching its text. Needs nothing
/// but the prompt, so it exercises the full prompt/rendering path.
class OracleReasoner final : public Completer {
public:
    std::string complete(const std::string& prompt) override;
};

}  // namespace memloom::backend
