#include "memloom/mocks.hpp"

#include <cmath>
#include <optional>

#include "json.hpp"
#include "memloom/util.hpp"

using nlohmann::json;

namespace memloom::backend {

namespace {

std::string mock_text(const char* kind, const ClipRef& clip) {
    return std::string(kind) + " " + clip.video_id + "@" + format_seconds(clip.interval.start);
}

const TimedText* find_timed(const std::vector<TimedText>& entries, double t) {
    for (const TimedText& e : entries) {
        if (std::abs(e.t - t) < 1e-9) return &e;
    }
    return nullptr;
}

}  // namespace

std::string MockActionCaptioner::caption_action(const ClipRef& clip,
                                                const std::optional<ControlToken>& control) {
    if (control && control->kind == CaptionKind::Scene) {
        throw ProtocolError("action-only captioner cannot serve control token " +
                            control->surface);
    }
    return mock_text("mock-action", clip);
}

std::string MockHybridCaptioner::caption_action(const ClipRef& clip,
                                                const std::optional<ControlToken>& control) {
    if (control && control->kind == CaptionKind::Scene) {
        return mock_text("mock-scene", clip);
    }
    return mock_text("mock-action", clip);
}

std::string MockSceneDescriber::describe_scene(const ClipRef& frame, const std::string& prompt) {
    last_prompt_ = prompt;
    return mock_text("mock-scene", frame);
}

MockEmbedder::MockEmbedder(int dim) : dim_(dim) {
    if (dim < 1) {
        throw ArgumentError("embedding dimension must be positive");
    }
}

std::vector<std::vector<double>> MockEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw ArgumentError("embed requires at least one text");
    }
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        uint64_t state = fnv1a64(text);
        std::vector<double> v(dim_);
        double norm_sq = 0.0;
        for (int d = 0; d < dim_; ++d) {
            uint64_t bits = splitmix64(state);
            double u = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
            v[d] = 2.0 * u - 1.0;
            norm_sq += v[d] * v[d];
        }
        if (norm_sq == 0.0) {
            v[0] = 1.0;
            norm_sq = 1.0;
        }
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : v) x *= inv;
        out.push_back(std::move(v));
    }
    return out;
}

std::string ConstCompleter::complete(const std::string&) {
    return text_;
}

ScriptedCompleter::ScriptedCompleter(std::vector<std::pair<std::string, int>> keyed_answers,
                                     std::string fallback)
    : keyed_answers_(std::move(keyed_answers)), fallback_(std::move(fallback)) {}

std::string ScriptedCompleter::complete(const std::string& prompt) {
    for (const auto& [key, gold] : keyed_answers_) {
        if (prompt.find(key) != std::string::npos) {
            return "Answer: " + std::to_string(gold);
        }
    }
    return fallback_;
}

// ---- scripted world ----

namespace {

json timed_to_json(const std::vector<TimedText>& entries) {
    json arr = json::array();
    for (const TimedText& e : entries) {
        arr.push_back(json{{"t", e.t}, {"text", e.text}});
    }
    return arr;
}

std::vector<TimedText> timed_from_json(const json& arr) {
    std::vector<TimedText> out;
    for (const json& e : arr) {
        out.push_back(TimedText{e.at("t").get<double>(), e.at("text").get<std::string>()});
    }
    return out;
}

}  // namespace

std::string ScriptedWorld::to_json() const {
    json tasks_json = json::array();
    for (const McqTask& t : tasks) {
        json j{{"id", t.id}, {"question", t.question}, {"options", t.options}};
        if (t.gold) j["gold"] = *t.gold;
        tasks_json.push_back(std::move(j));
    }
    json j{{"video_id", video_id},
           {"duration", duration},
           {"chunk_len", chunk_len},
           {"boundaries_s", boundaries_s},
           {"actions", timed_to_json(actions)},
           {"scenes", timed_to_json(scenes)},
           {"tasks", std::move(tasks_json)}};
    return j.dump(2) + "\n";
}

ScriptedWorld ScriptedWorld::from_json(const std::string& content) {
    ScriptedWorld world;
    try {
        json j = json::parse(content);
        world.video_id = j.at("video_id").get<std::string>();
        world.duration = j.at("duration").get<double>();
        world.chunk_len = j.at("chunk_len").get<double>();
        world.boundaries_s = j.at("boundaries_s").get<std::vector<double>>();
        world.actions = timed_from_json(j.at("actions"));
        world.scenes = timed_from_json(j.at("scenes"));
        for (const json& tj : j.at("tasks")) {
            McqTask task;
            task.id = tj.at("id").get<std::string>();
            task.question = tj.at("question").get<std::string>();
            const json& opts = tj.at("options");
            if (!opts.is_array() || opts.size() != 5) {
                throw ArgumentError("world task needs exactly five options");
            }
            for (size_t i = 0; i < 5; ++i) task.options[i] = opts[i].get<std::string>();
            if (tj.contains("gold")) task.gold = tj.at("gold").get<int>();
            world.tasks.push_back(std::move(task));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed world transcript: ") + e.what());
    }
    return world;
}

void ScriptedWorld::save(const std::string& path) const {
    write_file_atomic(path, to_json());
}

ScriptedWorld ScriptedWorld::load(const std::string& path) {
    return from_json(read_file(path));
}

ScriptedActionCaptioner::ScriptedActionCaptioner(const ScriptedWorld& world, bool hybrid)
    : world_(world), hybrid_(hybrid) {}

std::string ScriptedActionCaptioner::caption_action(const ClipRef& clip,
                                                    const std::optional<ControlToken>& control) {
    if (control && control->kind == CaptionKind::Scene) {
        if (!hybrid_) {
            throw ProtocolError("action-only captioner cannot serve control token " +
                                control->surface);
        }
        const TimedText* scene = find_timed(world_.scenes, clip.interval.start);
        if (!scene) {
            throw ProtocolError("no scripted scene at t=" +
                                format_seconds(clip.interval.start));
        }
        return scene->text;
    }
    const TimedText* action = find_timed(world_.actions, clip.interval.start);
    if (!action) {
        throw ProtocolError("no scripted action at t=" + format_seconds(clip.interval.start));
    }
    return action->text;
}

ScriptedSceneDescriber::ScriptedSceneDescriber(const ScriptedWorld& world) : world_(world) {}

std::string ScriptedSceneDescriber::describe_scene(const ClipRef& frame, const std::string&) {
    const TimedText* scene = find_timed(world_.scenes, frame.interval.start);
    if (!scene) {
        throw ProtocolError("no scripted scene at t=" + format_seconds(frame.interval.start));
    }
    return scene->text;
}

// ---- oracle reasoner ----

namespace {

struct PromptView {
    // (seconds, kind) -> caption text, from the log section
    std::vector<std::tuple<int, CaptionKind, std::string>> log_lines;
    std::string question;
    std::array<std::string, 5> options;
    bool options_complete = false;
};

std::optional<int> timestamp_in(const std::string& text) {
    size_t pos = text.find("t=");
    if (pos == std::string::npos) return std::nullopt;
    size_t colon = text.find(':', pos);
    if (colon == std::string::npos) return std::nullopt;
    try {
        int minutes = std::stoi(text.substr(pos + 2, colon - pos - 2));
        int seconds = std::stoi(text.substr(colon + 1, 2));
        return minutes * 60 + seconds;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

PromptView scan_prompt(const std::string& prompt) {
    PromptView view;
    size_t start = 0;
    int options_seen = 0;
    while (start <= prompt.size()) {
        size_t end = prompt.find('\n', start);
        std::string line = prompt.substr(
            start, end == std::string::npos ? std::string::npos : end - start);
        if (line.rfind("t=", 0) == 0) {
            try {
                ParsedLogLine parsed = parse_log_line(line);
                view.log_lines.emplace_back(parsed.total_seconds, parsed.kind, parsed.text);
            } catch (const ArgumentError&) {
                // not a log line after all; ignore
            }
        } else if (line.rfind("Question: ", 0) == 0) {
            view.question = line.substr(10);
        } else if (line.size() > 3 && line[0] >= '0' && line[0] <= '4' && line[1] == ')' &&
                   line[2] == ' ') {
            view.options[line[0] - '0'] = line.substr(3);
            ++options_seen;
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    view.options_complete = options_seen == 5;
    return view;
}

}  // namespace

std::string OracleReasoner::complete(const std::string& prompt) {
    PromptView view = scan_prompt(prompt);
    if (view.question.empty() || !view.options_complete) {
        return "unanswerable";
    }
    std::optional<int> asked = timestamp_in(view.question);
    if (!asked) {
        return "unanswerable";
    }
    CaptionKind kind = view.question.find("scene") != std::string::npos ? CaptionKind::Scene
                                                                        : CaptionKind::Action;
    for (const auto& [seconds, line_kind, text] : view.log_lines) {
        if (seconds != *asked || line_kind != kind) continue;
        for (int i = 0; i < 5; ++i) {
            if (view.options[i] == text) {
                return std::to_string(i);
            }
        }
    }
    return "unanswerable";
}

}  // namespace backend
