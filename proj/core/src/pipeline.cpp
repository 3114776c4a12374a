#include "memloom/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "memloom/util.hpp"

using nlohmann::json;

namespace memloom::pipe {

std::vector<TimeInterval> chunk_timeline(double duration, double chunk_len) {
    if (!(duration > 0.0)) {
        throw ArgumentError("duration must be positive");
    }
    if (!(chunk_len > 0.0)) {
        throw ArgumentError("chunk length must be positive");
    }
    std::vector<TimeInterval> chunks;
    for (double start = 0.0; start < duration; start += chunk_len) {
        double end = std::min(start + chunk_len, duration);
        if (end - start < 1.0 && start > 0.0) {
            break;  // drop sub-second tail
        }
        chunks.push_back(TimeInterval{start, end});
    }
    return chunks;
}

BoundaryStrategy uniform_strategy(double interval) {
    if (!(interval > 0.0)) {
        throw ArgumentError("boundary interval must be positive");
    }
    return [interval](double duration) {
        seg::BoundarySet set;
        set.domain = seg::BoundaryDomain::Seconds;
        for (double t = 0.0; t < duration; t += interval) {
            set.values.push_back(t);
        }
        return set;
    };
}

BoundaryStrategy no_boundaries() {
    return [](double) {
        return seg::BoundarySet{seg::BoundaryDomain::Seconds, {}};
    };
}

BoundaryStrategy fixed_boundaries(std::vector<double> boundaries_s) {
    std::sort(boundaries_s.begin(), boundaries_s.end());
    boundaries_s.erase(std::unique(boundaries_s.begin(), boundaries_s.end()),
                       boundaries_s.end());
    return [boundaries = std::move(boundaries_s)](double duration) {
        seg::BoundarySet set;
        set.domain = seg::BoundaryDomain::Seconds;
        for (double b : boundaries) {
            if (b < duration) set.values.push_back(b);
        }
        return set;
    };
}

namespace {

struct CaptionRequest {
    CaptionKind kind;
    TimeInterval span{0.0, 1.0};  // chunk, or boundary-to-next-boundary segment
};

}  // namespace

CaptionLog build_memory(const VideoSource& video, const BoundaryStrategy& segmenter,
                        backend::ActionCaptioner& action_backend,
                        backend::SceneDescriber* scene_backend,
                        const BuildMemoryOptions& options) {
    if (video.video_id.empty()) {
        throw ArgumentError("video id must be non-empty");
    }
    if (!(video.duration > 0.0)) {
        throw ArgumentError("video duration must be positive");
    }
    if (options.max_concurrency < 1) {
        throw ConfigError("max_concurrency must be at least 1");
    }
    if (!segmenter) {
        throw ConfigError("boundary strategy is required");
    }

    std::vector<CaptionRequest> requests;
    for (const TimeInterval& chunk : chunk_timeline(video.duration, options.chunk_len)) {
        requests.push_back(CaptionRequest{CaptionKind::Action, chunk});
    }

    if (options.scene_captions) {
        seg::BoundarySet boundaries = segmenter(video.duration);
        if (boundaries.domain != seg::BoundaryDomain::Seconds) {
            throw ConfigError("boundary strategy must yield boundaries in seconds");
        }
        boundaries.validate();
        std::vector<double> kept;
        for (double b : boundaries.values) {
            if (b < video.duration) kept.push_back(b);
        }
        if (!kept.empty() && options.mode == CaptionerMode::Ensemble &&
            scene_backend == nullptr) {
            throw ConfigError("ensemble mode needs a scene describer");
        }
        for (size_t i = 0; i < kept.size(); ++i) {
            // A scene request spans from its boundary to the next (or the end);
            // backends read the frame at the span's start.
            double end = i + 1 < kept.size() ? kept[i + 1] : video.duration;
            requests.push_back(
                CaptionRequest{CaptionKind::Scene, TimeInterval{kept[i], end}});
        }
    }

    auto run_one = [&](const CaptionRequest& req) -> std::string {
        backend::ClipRef clip{video.video_id, req.span, video.media};
        if (req.kind == CaptionKind::Action) {
            if (options.mode == CaptionerMode::Hybrid) {
                return action_backend.caption_action(clip, ControlToken::action());
            }
            return action_backend.caption_action(clip, std::nullopt);
        }
        if (options.mode == CaptionerMode::Hybrid) {
            return action_backend.caption_action(clip, ControlToken::scene());
        }
        return scene_backend->describe_scene(clip, options.scene_prompt);
    };

    std::vector<std::string> results(requests.size());
    size_t fail_index = requests.size();
    std::string fail_reason;

    int workers = std::min<int>(options.max_concurrency, static_cast<int>(requests.size()));
    if (workers <= 1) {
        for (size_t i = 0; i < requests.size(); ++i) {
            try {
                results[i] = run_one(requests[i]);
            } catch (const Error& e) {
                fail_index = i;
                fail_reason = e.what();
                break;
            }
        }
    } else {
        // Indices are handed out in order, so the smallest failing index has
        // only successful requests below it — a deterministic abort point.
        std::atomic<size_t> next{0};
        std::mutex fail_mutex;
        auto worker = [&]() {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= requests.size()) return;
                {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (fail_index < i) return;
                }
                try {
                    results[i] = run_one(requests[i]);
                } catch (const Error& e) {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (i < fail_index) {
                        fail_index = i;
                        fail_reason = e.what();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    if (fail_index < requests.size()) {
        std::ostringstream msg;
        msg << "memory build aborted after " << fail_index << " of " << requests.size()
            << " captions: " << fail_reason;
        throw PipelineAbortError(msg.str(), static_cast<int>(fail_index));
    }

    CaptionLog log;
    log.video_id = video.video_id;
    log.duration = video.duration;
    for (size_t i = 0; i < requests.size(); ++i) {
        const std::string& source = requests[i].kind == CaptionKind::Action
                                        ? options.action_source
                                        : options.scene_source;
        log.insert(CaptionEntry(requests[i].span.start, requests[i].kind, results[i], source));
    }
    return log;
}

std::string qa_prompt(const CaptionLog& log, const McqTask& task) {
    task.validate();
    std::ostringstream out;
    out << "You are given a timestamped log of a first-person video.\n";
    out << render_log(log) << "\n";
    out << "Question: " << task.question << "\n";
    out << "Options:\n";
    for (int i = 0; i < 5; ++i) {
        out << i << ") " << task.options[static_cast<size_t>(i)] << "\n";
    }
    out << "Reply with the single option number.";
    return out.str();
}

int parse_choice(const std::string& completion) {
    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    auto standalone = [&](size_t i) {
        bool left_ok = i == 0 || !is_word_char(completion[i - 1]);
        bool right_ok = i + 1 >= completion.size() || !is_word_char(completion[i + 1]);
        return left_ok && right_ok;
    };
    for (size_t i = 0; i < completion.size(); ++i) {
        char c = completion[i];
        if (c >= '0' && c <= '4' && standalone(i)) {
            return c - '0';
        }
    }
    for (size_t i = 0; i < completion.size(); ++i) {
        char upper = static_cast<char>(
            std::toupper(static_cast<unsigned char>(completion[i])));
        if (upper >= 'A' && upper <= 'E' && standalone(i)) {
            return upper - 'A';
        }
    }
    throw AnswerParseError("no option index in completion", completion);
}

int answer_question(const CaptionLog& log, const McqTask& task,
                    backend::Completer& reasoner, const QaOptions& options) {
    std::string prompt = qa_prompt(log, task);
    if (prompt.size() > options.prompt_char_budget) {
        std::ostringstream msg;
        msg << "prompt is " << prompt.size() << " chars, budget is "
            << options.prompt_char_budget;
        throw PromptBudgetError(msg.str());
    }
    return parse_choice(reasoner.complete(prompt));
}

// ---- distillation ----

int scene_sample_frame_index(int n_frames, int sample_count) {
    if (n_frames < 1) {
        throw ArgumentError("clip needs at least one frame");
    }
    if (sample_count < 1) {
        throw ArgumentError("sample count must be positive");
    }
    double center = (sample_count / 2 + 0.5) * static_cast<double>(n_frames) / sample_count;
    return static_cast<int>(std::floor(center));
}

std::vector<DistillRecord> build_distillation_dataset(
    const std::vector<DistillClip>& clips, backend::SceneDescriber& scene_backend,
    const std::vector<GtAction>& gt_actions, const PipelineDefaults& defaults,
    DistillStats* stats) {
    DistillStats local;
    std::vector<DistillRecord> records;

    for (const DistillClip& clip : clips) {
        if (clip.n_frames < 1) {
            ++local.skipped_clips;
            continue;
        }
        if (!(clip.fps > 0.0)) {
            throw ArgumentError("clip fps must be positive");
        }
        int frame = scene_sample_frame_index(clip.n_frames, defaults.distill_sample_frames);
        double t = clip.interval.start + frame / clip.fps;
        // One-frame span; describers read the frame at the span's start.
        backend::ClipRef ref{clip.video_id, TimeInterval{t, t + 1.0 / clip.fps}, clip.media};
        std::string text = scene_backend.describe_scene(ref, defaults.scene_prompt);
        records.push_back(DistillRecord{clip.video_id, t,
                                        control_surface(CaptionKind::Scene), text});
        ++local.scene_records;
    }

    for (const GtAction& action : gt_actions) {
        if (action.text.empty()) {
            throw ArgumentError("ground-truth action text must be non-empty");
        }
        if (action.end_s < action.start_s) {
            throw ArgumentError("ground-truth action interval is inverted");
        }
        records.push_back(DistillRecord{action.video_id, action.start_s,
                                        control_surface(CaptionKind::Action), action.text});
        ++local.action_records;
    }

    if (records.empty()) {
        throw ArgumentError("no usable clips or ground-truth actions");
    }
    if (stats) *stats = local;
    return records;
}

namespace {

json parse_jsonl_line(const std::string& line, size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        std::ostringstream msg;
        msg << "malformed JSON on line " << line_no << ": " << e.what();
        throw IoError(msg.str());
    }
}

template <typename Fn>
void for_each_jsonl(const std::string& content, Fn&& fn) {
    size_t start = 0;
    size_t line_no = 0;
    while (start <= content.size()) {
        size_t end = content.find('\n', start);
        std::string line = content.substr(
            start, end == std::string::npos ? std::string::npos : end - start);
        ++line_no;
        if (!line.empty()) {
            fn(parse_jsonl_line(line, line_no), line_no);
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
}

}  // namespace

std::vector<DistillClip> distill_clips_from_jsonl(const std::string& content) {
    std::vector<DistillClip> clips;
    for_each_jsonl(content, [&](const json& j, size_t line_no) {
        try {
            DistillClip clip;
            clip.video_id = j.at("video_id").get<std::string>();
            clip.interval = TimeInterval{j.at("start_s").get<double>(),
                                         j.at("end_s").get<double>()};
            clip.n_frames = j.at("n_frames").get<int>();
            if (j.contains("fps")) clip.fps = j.at("fps").get<double>();
            if (j.contains("media")) clip.media = j.at("media").get<std::string>();
            clips.push_back(std::move(clip));
        } catch (const json::exception& e) {
            std::ostringstream msg;
            msg << "bad clip record on line " << line_no << ": " << e.what();
            throw IoError(msg.str());
        }
    });
    return clips;
}

std::vector<GtAction> gt_actions_from_jsonl(const std::string& content) {
    std::vector<GtAction> actions;
    for_each_jsonl(content, [&](const json& j, size_t line_no) {
        try {
            GtAction action;
            action.video_id = j.at("video_id").get<std::string>();
            action.start_s = j.at("start_s").get<double>();
            action.end_s = j.at("end_s").get<double>();
            action.text = j.at("text").get<std::string>();
            actions.push_back(std::move(action));
        } catch (const json::exception& e) {
            std::ostringstream msg;
            msg << "bad ground-truth record on line " << line_no << ": " << e.what();
            throw IoError(msg.str());
        }
    });
    return actions;
}

std::string distill_records_to_jsonl(const std::vector<DistillRecord>& records) {
    std::string out;
    for (const DistillRecord& r : records) {
        json j{{"video_id", r.video_id}, {"t", r.t}, {"control", r.control}, {"text", r.text}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<DistillRecord> distill_records_from_jsonl(const std::string& content) {
    std::vector<DistillRecord> records;
    for_each_jsonl(content, [&](const json& j, size_t line_no) {
        try {
            DistillRecord r;
            r.video_id = j.at("video_id").get<std::string>();
            r.t = j.at("t").get<double>();
            r.control = j.at("control").get<std::string>();
            r.text = j.at("text").get<std::string>();
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            std::ostringstream msg;
            msg << "bad dataset record on line " << line_no << ": " << e.what();
            throw IoError(msg.str());
        }
    });
    return records;
}

}  // namespace memloom::pipe
