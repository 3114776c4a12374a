#include "memloom/memory_log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "memloom/util.hpp"

using nlohmann::json;

namespace memloom {

namespace {

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Scene sorts before Action at equal timestamps.
int kind_rank(CaptionKind kind) {
    return kind == CaptionKind::Scene ? 0 : 1;
}

auto entry_key(const CaptionEntry& e) {
    return std::make_tuple(e.at, kind_rank(e.kind), std::cref(e.text), std::cref(e.source));
}

}  // namespace

TimeInterval::TimeInterval(double start_s, double end_s) : start(start_s), end(end_s) {
    if (!std::isfinite(start) || !std::isfinite(end)) {
        throw ArgumentError("interval endpoints must be finite");
    }
    if (start < 0.0) {
        throw ArgumentError("interval start must be non-negative");
    }
    if (end <= start) {
        throw ArgumentError("interval end must exceed start");
    }
}

const char* to_string(CaptionKind kind) {
    return kind == CaptionKind::Scene ? "scene" : "action";
}

const std::string& control_surface(CaptionKind kind) {
    static const std::string acx = "[ACX]";
    static const std::string scx = "[SCX]";
    return kind == CaptionKind::Scene ? scx : acx;
}

ControlToken ControlToken::action() {
    return ControlToken{CaptionKind::Action, "[ACX]"};
}

ControlToken ControlToken::scene() {
    return ControlToken{CaptionKind::Scene, "[SCX]"};
}

ControlToken ControlToken::from_surface(const std::string& surface) {
    if (surface == "[ACX]") return action();
    if (surface == "[SCX]") return scene();
    throw ArgumentError("unknown control token surface: " + surface);
}

CaptionEntry::CaptionEntry(double at_s, CaptionKind k, std::string text_, std::string source_)
    : at(at_s), kind(k), text(strip(text_)), source(std::move(source_)) {
    if (!std::isfinite(at) || at < 0.0) {
        throw ArgumentError("caption timestamp must be finite and non-negative");
    }
    if (text.empty()) {
        throw ArgumentError("caption text must be non-empty");
    }
}

CaptionLog::CaptionLog(std::string video_id_, double duration_s)
    : video_id(std::move(video_id_)), duration(duration_s) {
    if (!std::isfinite(duration) || duration <= 0.0) {
        throw ArgumentError("log duration must be positive and finite");
    }
}

void CaptionLog::insert(const CaptionEntry& entry) {
    if (entry.at >= duration) {
        throw OutOfRangeError("entry timestamp " + format_seconds(entry.at) +
                              " outside [0, " + format_seconds(duration) + ")");
    }
    auto pos = std::upper_bound(entries.begin(), entries.end(), entry,
                                [](const CaptionEntry& a, const CaptionEntry& b) {
                                    return entry_key(a) < entry_key(b);
                                });
    entries.insert(pos, entry);
}

CaptionLog log_insert(CaptionLog log, const CaptionEntry& entry) {
    log.insert(entry);
    return log;
}

std::string format_timestamp(double seconds) {
    auto total = static_cast<long long>(std::floor(seconds));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld", total / 60, total % 60);
    return buf;
}

std::string render_log(const CaptionLog& log) {
    std::string out;
    for (size_t i = 0; i < log.entries.size(); ++i) {
        const CaptionEntry& e = log.entries[i];
        if (i > 0) out += '\n';
        out += "t=" + format_timestamp(e.at);
        out += e.kind == CaptionKind::Scene ? " [SCENE] " : " [ACTION] ";
        out += e.text;
    }
    return out;
}

ParsedLogLine parse_log_line(const std::string& line) {
    if (line.rfind("t=", 0) != 0) {
        throw ArgumentError("log line must start with \"t=\": " + line);
    }
    size_t colon = line.find(':', 2);
    if (colon == std::string::npos) {
        throw ArgumentError("log line missing \":\" in timestamp: " + line);
    }
    size_t space = line.find(' ', colon);
    if (space == std::string::npos || space != colon + 3) {
        throw ArgumentError("log line timestamp must be MM:SS: " + line);
    }
    long long minutes = 0, secs = 0;
    try {
        minutes = std::stoll(line.substr(2, colon - 2));
        secs = std::stoll(line.substr(colon + 1, 2));
    } catch (const std::exception&) {
        throw ArgumentError("non-numeric timestamp in log line: " + line);
    }
    if (minutes < 0 || secs < 0 || secs > 59) {
        throw ArgumentError("timestamp out of range in log line: " + line);
    }

    ParsedLogLine parsed;
    parsed.total_seconds = static_cast<int>(minutes * 60 + secs);

    const std::string action_tag = "[ACTION] ";
    const std::string scene_tag = "[SCENE] ";
    std::string rest = line.substr(space + 1);
    if (rest.rfind(action_tag, 0) == 0) {
        parsed.kind = CaptionKind::Action;
        parsed.text = rest.substr(action_tag.size());
    } else if (rest.rfind(scene_tag, 0) == 0) {
        parsed.kind = CaptionKind::Scene;
        parsed.text = rest.substr(scene_tag.size());
    } else {
        throw ArgumentError("log line missing [ACTION]/[SCENE] tag: " + line);
    }
    if (parsed.text.empty()) {
        throw ArgumentError("log line has empty text: " + line);
    }
    return parsed;
}

void McqTask::validate() const {
    if (question.empty()) {
        throw ArgumentError("task question must be non-empty");
    }
    for (const std::string& opt : options) {
        if (opt.empty()) {
            throw ArgumentError("task options must be non-empty");
        }
    }
    if (gold && (*gold < 0 || *gold > 4)) {
        throw ArgumentError("gold index must be in [0,4]");
    }
}

namespace {

json entry_to_json(const CaptionEntry& e) {
    return json{{"at", e.at}, {"kind", to_string(e.kind)}, {"text", e.text}, {"source", e.source}};
}

CaptionKind kind_from_string(const std::string& s) {
    if (s == "action") return CaptionKind::Action;
    if (s == "scene") return CaptionKind::Scene;
    throw ArgumentError("unknown caption kind: " + s);
}

}  // namespace

std::string caption_log_to_jsonl(const CaptionLog& log) {
    std::string out = json{{"video_id", log.video_id}, {"duration", log.duration}}.dump();
    for (const CaptionEntry& e : log.entries) {
        out += '\n';
        out += entry_to_json(e).dump();
    }
    out += '\n';
    return out;
}

CaptionLog caption_log_from_jsonl(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("caption log file is empty");
    }
    CaptionLog log;
    try {
        json header = json::parse(line);
        log = CaptionLog(header.at("video_id").get<std::string>(),
                         header.at("duration").get<double>());
        while (std::getline(in, line)) {
            if (strip(line).empty()) continue;
            json j = json::parse(line);
            log.insert(CaptionEntry(j.at("at").get<double>(),
                                    kind_from_string(j.at("kind").get<std::string>()),
                                    j.at("text").get<std::string>(),
                                    j.value("source", "unknown")));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed caption log: ") + e.what());
    }
    return log;
}

void save_caption_log(const CaptionLog& log, const std::string& path) {
    write_file_atomic(path, caption_log_to_jsonl(log));
}

CaptionLog load_caption_log(const std::string& path) {
    return caption_log_from_jsonl(read_file(path));
}

std::vector<McqTask> tasks_from_jsonl(const std::string& content) {
    std::vector<McqTask> tasks;
    std::istringstream in(content);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("task line " + std::to_string(line_no) + ": " + e.what());
        }
        McqTask task;
        task.id = j.value("id", "task-" + std::to_string(tasks.size()));
        if (!j.contains("question") || !j.contains("options")) {
            throw ArgumentError("task line " + std::to_string(line_no) +
                                ": question and options are required");
        }
        task.question = j.at("question").get<std::string>();
        const json& opts = j.at("options");
        if (!opts.is_array() || opts.size() != 5) {
            throw ArgumentError("task line " + std::to_string(line_no) +
                                ": exactly five options required");
        }
        for (size_t i = 0; i < 5; ++i) {
            task.options[i] = opts[i].get<std::string>();
        }
        if (j.contains("gold") && !j.at("gold").is_null()) {
            task.gold = j.at("gold").get<int>();
        }
        task.validate();
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<McqTask> load_tasks(const std::string& path) {
    return tasks_from_jsonl(read_file(path));
}

std::string tasks_to_jsonl(const std::vector<McqTask>& tasks) {
    std::string out;
    for (const McqTask& t : tasks) {
        json j{{"id", t.id}, {"question", t.question}, {"options", t.options}};
        if (t.gold) j["gold"] = *t.gold;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace memloom
