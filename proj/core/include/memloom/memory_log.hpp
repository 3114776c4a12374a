#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memloom/errors.hpp"

namespace memloom {

/// Half-open time span [start, end) in seconds.
struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    TimeInterval() = default;
    TimeInterval(double start_s, double end_s);

    double length() const { return end - start; }
};

enum class CaptionKind : uint8_t {
    Action,
    Scene,
};

const char* to_string(CaptionKind kind);

/// Special vocabulary token steering a hybrid captioner toward one caption kind.
struct ControlToken {
    CaptionKind kind;
    std::string surface;

    static ControlToken action();  // "[ACX]"
    static ControlToken scene();   // "[SCX]"

    /// Maps a surface string back to a control token; throws ArgumentError
    /// for anything but "[ACX]" / "[SCX]".
    static ControlToken from_surface(const std::string& surface);
};

/// Surface string for a caption kind ("[ACX]" or "[SCX]").
const std::string& control_surface(CaptionKind kind);

/// One timestamped line of the textual memory.
/// Construction strips surrounding whitespace and rejects empty text.
struct CaptionEntry {
    double at = 0.0;
    CaptionKind kind = CaptionKind::Action;
    std::string text;
    std::string source;  // backend id or "mock"

    CaptionEntry() = default;
    CaptionEntry(double at_s, CaptionKind k, std::string text, std::string source = "mock");
};

/// The text-based memory of one video: an ordered multiset of caption entries.
///
/// Entries are kept in canonical order: ascending timestamp, Scene before
/// Action at equal timestamps, then text and source. The same multiset of
/// entries renders identically no matter the insertion order.
struct CaptionLog {
    std::string video_id;
    double duration = 0.0;
    std::vector<CaptionEntry> entries;

    CaptionLog() = default;
    CaptionLog(std::string video_id, double duration_s);

    /// Inserts preserving canonical order. Throws OutOfRangeError when
    /// entry.at >= duration.
    void insert(const CaptionEntry& entry);
};

/// Appends an entry to a copy of the log, canonical order preserved.
CaptionLog log_insert(CaptionLog log, const CaptionEntry& entry);

/// Formats whole seconds as zero-padded "MM:SS"; minutes widen past 99.
std::string format_timestamp(double seconds);

/// Serializes the log, one line per entry:
///   t=MM:SS [ACTION] <text>
///   t=MM:SS [SCENE] <text>
/// Lines in log order, no trailing newline.
std::string render_log(const CaptionLog& log);

struct ParsedLogLine {
    int total_seconds = 0;
    CaptionKind kind = CaptionKind::Action;
    std::string text;
};

/// Parses one rendered line back into (seconds, kind, text).
/// Throws ArgumentError on malformed input.
ParsedLogLine parse_log_line(const std::string& line);

/// A five-option multiple-choice question over one video.
struct McqTask {
    std::string id;
    std::string question;
    std::array<std::string, 5> options;
    std::optional<int> gold;  // index into options

    void validate() const;  // throws ArgumentError on bad gold index
};

/// Pipeline-wide constants and their defaults.
struct PipelineDefaults {
    double uniform_interval = 120.0;
    double repetition_penalty = 3.0;
    std::array<double, 5> penalty_sweep{1.0, 1.2, 1.5, 2.0, 3.0};
    std::string scene_prompt =
        "Describe the scene as specifically as possible focusing on objects and "
        "their properties and their relations to other objects in the scene. Be "
        "as concise as possible like you are writing a log.";
    int distill_sample_frames = 32;
    double chunk_len = 4.0;
};

// Line-delimited JSON persistence. First line is a header object
// {"video_id":..., "duration":...}; each further line is one entry
// {"at":..., "kind":"action"|"scene", "text":..., "source":...}.
std::string caption_log_to_jsonl(const CaptionLog& log);
CaptionLog caption_log_from_jsonl(const std::string& content);
void save_caption_log(const CaptionLog& log, const std::string& path);
CaptionLog load_caption_log(const std::string& path);

// Task files: one JSON object per line {id?, question, options:[5], gold?}.
std::vector<McqTask> tasks_from_jsonl(const std::string& content);
std::vector<McqTask> load_tasks(const std::string& path);
std::string tasks_to_jsonl(const std::vector<McqTask>& tasks);

}  // namespace memloom
