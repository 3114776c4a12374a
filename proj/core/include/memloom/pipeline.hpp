#pragma once

#include <functional>
#include <string>
#include <vector>

#include "memloom/backends.hpp"
#include "memloom/memory_log.hpp"
#include "memloom/segmentation.hpp"

namespace memloom::pipe {

/// Consecutive chunks [0,c), [c,2c), ...; a partial tail is kept only when it
/// is at least one second long.
std::vector<TimeInterval> chunk_timeline(double duration, double chunk_len);

/// Yields scene boundaries (seconds domain) for a video of the given duration.
using BoundaryStrategy = std::function<seg::BoundarySet(double duration)>;

BoundaryStrategy uniform_strategy(double interval);
BoundaryStrategy no_boundaries();
/// Wraps precomputed boundaries; values at or past the duration are dropped.
BoundaryStrategy fixed_boundaries(std::vector<double> boundaries_s);

struct VideoSource {
    std::string video_id;
    double duration = 0.0;
    std::string media;
};

enum class CaptionerMode {
    Ensemble,  // separate action captioner + scene describer
    Hybrid,    // one captioner, steered by control tokens
};

struct BuildMemoryOptions {
    double chunk_len = 4.0;
    bool scene_captions = true;
    CaptionerMode mode = CaptionerMode::Ensemble;
    std::string scene_prompt = PipelineDefaults{}.scene_prompt;
    int max_concurrency = 1;
    std::string action_source = "mock";
    std::string scene_source = "mock";
};

/// Runs the captioning flow: one action caption per chunk, one scene caption
/// per boundary (via the describer in Ensemble mode, via [SCX] control in
/// Hybrid mode). The resulting log is canonical and deterministic for fixed
/// inputs. A backend failure aborts with a PipelineAbortError whose message
/// carries the number of chunks completed.
CaptionLog build_memory(const VideoSource& video, const BoundaryStrategy& segmenter,
                        backend::ActionCaptioner& action_backend,
                        backend::SceneDescriber* scene_backend,
                        const BuildMemoryOptions& options = {});

struct QaOptions {
    size_t prompt_char_budget = 100000;  // fail loudly, never truncate
};

/// The fixed single-prompt Q&A template (version 1, frozen bytes):
///   You are given a timestamped log of a first-person video.
///   <rendered log>
///   Question: <question>
///   Options:
///   0) ...
///   ...
///   4) ...
///   Reply with the single option number.
std::string qa_prompt(const CaptionLog& log, const McqTask& task);

/// First standalone digit 0-4, else first standalone letter A-E (case
/// insensitive, mapped to 0-4), scanning left to right on word boundaries.
/// Throws AnswerParseError when nothing matches.
int parse_choice(const std::string& completion);

/// Renders the prompt, asks the reasoner, parses the option index.
int answer_question(const CaptionLog& log, const McqTask& task,
                    backend::Completer& reasoner, const QaOptions& options = {});

// ---- distillation dataset ----

struct DistillClip {
    std::string video_id;
    TimeInterval interval;
    int n_frames = 0;
    double fps = 30.0;
    std::string media;
};

struct GtAction {
    std::string video_id;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;
};

struct DistillRecord {
    std::string video_id;
    double t = 0.0;
    std::string control;  // "[ACX]" or "[SCX]"
    std::string text;
};

struct DistillStats {
    int scene_records = 0;
    int action_records = 0;
    int skipped_clips = 0;
};

/// Index of the center sample among `sample_count` uniform samples of an
/// n_frames clip: floor((sample_count/2 + 0.5) * n_frames / sample_count).
int scene_sample_frame_index(int n_frames, int sample_count = 32);

/// One [SCX] record per usable clip (scene text from the describer at the
/// center-sample frame) plus one [ACX] record per ground-truth action.
/// Clips without frames are skipped and counted; throws when nothing at all
/// was usable.
std::vector<DistillRecord> build_distillation_dataset(
    const std::vector<DistillClip>& clips, backend::SceneDescriber& scene_backend,
    const std::vector<GtAction>& gt_actions, const PipelineDefaults& defaults = {},
    DistillStats* stats = nullptr);

// Line-delimited JSON formats:
//   clips manifest:   {video_id, start_s, end_s, n_frames, fps}
//   ground truth:     {video_id, start_s, end_s, text}
//   dataset records:  {video_id, t, control, text}
std::vector<DistillClip> distill_clips_from_jsonl(const std::string& content);
std::vector<GtAction> gt_actions_from_jsonl(const std::string& content);
std::string distill_records_to_jsonl(const std::vector<DistillRecord>& records);
std::vector<DistillRecord> distill_records_from_jsonl(const std::string& content);

}  // namespace memloom::pipe
