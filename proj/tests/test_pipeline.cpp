#include <atomic>
#include <set>

#include "doctest.h"
#include "memloom/mocks.hpp"
#include "memloom/pipeline.hpp"
#include "memloom/synth.hpp"
#include "support/oracles.hpp"

using namespace memloom;
using namespace memloom::pipe;
using backend::ClipRef;

namespace {

VideoSource video(const std::string& id, double duration) {
    VideoSource v;
    v.video_id = id;
    v.duration = duration;
    return v;
}

/// Fails every caption request whose chunk start matches `fail_at`.
class FailingCaptioner final : public backend::ActionCaptioner {
  public:
    explicit FailingCaptioner(double fail_at) : fail_at_(fail_at) {}

    std::string caption_action(const ClipRef& clip,
                               const std::optional<ControlToken>& control) override {
        if (clip.interval.start == fail_at_) {
            throw BackendError("captioner exploded", "mock", 3);
        }
        return inner_.caption_action(clip, control);
    }

  private:
    double fail_at_;
    backend::MockActionCaptioner inner_;
};

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("the timeline splits into fixed-length chunks") {
    auto chunks = chunk_timeline(180.0, 4.0);
    CHECK(chunks.size() == 45);
    CHECK(chunks.front().start == doctest::Approx(0.0));
    CHECK(chunks.front().end == doctest::Approx(4.0));
    CHECK(chunks.back().start == doctest::Approx(176.0));
    CHECK(chunks.back().end == doctest::Approx(180.0));
}

TEST_CASE("a tail of at least one second is kept") {
    auto chunks = chunk_timeline(10.0, 4.0);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[2].start == doctest::Approx(8.0));
    CHECK(chunks[2].end == doctest::Approx(10.0));
}

TEST_CASE("a tail shorter than one second is dropped") {
    auto chunks = chunk_timeline(8.5, 4.0);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[1].end == doctest::Approx(8.0));

    // Exactly one second survives.
    auto kept = chunk_timeline(9.0, 4.0);
    REQUIRE(kept.size() == 3);
    CHECK(kept[2].end == doctest::Approx(9.0));
}

TEST_CASE("chunking validates its arguments") {
    CHECK_THROWS_AS(chunk_timeline(0.0, 4.0), ArgumentError);
    CHECK_THROWS_AS(chunk_timeline(10.0, 0.0), ArgumentError);
}

TEST_CASE("boundary strategies") {
    auto uniform = uniform_strategy(120.0);
    CHECK(uniform(300.0).values == std::vector<double>{0.0, 120.0, 240.0});

    auto none = no_boundaries();
    CHECK(none(300.0).values.empty());

    auto fixed = fixed_boundaries({16.0, 0.0, 32.0, 16.0, 500.0});
    // Sorted, deduplicated, and clipped to the duration.
    CHECK(fixed(48.0).values == std::vector<double>{0.0, 16.0, 32.0});
}

TEST_CASE("a 12 second video with one boundary yields scene-then-actions") {
    backend::MockActionCaptioner actions;
    backend::MockSceneDescriber scenes;
    BuildMemoryOptions options;
    options.chunk_len = 4.0;

    CaptionLog log = build_memory(video("v1", 12.0), fixed_boundaries({0.0}), actions,
                                  &scenes, options);

    REQUIRE(log.entries.size() == 4);
    CHECK(log.entries[0].kind == CaptionKind::Scene);
    CHECK(log.entries[0].at == doctest::Approx(0.0));
    CHECK(log.entries[0].text == "mock-scene v1@0");
    CHECK(log.entries[1].kind == CaptionKind::Action);
    CHECK(log.entries[1].text == "mock-action v1@0");
    CHECK(log.entries[2].text == "mock-action v1@4");
    CHECK(log.entries[3].text == "mock-action v1@8");

    CHECK(render_log(log) ==
          "t=00:00 [SCENE] mock-scene v1@0\n"
          "t=00:00 [ACTION] mock-action v1@0\n"
          "t=00:04 [ACTION] mock-action v1@4\n"
          "t=00:08 [ACTION] mock-action v1@8");

    // The describer received the default scene prompt.
    CHECK(scenes.last_prompt() == PipelineDefaults{}.scene_prompt);
}

TEST_CASE("a three-minute video gets 45 action and 2 scene captions") {
    backend::MockActionCaptioner actions;
    backend::MockSceneDescriber scenes;
    CaptionLog log = build_memory(video("v1", 180.0), uniform_strategy(120.0), actions,
                                  &scenes, BuildMemoryOptions{});
    int n_scene = 0, n_action = 0;
    for (const auto& e : log.entries) {
        (e.kind == CaptionKind::Scene ? n_scene : n_action)++;
    }
    CHECK(n_action == 45);
    CHECK(n_scene == 2);
    CHECK(log.duration == doctest::Approx(180.0));
}

TEST_CASE("scene captions can be disabled") {
    backend::MockActionCaptioner actions;
    backend::MockSceneDescriber scenes;
    BuildMemoryOptions options;
    options.scene_captions = false;
    CaptionLog log = build_memory(video("v1", 12.0), fixed_boundaries({0.0, 4.0}), actions,
                                  &scenes, options);
    for (const auto& e : log.entries) CHECK(e.kind == CaptionKind::Action);
    CHECK(log.entries.size() == 3);
}

TEST_CASE("hybrid mode steers one captioner with control tokens") {
    backend::MockHybridCaptioner hybrid;
    BuildMemoryOptions options;
    options.mode = CaptionerMode::Hybrid;
    CaptionLog log = build_memory(video("v1", 12.0), fixed_boundaries({0.0}), hybrid,
                                  nullptr, options);
    REQUIRE(log.entries.size() == 4);
    CHECK(log.entries[0].text == "mock-scene v1@0");
    CHECK(log.entries[1].text == "mock-action v1@0");
}

TEST_CASE("ensemble mode without a describer rejects scene requests up front") {
    backend::MockActionCaptioner actions;
    BuildMemoryOptions options;
    options.mode = CaptionerMode::Ensemble;
    CHECK_THROWS_AS(build_memory(video("v1", 12.0), fixed_boundaries({0.0}), actions,
                                 nullptr, options),
                    ConfigError);
}

TEST_CASE("concurrent builds produce exactly the serial log") {
    auto world = synth::gen_mock_world({.seed = 5, .duration = 60.0, .chunk_len = 4.0,
                                        .boundaries_s = {0.0, 20.0, 40.0}});
    backend::ScriptedActionCaptioner actions(world);
    backend::ScriptedSceneDescriber scenes(world);

    BuildMemoryOptions serial;
    serial.max_concurrency = 1;
    serial.action_source = "scripted";
    serial.scene_source = "scripted";
    CaptionLog base = build_memory(video(world.video_id, world.duration),
                                   fixed_boundaries(world.boundaries_s), actions, &scenes,
                                   serial);

    for (int workers : {2, 4, 8}) {
        BuildMemoryOptions options = serial;
        options.max_concurrency = workers;
        CaptionLog log = build_memory(video(world.video_id, world.duration),
                                      fixed_boundaries(world.boundaries_s), actions, &scenes,
                                      options);
        CHECK(render_log(log) == render_log(base));
        CHECK(caption_log_to_jsonl(log) == caption_log_to_jsonl(base));
    }
}

TEST_CASE("a backend failure aborts the build and reports completed work") {
    // Chunks at 0,4,8,...,36; the one starting at 12 (index 3) fails.
    FailingCaptioner actions(12.0);
    BuildMemoryOptions options;
    options.scene_captions = false;
    try {
        build_memory(video("v1", 40.0), no_boundaries(), actions, nullptr, options);
        FAIL("expected PipelineAbortError");
    } catch (const PipelineAbortError& e) {
        CHECK(e.completed_chunks() == 3);
        CHECK(std::string(e.what()).find("captioner exploded") != std::string::npos);
    }

    // Same failure under concurrency still reports the same deterministic count.
    for (int workers : {2, 4}) {
        BuildMemoryOptions conc = options;
        conc.max_concurrency = workers;
        try {
            build_memory(video("v1", 40.0), no_boundaries(), actions, nullptr, conc);
            FAIL("expected PipelineAbortError");
        } catch (const PipelineAbortError& e) {
            CHECK(e.completed_chunks() == 3);
        }
    }
}

TEST_CASE("build_memory validates the video source") {
    backend::MockActionCaptioner actions;
    backend::MockSceneDescriber scenes;
    CHECK_THROWS_AS(build_memory(video("", 10.0), no_boundaries(), actions, &scenes),
                    ArgumentError);
    CHECK_THROWS_AS(build_memory(video("v1", 0.0), no_boundaries(), actions, &scenes),
                    ArgumentError);
}

TEST_CASE("the qa prompt is byte-stable") {
    CaptionLog log("v1", 60.0);
    log.insert(CaptionEntry(0.0, CaptionKind::Scene, "a kitchen"));
    log.insert(CaptionEntry(0.0, CaptionKind::Action, "enters"));

    McqTask task;
    task.id = "t0";
    task.question = "What happened at t=00:00?";
    task.options = {"enters", "leaves", "sits", "stands", "sleeps"};

    CHECK(qa_prompt(log, task) ==
          "You are given a timestamped log of a first-person video.\n"
          "t=00:00 [SCENE] a kitchen\n"
          "t=00:00 [ACTION] enters\n"
          "Question: What happened at t=00:00?\n"
          "Options:\n"
          "0) enters\n"
          "1) leaves\n"
          "2) sits\n"
          "3) stands\n"
          "4) sleeps\n"
          "Reply with the single option number.");
}

TEST_CASE("parse_choice reads digits, then letters, on word boundaries") {
    CHECK(parse_choice("Answer: 3") == 3);
    CHECK(parse_choice("3") == 3);
    CHECK(parse_choice("I pick option 2 because it fits.") == 2);
    CHECK(parse_choice("Option C is correct") == 2);
    CHECK(parse_choice("the answer is (B)") == 1);
    CHECK(parse_choice("e") == 4);
    // Digits win over letters even when a letter comes first.
    CHECK(parse_choice("A fine choice is 4") == 4);
    // Embedded digits are not standalone.
    CHECK_THROWS_AS(parse_choice("42"), AnswerParseError);
    CHECK_THROWS_AS(parse_choice("I cannot tell."), AnswerParseError);
    CHECK_THROWS_AS(parse_choice(""), AnswerParseError);
    CHECK_THROWS_AS(parse_choice("option 7"), AnswerParseError);

    try {
        parse_choice("no idea");
        FAIL("expected AnswerParseError");
    } catch (const AnswerParseError& e) {
        CHECK(e.completion() == "no idea");
    }
}

TEST_CASE("answer_question wires prompt, reasoner, and parser together") {
    CaptionLog log("v1", 60.0);
    log.insert(CaptionEntry(4.0, CaptionKind::Action, "slices bread"));

    McqTask task;
    task.question = "What happened at t=00:04?";
    task.options = {"slices bread", "pours tea", "reads", "sleeps", "runs"};

    backend::OracleReasoner oracle;
    CHECK(answer_question(log, task, oracle) == 0);

    backend::ConstCompleter always3("Answer: 3");
    CHECK(answer_question(log, task, always3) == 3);
}

TEST_CASE("prompts over the character budget fail loudly") {
    CaptionLog log("v1", 60.0);
    log.insert(CaptionEntry(0.0, CaptionKind::Action, std::string(500, 'x')));
    McqTask task;
    task.question = "What happened at t=00:00?";
    task.options = {"a", "b", "c", "d", "e"};

    backend::ConstCompleter reasoner("0");
    QaOptions options;
    options.prompt_char_budget = 100;
    CHECK_THROWS_AS(answer_question(log, task, reasoner, options), PromptBudgetError);

    options.prompt_char_budget = 100000;
    CHECK_NOTHROW(answer_question(log, task, reasoner, options));
}

TEST_CASE("the center sample lands where uniform frame sampling puts it") {
    // 32 uniform samples of a 64-frame clip: sample 16 sits at frame 33.
    CHECK(scene_sample_frame_index(64, 32) == 33);
    CHECK(scene_sample_frame_index(32, 32) == 16);
    CHECK(scene_sample_frame_index(1, 32) == 0);
    CHECK(scene_sample_frame_index(100, 32) == 51);
}

TEST_CASE("distillation emits one scene record per clip plus ground-truth actions") {
    backend::MockSceneDescriber scenes;
    std::vector<DistillClip> clips(2);
    clips[0] = {"v1", TimeInterval(0.0, 2.2), 64, 30.0, ""};
    clips[1] = {"v1", TimeInterval(10.0, 11.0), 0, 30.0, ""};  // no frames -> skipped

    std::vector<GtAction> gt(1);
    gt[0] = {"v1", 4.0, 6.0, "kneads dough"};

    DistillStats stats;
    auto records = build_distillation_dataset(clips, scenes, gt, PipelineDefaults{}, &stats);

    REQUIRE(records.size() == 2);
    CHECK(records[0].control == "[SCX]");
    // frame 33 of a 30fps clip starting at 0 -> t = 1.1
    CHECK(records[0].t == doctest::Approx(1.1));
    CHECK(records[0].text == "mock-scene v1@1.1");
    CHECK(records[1].control == "[ACX]");
    CHECK(records[1].t == doctest::Approx(4.0));
    CHECK(records[1].text == "kneads dough");

    CHECK(stats.scene_records == 1);
    CHECK(stats.action_records == 1);
    CHECK(stats.skipped_clips == 1);
}

TEST_CASE("distillation with nothing usable is an error") {
    backend::MockSceneDescriber scenes;
    std::vector<DistillClip> clips(1);
    clips[0] = {"v1", TimeInterval(0.0, 1.0), 0, 30.0, ""};
    CHECK_THROWS_AS(build_distillation_dataset(clips, scenes, {}), ArgumentError);
}

TEST_CASE("distillation records survive a jsonl round trip") {
    std::vector<DistillRecord> records(2);
    records[0] = {"v1", 1.1, "[SCX]", "a sunlit kitchen"};
    records[1] = {"v2", 4.0, "[ACX]", "kneads dough"};
    auto back = distill_records_from_jsonl(distill_records_to_jsonl(records));
    REQUIRE(back.size() == 2);
    CHECK(back[0].video_id == "v1");
    CHECK(back[0].t == doctest::Approx(1.1));
    CHECK(back[0].control == "[SCX]");
    CHECK(back[1].text == "kneads dough");
}

TEST_CASE("clip manifests and ground truth parse from jsonl") {
    auto clips = distill_clips_from_jsonl(
        R"({"video_id":"v1","start_s":0.0,"end_s":2.0,"n_frames":64,"fps":30.0})"
        "\n\n"
        R"({"video_id":"v2","start_s":5.0,"end_s":6.0,"n_frames":32,"fps":16.0})");
    REQUIRE(clips.size() == 2);
    CHECK(clips[1].n_frames == 32);
    CHECK(clips[1].fps == doctest::Approx(16.0));

    auto gt = gt_actions_from_jsonl(
        R"({"video_id":"v1","start_s":1.0,"end_s":2.0,"text":"waves"})");
    REQUIRE(gt.size() == 1);
    CHECK(gt[0].text == "waves");
}

}  // TEST_SUITE
