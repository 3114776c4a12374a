// memloom: segmentation, memory building, Q&A, caption evaluation,
// distillation export, and synthetic fixtures from one binary.
//
// Exit codes: 0 success, 1 operational failure (I/O, backend, pipeline),
// 2 usage or validation error.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "memloom/memloom.hpp"

using nlohmann::json;
namespace ml = memloom;

namespace {

// ---- configuration resolution: flags > environment > config file ----

struct Settings {
    json file = json::object();
    uint64_t seed = 0;
    bool verbose = false;

    static Settings load(const std::string& config_path, uint64_t seed_flag,
                         bool seed_set, bool verbose) {
        Settings s;
        s.verbose = verbose;
        if (!config_path.empty()) {
            try {
                s.file = json::parse(ml::read_file(config_path));
            } catch (const json::exception& e) {
                throw ml::ConfigError("malformed config file " + config_path + ": " +
                                      e.what());
            }
            if (!s.file.is_object()) {
                throw ml::ConfigError("config file must hold a JSON object: " + config_path);
            }
        }
        if (seed_set) {
            s.seed = seed_flag;
        } else if (s.file.contains("seed")) {
            s.seed = s.file.at("seed").get<uint64_t>();
        }
        return s;
    }

    // URL-ish string: flag beats env var beats config-file key.
    std::string resolve(const std::string& flag_value, const char* env_name,
                        const std::string& file_key) const {
        if (!flag_value.empty()) return flag_value;
        if (const char* env = std::getenv(env_name); env && *env) return env;
        if (file.contains(file_key)) return file.at(file_key).get<std::string>();
        return {};
    }

    double number(const std::string& key, double fallback) const {
        if (file.contains(key)) return file.at(key).get<double>();
        return fallback;
    }

    void note(const std::string& message) const {
        if (verbose) std::cerr << "memloom: " << message << "\n";
    }
};

ml::backend::BackendEndpoint endpoint_for(const Settings& settings, const std::string& url) {
    ml::backend::BackendEndpoint ep;
    ep.base_url = url;
    std::string token = settings.resolve("", ml::backend::kEnvAuthToken, "auth_token");
    if (!token.empty()) ep.auth_token = token;
    if (settings.file.contains("timeout_s")) {
        ep.timeout_s = settings.file.at("timeout_s").get<double>();
    }
    if (settings.file.contains("max_retries")) {
        ep.max_retries = settings.file.at("max_retries").get<int>();
    }
    ep.validate();
    return ep;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ml::ArgumentError("not a number in list: \"" + item + "\"");
        }
    }
    return out;
}

void emit(const std::string& out_path, const std::string& payload,
          const std::string& summary) {
    if (out_path.empty()) {
        std::cout << payload;
        if (!payload.empty() && payload.back() != '\n') std::cout << "\n";
        std::cerr << summary << "\n";
    } else {
        ml::write_file_atomic(out_path, payload);
        std::cout << summary << " -> " << out_path << "\n";
    }
}

// ---- segment ----

struct SegmentArgs {
    std::string method;
    double duration = 0.0;
    double interval = ml::PipelineDefaults{}.uniform_interval;
    std::string features_path;
    std::string frames_path;
    double fps = 1.0;
    double threshold = ml::seg::ContentDetectorParams{}.threshold;
    int min_scene_len = ml::seg::ContentDetectorParams{}.min_scene_len;
    std::string weights = "1,1,1";
    int max_segments = ml::seg::KtsParams{}.max_segments;
    double penalty = ml::seg::KtsParams{}.penalty_weight;
    std::string out;
};

int cmd_segment(const Settings& settings, const SegmentArgs& args) {
    json params = json::object();
    std::vector<double> boundaries_s;

    if (args.method == "uniform") {
        if (!(args.duration > 0.0)) {
            throw ml::ArgumentError("uniform segmentation needs a positive --duration");
        }
        ml::seg::BoundarySet set = ml::seg::segment_uniform(args.duration, args.interval);
        boundaries_s = set.values;
        params["duration"] = args.duration;
        params["interval"] = args.interval;
    } else if (args.method == "content") {
        if (args.frames_path.empty()) {
            throw ml::ArgumentError("content segmentation needs --frames");
        }
        std::vector<ml::seg::FrameRaster> frames = ml::seg::load_raster_stream(args.frames_path);
        std::vector<double> weights = parse_double_list(args.weights);
        if (weights.size() != 3) {
            throw ml::ArgumentError("--weights needs exactly three comma-separated numbers");
        }
        std::array<double, 3> channel_weights{weights[0], weights[1], weights[2]};
        std::vector<double> scores;
        for (size_t i = 0; i + 1 < frames.size(); ++i) {
            scores.push_back(ml::seg::content_score(frames[i], frames[i + 1], channel_weights));
        }
        ml::seg::BoundarySet cuts =
            ml::seg::detect_content_cuts(scores, args.threshold, args.min_scene_len);
        boundaries_s = ml::seg::boundaries_to_seconds(cuts, args.fps).values;
        params["threshold"] = args.threshold;
        params["min_scene_len"] = args.min_scene_len;
        params["weights"] = weights;
        params["fps"] = args.fps;
    } else {  // kts (the option check restricts the set)
        if (args.features_path.empty()) {
            throw ml::ArgumentError("kts segmentation needs --features");
        }
        ml::seg::FeatureSequence features = ml::seg::load_feature_sequence(args.features_path);
        ml::seg::KtsParams kts;
        kts.max_segments = args.max_segments;
        kts.penalty_weight = args.penalty;
        ml::seg::KtsResult result = ml::seg::kts_segment_full(features, kts);
        boundaries_s = ml::seg::boundaries_to_seconds(result.boundaries, features.fps).values;
        params["max_segments"] = kts.max_segments;
        params["penalty_weight"] = kts.penalty_weight;
        params["num_segments"] = result.num_segments;
        settings.note("kts objective " + std::to_string(result.objective));
    }

    json report{{"method", args.method}, {"params", params}, {"boundaries_s", boundaries_s}};
    std::ostringstream summary;
    summary << boundaries_s.size() << " boundaries";
    emit(args.out, report.dump(2) + "\n", summary.str());
    return 0;
}

// ---- build-memory ----

struct BuildMemoryArgs {
    std::string video_id = "video";
    double duration = 0.0;
    double chunk_len = ml::PipelineDefaults{}.chunk_len;
    bool chunk_len_set = false;
    std::string mode = "ensemble";
    bool scene_captions = true;
    std::string segmentation = "uniform";
    bool segmentation_set = false;
    double interval = ml::PipelineDefaults{}.uniform_interval;
    std::string features_path;
    std::string boundaries;  // comma list for --segmentation fixed
    std::string backend = "mock";
    std::string world_path;
    int concurrency = 1;
    std::string out;
};

int cmd_build_memory(const Settings& settings, const BuildMemoryArgs& args) {
    ml::pipe::VideoSource video;
    video.video_id = args.video_id;
    video.duration = args.duration;

    ml::pipe::BuildMemoryOptions options;
    options.chunk_len = args.chunk_len;
    options.mode = args.mode == "hybrid" ? ml::pipe::CaptionerMode::Hybrid
                                         : ml::pipe::CaptionerMode::Ensemble;
    options.scene_captions = args.scene_captions;
    options.max_concurrency = args.concurrency;
    if (settings.file.contains("scene_prompt")) {
        options.scene_prompt = settings.file.at("scene_prompt").get<std::string>();
    }

    std::optional<ml::backend::ScriptedWorld> world;
    if (!args.world_path.empty()) {
        world = ml::backend::ScriptedWorld::load(args.world_path);
        video.video_id = world->video_id;
        video.duration = world->duration;
        if (!args.chunk_len_set) options.chunk_len = world->chunk_len;
    }
    if (!(video.duration > 0.0)) {
        throw ml::ArgumentError("--duration (or --world) is required and must be positive");
    }

    // When a scripted world is supplied and --segmentation is not, follow the
    // world's own boundaries so the rebuilt log matches the script end to end.
    std::string segmentation = args.segmentation;
    if (!args.segmentation_set && world) segmentation = "fixed";

    ml::pipe::BoundaryStrategy strategy;
    if (segmentation == "uniform") {
        strategy = ml::pipe::uniform_strategy(args.interval);
    } else if (segmentation == "none") {
        strategy = ml::pipe::no_boundaries();
    } else if (segmentation == "fixed") {
        std::vector<double> values;
        if (!args.boundaries.empty()) {
            values = parse_double_list(args.boundaries);
        } else if (world) {
            values = world->boundaries_s;
        } else {
            throw ml::ArgumentError("--segmentation fixed needs --boundaries or --world");
        }
        strategy = ml::pipe::fixed_boundaries(values);
    } else {  // kts
        if (args.features_path.empty()) {
            throw ml::ArgumentError("--segmentation kts needs --features");
        }
        ml::seg::FeatureSequence features = ml::seg::load_feature_sequence(args.features_path);
        ml::seg::KtsResult result = ml::seg::kts_segment_full(features, ml::seg::KtsParams{});
        std::vector<double> seconds =
            ml::seg::boundaries_to_seconds(result.boundaries, features.fps).values;
        strategy = ml::pipe::fixed_boundaries(seconds);
    }

    // Backend wiring; http requires configured URLs and names the env var when absent.
    std::unique_ptr<ml::backend::ActionCaptioner> action;
    std::unique_ptr<ml::backend::SceneDescriber> scene;
    std::shared_ptr<ml::backend::Transport> transport;
    bool hybrid = options.mode == ml::pipe::CaptionerMode::Hybrid;

    if (args.backend == "mock") {
        if (hybrid) {
            action = std::make_unique<ml::backend::MockHybridCaptioner>();
        } else {
            action = std::make_unique<ml::backend::MockActionCaptioner>();
            scene = std::make_unique<ml::backend::MockSceneDescriber>();
        }
        options.action_source = "mock";
        options.scene_source = "mock";
    } else if (args.backend == "world") {
        if (!world) {
            throw ml::ArgumentError("--backend world needs --world");
        }
        action = std::make_unique<ml::backend::ScriptedActionCaptioner>(*world, hybrid);
        if (!hybrid) {
            scene = std::make_unique<ml::backend::ScriptedSceneDescriber>(*world);
        }
        options.action_source = "world";
        options.scene_source = "world";
    } else {  // http
        std::string caption_url =
            settings.resolve("", ml::backend::kEnvCaptionUrl, "caption_url");
        if (caption_url.empty()) {
            throw ml::ConfigError(std::string("no captioner URL configured: set ") +
                                  ml::backend::kEnvCaptionUrl + " or caption_url");
        }
        transport = std::make_shared<ml::backend::HttpTransport>();
        action = std::make_unique<ml::backend::HttpActionCaptioner>(
            endpoint_for(settings, caption_url), transport);
        if (!hybrid && options.scene_captions) {
            std::string scene_url =
                settings.resolve("", ml::backend::kEnvSceneUrl, "scene_url");
            if (scene_url.empty()) {
                throw ml::ConfigError(std::string("no scene describer URL configured: set ") +
                                      ml::backend::kEnvSceneUrl + " or scene_url");
            }
            scene = std::make_unique<ml::backend::HttpSceneDescriber>(
                endpoint_for(settings, scene_url), transport);
        }
        options.action_source = "http";
        options.scene_source = "http";
    }

    ml::CaptionLog log = ml::pipe::build_memory(video, strategy, *action, scene.get(), options);

    std::ostringstream summary;
    size_t scenes = 0;
    for (const ml::CaptionEntry& e : log.entries) {
        if (e.kind == ml::CaptionKind::Scene) ++scenes;
    }
    summary << log.entries.size() << " captions (" << log.entries.size() - scenes
            << " action, " << scenes << " scene)";
    emit(args.out, ml::caption_log_to_jsonl(log), summary.str());
    return 0;
}

// ---- ask ----

struct AskArgs {
    std::string log_path;
    std::string tasks_path;
    std::string reasoner = "oracle";
    std::string reasoner_text = "I cannot tell.";
    std::string out;
    size_t prompt_budget = ml::pipe::QaOptions{}.prompt_char_budget;
};

int cmd_ask(const Settings& settings, const AskArgs& args) {
    ml::CaptionLog log = ml::load_caption_log(args.log_path);
    std::vector<ml::McqTask> tasks = ml::load_tasks(args.tasks_path);
    if (tasks.empty()) {
        throw ml::ArgumentError("task file has no tasks: " + args.tasks_path);
    }

    std::unique_ptr<ml::backend::Completer> reasoner;
    std::shared_ptr<ml::backend::Transport> transport;
    if (args.reasoner == "oracle") {
        reasoner = std::make_unique<ml::backend::OracleReasoner>();
    } else if (args.reasoner == "const") {
        reasoner = std::make_unique<ml::backend::ConstCompleter>(args.reasoner_text);
    } else {  // http
        std::string llm_url = settings.resolve("", ml::backend::kEnvLlmUrl, "llm_url");
        if (llm_url.empty()) {
            throw ml::ConfigError(std::string("no reasoner URL configured: set ") +
                                  ml::backend::kEnvLlmUrl + " or llm_url");
        }
        transport = std::make_shared<ml::backend::HttpTransport>();
        reasoner = std::make_unique<ml::backend::HttpCompleter>(
            endpoint_for(settings, llm_url), transport);
    }

    ml::pipe::QaOptions qa;
    qa.prompt_char_budget = args.prompt_budget;

    std::string records;
    size_t parsed = 0;
    size_t errors = 0;
    size_t graded = 0;
    size_t correct = 0;
    for (const ml::McqTask& task : tasks) {
        json record{{"id", task.id}};
        try {
            int choice = ml::pipe::answer_question(log, task, *reasoner, qa);
            record["choice"] = choice;
            ++parsed;
            if (task.gold) {
                ++graded;
                if (choice == *task.gold) ++correct;
            }
        } catch (const ml::AnswerParseError& e) {
            record["error"] = e.what();
            record["completion"] = e.completion();
            ++errors;
        }
        records += record.dump();
        records += '\n';
    }

    std::ostringstream summary;
    summary << parsed << "/" << tasks.size() << " answered";
    if (errors > 0) summary << ", " << errors << " parse errors";
    if (graded > 0) {
        double accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(graded);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f", accuracy);
        summary << "; accuracy " << buf << " over " << graded << " parsed gold tasks";
    }
    settings.note("reasoner: " + args.reasoner);
    emit(args.out, records, summary.str());
    return 0;
}

// ---- eval-captions ----

struct EvalArgs {
    std::string hyp_path;
    std::string ref_path;
    std::string embedder = "mock";
    std::string out;
};

std::vector<std::string> read_lines(const std::string& path) {
    std::string content = ml::read_file(path);
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= content.size()) {
        size_t end = content.find('\n', start);
        std::string line = content.substr(
            start, end == std::string::npos ? std::string::npos : end - start);
        if (!line.empty()) lines.push_back(std::move(line));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return lines;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json report_group(const std::vector<std::pair<std::string, std::string>>& pairs,
                  ml::backend::Embedder& embedder) {
    ml::metrics::SimilarityReport r = ml::metrics::caption_similarity_report(pairs, embedder);
    return json{{"bleu", r.bleu},
                {"rouge_l", r.rouge_l},
                {"meteor", r.meteor},
                {"sbert_cosine", r.cosine_mean},
                {"pairs", r.pairs}};
}

int cmd_eval_captions(const Settings& settings, const EvalArgs& args) {
    using Pairs = std::vector<std::pair<std::string, std::string>>;
    Pairs overall;
    Pairs action;
    Pairs scene;

    bool jsonl = has_suffix(args.hyp_path, ".jsonl") && has_suffix(args.ref_path, ".jsonl");
    if (jsonl) {
        ml::CaptionLog hyp = ml::load_caption_log(args.hyp_path);
        ml::CaptionLog ref = ml::load_caption_log(args.ref_path);
        auto texts_of = [](const ml::CaptionLog& log, ml::CaptionKind kind) {
            std::vector<std::string> out;
            for (const ml::CaptionEntry& e : log.entries) {
                if (e.kind == kind) out.push_back(e.text);
            }
            return out;
        };
        for (ml::CaptionKind kind : {ml::CaptionKind::Action, ml::CaptionKind::Scene}) {
            std::vector<std::string> h = texts_of(hyp, kind);
            std::vector<std::string> r = texts_of(ref, kind);
            if (h.size() != r.size()) {
                throw ml::ArgumentError("hypothesis and reference logs disagree on " +
                                        std::string(kind == ml::CaptionKind::Action
                                                        ? "[ACTION]"
                                                        : "[SCENE]") +
                                        " entry counts");
            }
            Pairs& group = kind == ml::CaptionKind::Action ? action : scene;
            for (size_t i = 0; i < h.size(); ++i) {
                group.emplace_back(h[i], r[i]);
                overall.emplace_back(h[i], r[i]);
            }
        }
    } else {
        std::vector<std::string> hyp = read_lines(args.hyp_path);
        std::vector<std::string> ref = read_lines(args.ref_path);
        if (hyp.size() != ref.size()) {
            throw ml::ArgumentError("hypothesis and reference files have different line counts (" +
                                    std::to_string(hyp.size()) + " vs " +
                                    std::to_string(ref.size()) + ")");
        }
        for (size_t i = 0; i < hyp.size(); ++i) overall.emplace_back(hyp[i], ref[i]);
    }
    if (overall.empty()) {
        throw ml::ArgumentError("nothing to evaluate: inputs are empty");
    }

    std::unique_ptr<ml::backend::Embedder> embedder;
    std::shared_ptr<ml::backend::Transport> transport;
    if (args.embedder == "mock") {
        embedder = std::make_unique<ml::backend::MockEmbedder>();
    } else {  // http
        std::string embed_url = settings.resolve("", ml::backend::kEnvEmbedUrl, "embed_url");
        if (embed_url.empty()) {
            throw ml::ConfigError(std::string("no embedder URL configured: set ") +
                                  ml::backend::kEnvEmbedUrl + " or embed_url");
        }
        transport = std::make_shared<ml::backend::HttpTransport>();
        embedder = std::make_unique<ml::backend::HttpEmbedder>(
            endpoint_for(settings, embed_url), transport);
    }

    json report{{"overall", report_group(overall, *embedder)}};
    if (!action.empty()) report["action"] = report_group(action, *embedder);
    if (!scene.empty()) report["scene"] = report_group(scene, *embedder);

    std::ostringstream summary;
    summary << overall.size() << " pairs scored";
    emit(args.out, report.dump(2) + "\n", summary.str());
    return 0;
}

// ---- distill ----

struct DistillArgs {
    std::string clips_path;
    std::string gt_path;
    std::string scene_backend = "mock";
    std::string world_path;
    std::string out;
};

int cmd_distill(const Settings& settings, const DistillArgs& args) {
    std::vector<ml::pipe::DistillClip> clips =
        ml::pipe::distill_clips_from_jsonl(ml::read_file(args.clips_path));
    std::vector<ml::pipe::GtAction> gt;
    if (!args.gt_path.empty()) {
        gt = ml::pipe::gt_actions_from_jsonl(ml::read_file(args.gt_path));
    }

    std::unique_ptr<ml::backend::SceneDescriber> scene;
    std::shared_ptr<ml::backend::Transport> transport;
    std::optional<ml::backend::ScriptedWorld> world;
    if (args.scene_backend == "mock") {
        scene = std::make_unique<ml::backend::MockSceneDescriber>();
    } else if (args.scene_backend == "world") {
        if (args.world_path.empty()) {
            throw ml::ArgumentError("--scene-backend world needs --world");
        }
        world = ml::backend::ScriptedWorld::load(args.world_path);
        scene = std::make_unique<ml::backend::ScriptedSceneDescriber>(*world);
    } else {  // http
        std::string scene_url = settings.resolve("", ml::backend::kEnvSceneUrl, "scene_url");
        if (scene_url.empty()) {
            throw ml::ConfigError(std::string("no scene describer URL configured: set ") +
                                  ml::backend::kEnvSceneUrl + " or scene_url");
        }
        transport = std::make_shared<ml::backend::HttpTransport>();
        scene = std::make_unique<ml::backend::HttpSceneDescriber>(
            endpoint_for(settings, scene_url), transport);
    }

    ml::PipelineDefaults defaults;
    if (settings.file.contains("scene_prompt")) {
        defaults.scene_prompt = settings.file.at("scene_prompt").get<std::string>();
    }
    ml::pipe::DistillStats stats;
    std::vector<ml::pipe::DistillRecord> records =
        ml::pipe::build_distillation_dataset(clips, *scene, gt, defaults, &stats);

    std::ostringstream summary;
    summary << records.size() << " records (" << stats.scene_records << " [SCX], "
            << stats.action_records << " [ACX], " << stats.skipped_clips
            << " clips skipped)";
    emit(args.out, ml::pipe::distill_records_to_jsonl(records), summary.str());
    return 0;
}

// ---- synth ----

struct SynthArgs {
    std::string kind;
    int n = 60;
    int dim = 8;
    double sigma = 0.05;
    double fps = 1.0;
    std::string boundaries;  // frames for features, seconds for world
    double duration = 48.0;
    double chunk_len = 4.0;
    int num_tasks = -1;
    std::string video_id;
    std::string out;
    std::string tasks_out;
    std::string boundaries_out;
};

int cmd_synth(const Settings& settings, const SynthArgs& args) {
    if (args.out.empty()) {
        throw ml::ArgumentError("synth needs --out");
    }
    if (args.kind == "features") {
        ml::synth::FeatureStreamSpec spec;
        spec.seed = settings.seed;
        spec.n = args.n;
        spec.dim = args.dim;
        spec.noise_sigma = args.sigma;
        spec.fps = args.fps;
        for (double b : parse_double_list(args.boundaries)) {
            spec.boundaries.push_back(static_cast<int>(b));
        }
        auto [features, planted] = ml::synth::gen_feature_stream(spec);
        ml::seg::save_feature_sequence(features, args.out);
        if (!args.boundaries_out.empty()) {
            json j{{"method", "planted"},
                   {"params", json{{"seed", spec.seed}, {"noise_sigma", spec.noise_sigma}}},
                   {"boundaries_s",
                    ml::seg::boundaries_to_seconds(planted, features.fps).values}};
            ml::write_file_atomic(args.boundaries_out, j.dump(2) + "\n");
        }
        std::cout << features.n << " frames x " << features.dim << " dims -> " << args.out
                  << "\n";
    } else {  // world
        ml::synth::MockWorldSpec spec;
        spec.seed = settings.seed;
        spec.duration = args.duration;
        spec.chunk_len = args.chunk_len;
        spec.video_id = args.video_id;
        spec.num_tasks = args.num_tasks;
        if (!args.boundaries.empty()) {
            spec.boundaries_s = parse_double_list(args.boundaries);
        }
        ml::backend::ScriptedWorld world = ml::synth::gen_mock_world(spec);
        world.save(args.out);
        if (!args.tasks_out.empty()) {
            ml::write_file_atomic(args.tasks_out, ml::tasks_to_jsonl(world.tasks));
        }
        std::cout << world.actions.size() << " actions, " << world.scenes.size()
                  << " scenes, " << world.tasks.size() << " tasks -> " << args.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-memory long-video Q&A toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON config file (flags > env > file)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "Seed for synthetic fixtures");
    app.add_flag("--verbose", verbose, "Chatty diagnostics on stderr");

    SegmentArgs seg_args;
    CLI::App* seg = app.add_subcommand("segment", "Detect scene boundaries");
    seg->add_option("--method", seg_args.method, "uniform | content | kts")
        ->required()
        ->check(CLI::IsMember({"uniform", "content", "kts"}));
    seg->add_option("--duration", seg_args.duration, "Video duration in seconds (uniform)");
    seg->add_option("--interval", seg_args.interval, "Uniform boundary spacing in seconds");
    seg->add_option("--features", seg_args.features_path, "Feature file, .fseq or .csv (kts)");
    seg->add_option("--frames", seg_args.frames_path, "RGB8 frame stream (content)");
    seg->add_option("--fps", seg_args.fps, "Frame rate for frame->second conversion (content)");
    seg->add_option("--threshold", seg_args.threshold, "Content cut threshold");
    seg->add_option("--min-scene-len", seg_args.min_scene_len, "Minimum frames between cuts");
    seg->add_option("--weights", seg_args.weights, "Channel weights r,g,b");
    seg->add_option("--max-segments", seg_args.max_segments, "KTS segment cap");
    seg->add_option("--penalty", seg_args.penalty, "KTS penalty weight");
    seg->add_option("--out", seg_args.out, "Boundary JSON output (default: stdout)");

    BuildMemoryArgs bm_args;
    CLI::App* bm = app.add_subcommand("build-memory", "Caption a video into a text log");
    bm->add_option("--video-id", bm_args.video_id, "Video identifier");
    bm->add_option("--duration", bm_args.duration, "Video duration in seconds");
    CLI::Option* chunk_opt =
        bm->add_option("--chunk-len", bm_args.chunk_len, "Action chunk length in seconds");
    bm->add_option("--mode", bm_args.mode, "ensemble | hybrid")
        ->check(CLI::IsMember({"ensemble", "hybrid"}));
    bm->add_flag("--scene-captions,!--no-scene-captions", bm_args.scene_captions,
                 "Emit scene captions at boundaries (default on)");
    CLI::Option* seg_mode_opt =
        bm->add_option("--segmentation", bm_args.segmentation, "uniform | none | fixed | kts")
            ->check(CLI::IsMember({"uniform", "none", "fixed", "kts"}));
    bm->add_option("--interval", bm_args.interval, "Uniform boundary spacing in seconds");
    bm->add_option("--features", bm_args.features_path, "Feature file for --segmentation kts");
    bm->add_option("--boundaries", bm_args.boundaries, "Comma list for --segmentation fixed");
    bm->add_option("--backend", bm_args.backend, "mock | world | http")
        ->check(CLI::IsMember({"mock", "world", "http"}));
    bm->add_option("--world", bm_args.world_path, "Scripted world JSON (--backend world)");
    bm->add_option("--concurrency", bm_args.concurrency, "Parallel caption requests");
    bm->add_option("--out", bm_args.out, "Caption log JSONL output (default: stdout)");

    AskArgs ask_args;
    CLI::App* ask = app.add_subcommand("ask", "Answer MCQ tasks against a caption log");
    ask->add_option("--log", ask_args.log_path, "Caption log JSONL")->required();
    ask->add_option("--tasks", ask_args.tasks_path, "Task JSONL")->required();
    ask->add_option("--reasoner", ask_args.reasoner, "oracle | const | http")
        ->check(CLI::IsMember({"oracle", "const", "http"}));
    ask->add_option("--reasoner-text", ask_args.reasoner_text,
                    "Fixed completion for --reasoner const");
    ask->add_option("--prompt-budget", ask_args.prompt_budget,
                    "Maximum prompt size in characters");
    ask->add_option("--out", ask_args.out, "Prediction JSONL output (default: stdout)");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval-captions", "Score hypothesis captions");
    eval->add_option("--hyp", eval_args.hyp_path, "Hypothesis file (.jsonl log or text lines)")
        ->required();
    eval->add_option("--ref", eval_args.ref_path, "Reference file (same format)")->required();
    eval->add_option("--embedder", eval_args.embedder, "mock | http")
        ->check(CLI::IsMember({"mock", "http"}));
    eval->add_option("--out", eval_args.out, "Report JSON output (default: stdout)");

    DistillArgs distill_args;
    CLI::App* distill = app.add_subcommand("distill", "Export a distillation dataset");
    distill->add_option("--clips", distill_args.clips_path, "Clip manifest JSONL")->required();
    distill->add_option("--gt", distill_args.gt_path, "Ground-truth action JSONL");
    distill->add_option("--scene-backend", distill_args.scene_backend, "mock | world | http")
        ->check(CLI::IsMember({"mock", "world", "http"}));
    distill->add_option("--world", distill_args.world_path, "Scripted world JSON");
    distill->add_option("--out", distill_args.out, "Dataset JSONL output (default: stdout)");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate deterministic fixtures");
    synth->add_option("--kind", synth_args.kind, "features | world")
        ->required()
        ->check(CLI::IsMember({"features", "world"}));
    synth->add_option("--n", synth_args.n, "Frame count (features)");
    synth->add_option("--dim", synth_args.dim, "Feature dimension (features)");
    synth->add_option("--sigma", synth_args.sigma, "Noise sigma (features)");
    synth->add_option("--fps", synth_args.fps, "Frames per second (features)");
    synth->add_option("--boundaries", synth_args.boundaries,
                      "Comma list: planted frames (features) or seconds (world)");
    synth->add_option("--duration", synth_args.duration, "World duration in seconds");
    synth->add_option("--chunk-len", synth_args.chunk_len, "World chunk length in seconds");
    synth->add_option("--num-tasks", synth_args.num_tasks, "World task count (-1: auto)");
    synth->add_option("--video-id", synth_args.video_id, "World video id");
    synth->add_option("--out", synth_args.out, "Fixture output path")->required();
    synth->add_option("--tasks-out", synth_args.tasks_out, "Also write task JSONL (world)");
    synth->add_option("--boundaries-out", synth_args.boundaries_out,
                      "Also write planted boundary JSON (features)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 2;
    }

    try {
        Settings settings =
            Settings::load(config_path, seed, seed_opt->count() > 0, verbose);
        bm_args.chunk_len_set = chunk_opt->count() > 0;
        bm_args.segmentation_set = seg_mode_opt->count() > 0;
        if (seg->parsed()) return cmd_segment(settings, seg_args);
        if (bm->parsed()) return cmd_build_memory(settings, bm_args);
        if (ask->parsed()) return cmd_ask(settings, ask_args);
        if (eval->parsed()) return cmd_eval_captions(settings, eval_args);
        if (distill->parsed()) return cmd_distill(settings, distill_args);
        if (synth->parsed()) return cmd_synth(settings, synth_args);
    } catch (const ml::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ml::OutOfRangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ml::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ml::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
