#include "memloom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "memloom/errors.hpp"
#include "memloom/pipeline.hpp"
#include "memloom/util.hpp"

namespace memloom::synth {

namespace {

double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; pairs of draws, one cached.
class Gaussian {
public:
    explicit Gaussian(std::mt19937_64& rng) : rng_(rng) {}

    double next() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform53(rng_) - 1.0;
            v = 2.0 * uniform53(rng_) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double factor = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * factor;
        has_cache_ = true;
        return u * factor;
    }

private:
    std::mt19937_64& rng_;
    bool has_cache_ = false;
    double cache_ = 0.0;
};

std::vector<double> unit_vector(Gaussian& gauss, int dim) {
    while (true) {
        std::vector<double> v(static_cast<size_t>(dim));
        double norm_sq = 0.0;
        for (double& x : v) {
            x = gauss.next();
            norm_sq += x * x;
        }
        if (norm_sq == 0.0) continue;
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : v) x *= inv;
        return v;
    }
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Fisher-Yates with modulo draws: negligibly biased, but exact mt19937_64
// output makes it bit-identical across platforms (std::shuffle is not).
template <typename T>
void shuffle_deterministic(std::vector<T>& items, std::mt19937_64& rng) {
    for (size_t i = items.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace

std::pair<seg::FeatureSequence, seg::BoundarySet> gen_feature_stream(
    const FeatureStreamSpec& spec) {
    if (spec.n < 1) {
        throw ArgumentError("feature stream needs at least one frame");
    }
    if (spec.dim < 1) {
        throw ArgumentError("feature dimension must be positive");
    }
    if (spec.noise_sigma < 0.0) {
        throw ArgumentError("noise sigma must be non-negative");
    }
    if (!(spec.fps > 0.0)) {
        throw ArgumentError("fps must be positive");
    }
    int prev = 0;
    for (int b : spec.boundaries) {
        if (b <= prev || b >= spec.n) {
            throw ArgumentError("planted boundaries must be strictly increasing inside (0, n)");
        }
        prev = b;
    }

    std::mt19937_64 rng(spec.seed);
    Gaussian gauss(rng);

    size_t num_segments = spec.boundaries.size() + 1;
    std::vector<std::vector<double>> means;
    means.reserve(num_segments);
    for (size_t s = 0; s < num_segments; ++s) {
        std::vector<double> mean = unit_vector(gauss, spec.dim);
        while (!means.empty() && l2_distance(means.back(), mean) < 0.5) {
            mean = unit_vector(gauss, spec.dim);
        }
        means.push_back(std::move(mean));
    }

    seg::FeatureSequence seq;
    seq.n = spec.n;
    seq.dim = spec.dim;
    seq.fps = static_cast<float>(spec.fps);
    seq.data.resize(static_cast<size_t>(spec.n) * static_cast<size_t>(spec.dim));

    size_t segment = 0;
    for (int i = 0; i < spec.n; ++i) {
        while (segment < spec.boundaries.size() && i >= spec.boundaries[segment]) {
            ++segment;
        }
        const std::vector<double>& mean = means[segment];
        for (int d = 0; d < spec.dim; ++d) {
            double value = mean[static_cast<size_t>(d)];
            if (spec.noise_sigma > 0.0) {
                value += spec.noise_sigma * gauss.next();
            }
            seq.data[static_cast<size_t>(i) * spec.dim + static_cast<size_t>(d)] =
                static_cast<float>(value);
        }
    }

    seg::BoundarySet planted;
    planted.domain = seg::BoundaryDomain::Frames;
    for (int b : spec.boundaries) {
        planted.values.push_back(static_cast<double>(b));
    }
    return {std::move(seq), std::move(planted)};
}

std::pair<seg::FeatureSequence, seg::BoundarySet> gen_feature_stream(
    uint64_t seed, int n, int dim, const std::vector<int>& boundaries, double noise_sigma) {
    FeatureStreamSpec spec;
    spec.seed = seed;
    spec.n = n;
    spec.dim = dim;
    spec.boundaries = boundaries;
    spec.noise_sigma = noise_sigma;
    return gen_feature_stream(spec);
}

namespace {

const char* kVerbs[] = {"picks up", "opens",  "closes", "washes",   "cuts",  "stirs",
                        "moves",    "places", "wipes",  "inspects", "pours", "shakes"};
const char* kObjects[] = {"a red mug",       "the cutting board", "a glass jar",
                          "the kettle",      "a green towel",     "the pan lid",
                          "a wooden spoon",  "the fridge door",   "a soap bottle",
                          "the salt shaker", "a metal bowl",      "the tap"};
const char* kAdjectives[] = {"bright", "dim",     "cluttered", "tidy",
                             "narrow", "spacious", "sunlit",    "shadowed"};
const char* kRooms[] = {"kitchen", "workshop", "garage", "office",
                        "pantry",  "laundry room", "studio", "hallway"};
const char* kDetails[] = {"tools on the wall",         "dishes in the sink",
                          "boxes on the floor",        "a window over the counter",
                          "shelves along one side",    "a table in the middle",
                          "cables across the bench",   "jars on a shelf"};

std::vector<std::string> action_phrases(std::mt19937_64& rng) {
    std::vector<std::string> combos;
    combos.reserve(144);
    for (const char* verb : kVerbs) {
        for (const char* object : kObjects) {
            combos.push_back(std::string("the wearer ") + verb + " " + object);
        }
    }
    shuffle_deterministic(combos, rng);
    return combos;
}

std::vector<std::string> scene_phrases(std::mt19937_64& rng) {
    std::vector<std::string> combos;
    combos.reserve(512);
    for (const char* adjective : kAdjectives) {
        for (const char* room : kRooms) {
            for (const char* detail : kDetails) {
                combos.push_back(std::string("a ") + adjective + " " + room + " with " +
                                 detail);
            }
        }
    }
    shuffle_deterministic(combos, rng);
    return combos;
}

std::string unique_phrase(const std::vector<std::string>& pool, size_t index) {
    if (index < pool.size()) return pool[index];
    // Pool exhausted; number the reuse so texts stay unique.
    return pool[index % pool.size()] + " (" + std::to_string(index / pool.size() + 1) + ")";
}

McqTask make_task(const std::string& id, const std::string& question,
                  const std::string& gold_text, std::vector<std::string> distractors,
                  std::mt19937_64& rng) {
    McqTask task;
    task.id = id;
    task.question = question;
    std::vector<std::string> options;
    options.push_back(gold_text);
    for (std::string& d : distractors) options.push_back(std::move(d));
    shuffle_deterministic(options, rng);
    for (size_t i = 0; i < 5; ++i) {
        task.options[i] = options[i];
        if (options[i] == gold_text) task.gold = static_cast<int>(i);
    }
    return task;
}

}  // namespace

backend::ScriptedWorld gen_mock_world(const MockWorldSpec& spec) {
    if (!(spec.duration > 0.0)) {
        throw ArgumentError("world duration must be positive");
    }
    if (!(spec.chunk_len > 0.0)) {
        throw ArgumentError("chunk length must be positive");
    }
    double prev = -1.0;
    for (double b : spec.boundaries_s) {
        if (b <= prev || b < 0.0 || b >= spec.duration) {
            throw ArgumentError("world boundaries must be ascending inside [0, duration)");
        }
        prev = b;
    }

    std::mt19937_64 rng(spec.seed);
    backend::ScriptedWorld world;
    world.video_id =
        spec.video_id.empty() ? "synth-" + std::to_string(spec.seed) : spec.video_id;
    world.duration = spec.duration;
    world.chunk_len = spec.chunk_len;
    world.boundaries_s = spec.boundaries_s;

    std::vector<TimeInterval> chunks = pipe::chunk_timeline(spec.duration, spec.chunk_len);
    std::vector<std::string> actions = action_phrases(rng);
    std::vector<std::string> scenes = scene_phrases(rng);

    for (size_t c = 0; c < chunks.size(); ++c) {
        world.actions.push_back(
            backend::TimedText{chunks[c].start, unique_phrase(actions, c)});
    }
    for (size_t b = 0; b < spec.boundaries_s.size(); ++b) {
        world.scenes.push_back(
            backend::TimedText{spec.boundaries_s[b], unique_phrase(scenes, b)});
    }

    int num_tasks = spec.num_tasks;
    if (num_tasks < 0) {
        num_tasks = static_cast<int>(std::min<size_t>(chunks.size(), 8));
    }

    // Distractor pools: scripted texts first, then unused phrases.
    auto action_distractors = [&](const std::string& gold) {
        std::vector<std::string> out;
        for (const backend::TimedText& a : world.actions) {
            if (out.size() == 4) break;
            if (a.text != gold) out.push_back(a.text);
        }
        for (size_t i = chunks.size(); out.size() < 4; ++i) {
            std::string extra = unique_phrase(actions, i);
            if (extra != gold) out.push_back(extra);
        }
        return out;
    };
    auto scene_distractors = [&](const std::string& gold) {
        std::vector<std::string> out;
        for (const backend::TimedText& s : world.scenes) {
            if (out.size() == 4) break;
            if (s.text != gold) out.push_back(s.text);
        }
        for (size_t i = spec.boundaries_s.size(); out.size() < 4; ++i) {
            std::string extra = unique_phrase(scenes, i);
            if (extra != gold) out.push_back(extra);
        }
        return out;
    };

    for (int t = 0; t < num_tasks; ++t) {
        std::string id = "task-" + std::to_string(t);
        bool scene_task = t == num_tasks - 1 && num_tasks >= 2 && !world.scenes.empty();
        if (scene_task) {
            const backend::TimedText& scene = world.scenes[0];
            std::string ts = format_timestamp(static_cast<long long>(scene.t));
            world.tasks.push_back(make_task(
                id, "What does the scene look like at t=" + ts + "?", scene.text,
                scene_distractors(scene.text), rng));
        } else {
            const backend::TimedText& action =
                world.actions[static_cast<size_t>(t) % chunks.size()];
            std::string ts = format_timestamp(static_cast<long long>(action.t));
            world.tasks.push_back(make_task(id, "What happened at t=" + ts + "?",
                                            action.text, action_distractors(action.text),
                                            rng));
        }
    }

    return world;
}

seg::FrameRaster solid_frame(int width, int height, uint8_t r, uint8_t g, uint8_t b) {
    if (width < 1 || height < 1) {
        throw ArgumentError("frame dimensions must be positive");
    }
    seg::FrameRaster frame;
    frame.width = width;
    frame.height = height;
    frame.pixels.resize(static_cast<size_t>(width) * static_cast<size_t>(height) * 3);
    for (size_t i = 0; i < frame.pixels.size(); i += 3) {
        frame.pixels[i] = r;
        frame.pixels[i + 1] = g;
        frame.pixels[i + 2] = b;
    }
    return frame;
}

}  // namespace memloom::synth
