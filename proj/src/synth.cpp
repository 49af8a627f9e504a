#include "sdof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <memory>
#include <random>

#include "sdof/error.hpp"

namespace sdof::synth {

using imaging::BitMask;
using imaging::Image8;

namespace {

using Engine = std::mt19937_64;

// Independent stream per purpose, so changing corruption rates does not
// perturb motion or texture.
Engine stream(std::uint64_t seed, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return Engine(seq);
}

enum Purpose : std::uint64_t { kTexture = 1, kMotion = 2, kMisses = 3, kJitter = 4, kFalsePositives = 5 };

// Uniform noise smoothed twice by a separable [1 2 1]/4 kernel; correlation
// over a few pixels keeps the texture inside the flow tracker's basin.
std::vector<double> smooth_noise(int w, int h, Engine& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(w) * h);
    for (auto& v : a) v = u(rng);
    std::vector<double> b(a.size());
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
    for (int pass = 0; pass < 2; ++pass) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                b[idx(x, y)] = 0.25 * a[idx(std::max(x - 1, 0), y)] + 0.5 * a[idx(x, y)] +
                               0.25 * a[idx(std::min(x + 1, w - 1), y)];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                a[idx(x, y)] = 0.25 * b[idx(x, std::max(y - 1, 0))] + 0.5 * b[idx(x, y)] +
                               0.25 * b[idx(x, std::min(y + 1, h - 1))];
    }
    // Two passes shrink the standard deviation of U(-1, 1) noise to about 0.16.
    for (auto& v : a) v = std::clamp(v * 2.5, -1.5, 1.5);
    return a;
}

Image8 texture(int w, int h, double mean, double amplitude, Engine& rng) {
    const auto noise = smooth_noise(w, h, rng);
    std::vector<std::uint8_t> px(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(mean + amplitude * noise[i]), 0L, 255L));
    return Image8(w, h, std::move(px));
}

struct Motion {
    double ax = 0, ay = 0;      // anchor
    double vx = 0, vy = 0;      // linear drift
    double sx = 0, sy = 0;      // sine amplitude
    double period = 60, phase = 0;

    double offset_x(int t) const { return vx * t + sx * std::sin(2 * std::numbers::pi * t / period + phase); }
    double offset_y(int t) const { return vy * t + sy * std::sin(2 * std::numbers::pi * t / period + phase); }
};

// True when `obj` shares a pixel with any earlier object in some frame.
bool touches_any(const ObjectTrack& obj, const std::vector<ObjectTrack>& others) {
    for (const auto& other : others) {
        for (std::size_t t = 0; t < obj.top_left.size(); ++t) {
            const auto [ax, ay] = obj.top_left[t];
            const auto [bx, by] = other.top_left[t];
            if (ax < bx + other.w && bx < ax + obj.w && ay < by + other.h && by < ay + obj.h) return true;
        }
    }
    return false;
}

}  // namespace

void SceneSpec::validate() const {
    auto fail = [](const char* what) { throw Error(Errc::InvalidArgument, what); };
    if (num_objects < 0) fail("num_objects must be >= 0");
    if (num_frames < 1) fail("num_frames must be >= 1");
    if (width < 16 || height < 16) fail("image must be at least 16x16");
    if (min_object_w < 1 || min_object_h < 1 || max_object_w < min_object_w || max_object_h < min_object_h)
        fail("invalid object size range");
    if (min_speed < 0 || max_speed < min_speed) fail("invalid speed range");
    if (max_sine_amplitude < 0 || min_sine_period <= 0 || max_sine_period < min_sine_period)
        fail("invalid sinusoid parameters");
    if (!(fn_rate >= 0 && fn_rate <= 1) || !(fp_rate >= 0 && fp_rate <= 1)) fail("rates must lie in [0, 1]");
    if (bbox_jitter_sigma < 0) fail("jitter sigma must be >= 0");
    if (margin < 0) fail("margin must be >= 0");
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    Scene scene;
    scene.width = spec.width;
    scene.height = spec.height;

    Engine tex_rng = stream(spec.seed, kTexture);
    Engine motion_rng = stream(spec.seed, kMotion);
    const Image8 background = texture(spec.width, spec.height, 110.0, spec.texture_amplitude, tex_rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Image8> skins;
    for (int k = 0; k < spec.num_objects; ++k) {
        ObjectTrack obj;
        obj.id = k + 1;
        obj.w = std::uniform_int_distribution<int>(spec.min_object_w, spec.max_object_w)(motion_rng);
        obj.h = std::uniform_int_distribution<int>(spec.min_object_h, spec.max_object_h)(motion_rng);
        const double mean = 50.0 + 150.0 * unit(motion_rng);
        skins.push_back(texture(obj.w, obj.h, mean, spec.texture_amplitude, tex_rng));

        // Redraw the motion until the whole trajectory fits inside the margins.
        bool placed = false;
        const int attempts = spec.allow_overlap ? 64 : 512;
        for (int attempt = 0; attempt < attempts && !placed; ++attempt) {
            Motion m;
            const double speed = spec.min_speed + (spec.max_speed - spec.min_speed) * unit(motion_rng);
            const double heading = 2 * std::numbers::pi * unit(motion_rng);
            const double damp = std::pow(0.9, attempt % 64);
            m.vx = damp * speed * std::cos(heading);
            m.vy = damp * speed * std::sin(heading);
            m.sx = damp * spec.max_sine_amplitude * unit(motion_rng);
            m.sy = damp * spec.max_sine_amplitude * unit(motion_rng);
            m.period = spec.min_sine_period + (spec.max_sine_period - spec.min_sine_period) * unit(motion_rng);
            m.phase = 2 * std::numbers::pi * unit(motion_rng);
            double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
            for (int t = 0; t < spec.num_frames; ++t) {
                lo_x = std::min(lo_x, std::floor(m.offset_x(t)));
                hi_x = std::max(hi_x, std::ceil(m.offset_x(t)));
                lo_y = std::min(lo_y, std::floor(m.offset_y(t)));
                hi_y = std::max(hi_y, std::ceil(m.offset_y(t)));
            }
            const double min_ax = spec.margin - lo_x;
            const double max_ax = spec.width - spec.margin - obj.w - hi_x;
            const double min_ay = spec.margin - lo_y;
            const double max_ay = spec.height - spec.margin - obj.h - hi_y;
            if (min_ax > max_ax || min_ay > max_ay) continue;
            m.ax = std::floor(min_ax + (max_ax - min_ax) * unit(motion_rng));
            m.ay = std::floor(min_ay + (max_ay - min_ay) * unit(motion_rng));
            obj.top_left.clear();
            for (int t = 0; t < spec.num_frames; ++t) {
                const int x = static_cast<int>(std::lround(m.ax + m.offset_x(t)));
                const int y = static_cast<int>(std::lround(m.ay + m.offset_y(t)));
                obj.top_left.emplace_back(std::clamp(x, spec.margin, spec.width - spec.margin - obj.w),
                                          std::clamp(y, spec.margin, spec.height - spec.margin - obj.h));
            }
            placed = spec.allow_overlap || !touches_any(obj, scene.objects);
        }
        if (!placed)
            throw Error(Errc::ObjectLeavesImage,
                        "object " + std::to_string(obj.id) + " cannot stay inside the image for the whole sequence");
        scene.objects.push_back(std::move(obj));
    }

    Engine miss_rng = stream(spec.seed, kMisses);
    Engine jitter_rng = stream(spec.seed, kJitter);
    Engine fp_rng = stream(spec.seed, kFalsePositives);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::poisson_distribution<int> fp_count(spec.fp_rate > 0 ? spec.fp_rate : 1.0);

    std::vector<int> owner(static_cast<std::size_t>(spec.width) * spec.height);
    scene.frames.reserve(static_cast<std::size_t>(spec.num_frames));
    for (int t = 1; t <= spec.num_frames; ++t) {
        Image8 frame = background;
        std::fill(owner.begin(), owner.end(), -1);
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            const auto& obj = scene.objects[k];
            const auto [ox, oy] = obj.top_left[static_cast<std::size_t>(t - 1)];
            for (int y = 0; y < obj.h; ++y) {
                for (int x = 0; x < obj.w; ++x) {
                    frame.at(ox + x, oy + y) = skins[k].at(x, y);
                    owner[static_cast<std::size_t>(oy + y) * spec.width + ox + x] = static_cast<int>(k);
                }
            }
        }
        scene.frames.push_back(std::move(frame));

        auto& dets = scene.detections[t];
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            const auto& obj = scene.objects[k];
            const auto [ox, oy] = obj.top_left[static_cast<std::size_t>(t - 1)];
            long visible = 0;
            for (int y = 0; y < obj.h; ++y)
                for (int x = 0; x < obj.w; ++x)
                    visible += owner[static_cast<std::size_t>(oy + y) * spec.width + ox + x] == static_cast<int>(k);
            const BBox truth{static_cast<double>(ox), static_cast<double>(oy), static_cast<double>(obj.w),
                             static_cast<double>(obj.h)};
            scene.gt.push_back({t, obj.id, truth, 1, 1, static_cast<double>(visible) / (obj.w * obj.h)});

            if (unit(miss_rng) < spec.fn_rate) continue;
            BBox box = truth;
            if (spec.bbox_jitter_sigma > 0) {
                box.x += spec.bbox_jitter_sigma * jitter(jitter_rng);
                box.y += spec.bbox_jitter_sigma * jitter(jitter_rng);
                box.w = std::max(2.0, box.w + spec.bbox_jitter_sigma * jitter(jitter_rng));
                box.h = std::max(2.0, box.h + spec.bbox_jitter_sigma * jitter(jitter_rng));
            }
            const int index = static_cast<int>(dets.size());
            dets.push_back({t, -1, box, 1.0, {-1.0, -1.0, -1.0}});

            const int mx = static_cast<int>(std::lround(box.x));
            const int my = static_cast<int>(std::lround(box.y));
            const int mw = std::max(1, static_cast<int>(std::lround(box.w)));
            const int mh = std::max(1, static_cast<int>(std::lround(box.h)));
            BitMask mask(mw, mh, 0);
            for (int y = 0; y < mh; ++y)
                for (int x = 0; x < mw; ++x) {
                    const int ix = mx + x;
                    const int iy = my + y;
                    mask.at(x, y) = ix >= ox && ix < ox + obj.w && iy >= oy && iy < oy + obj.h;
                }
            scene.masks.emplace(std::pair(t, index), std::move(mask));
        }

        if (spec.fp_rate > 0) {
            const int count = fp_count(fp_rng);
            for (int i = 0; i < count; ++i) {
                const double w = spec.min_object_w + (spec.max_object_w - spec.min_object_w) * unit(fp_rng);
                const double h = spec.min_object_h + (spec.max_object_h - spec.min_object_h) * unit(fp_rng);
                const double x = std::max(0.0, (spec.width - w) * unit(fp_rng));
                const double y = std::max(0.0, (spec.height - h) * unit(fp_rng));
                const double score = unit(fp_rng);
                dets.push_back({t, -1, {std::round(x), std::round(y), std::round(w), std::round(h)}, score,
                                {-1.0, -1.0, -1.0}});
            }
        }
        if (dets.empty()) scene.detections.erase(t);
    }
    return scene;
}

void write_scene(const Scene& scene, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(directory) / "frames", ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + directory + ": " + ec.message(), directory);
    fs::create_directories(fs::path(directory) / "masks", ec);
    if (ec) throw Error(Errc::IoError, "cannot create masks directory under " + directory, directory);

    const std::string frames_dir = (fs::path(directory) / "frames").string();
    for (std::size_t i = 0; i < scene.frames.size(); ++i)
        imaging::write_file(mot_io::frame_path(frames_dir, static_cast<int>(i + 1)), imaging::write_pgm(scene.frames[i]));

    auto write_text = [&](const char* name, const std::string& text) {
        const std::vector<std::uint8_t> bytes(text.begin(), text.end());
        imaging::write_file((fs::path(directory) / name).string(), bytes);
    };
    write_text("det.txt", mot_io::write_det(scene.detections));
    write_text("gt.txt", mot_io::write_gt(scene.gt));
    for (const auto& [key, mask] : scene.masks)
        imaging::write_file((fs::path(directory) / "masks" / mot_io::mask_filename(key.first, key.second)).string(),
                            imaging::write_pbm(mask));
}

Scene load_scene(const std::string& directory) {
    namespace fs = std::filesystem;
    Scene scene;
    const std::string frames_dir = (fs::path(directory) / "frames").string();
    const int count = mot_io::count_frames(frames_dir);
    for (int t = 1; t <= count; ++t)
        scene.frames.push_back(imaging::load_pgm(imaging::read_file(mot_io::frame_path(frames_dir, t))));
    scene.width = scene.frames.front().width();
    scene.height = scene.frames.front().height();

    auto read_text = [&](const fs::path& path) {
        const auto bytes = imaging::read_file(path.string());
        return std::string(bytes.begin(), bytes.end());
    };
    const fs::path det_path = fs::path(directory) / "det.txt";
    if (!fs::is_regular_file(det_path)) throw Error(Errc::IoError, "missing " + det_path.string(), det_path.string());
    scene.detections = mot_io::parse_det(read_text(det_path));
    const fs::path gt_path = fs::path(directory) / "gt.txt";
    if (fs::is_regular_file(gt_path)) scene.gt = mot_io::parse_gt(read_text(gt_path));

    const std::string masks_dir = (fs::path(directory) / "masks").string();
    if (fs::is_directory(masks_dir)) {
        for (const auto& [frame, rows] : scene.detections)
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (auto mask = mot_io::load_masks(masks_dir, frame, static_cast<int>(i)))
                    scene.masks.emplace(std::pair(frame, static_cast<int>(i)), std::move(*mask));
    }
    return scene;
}

pipeline::FrameSource scene_source(const Scene& scene, bool use_masks) {
    auto next = std::make_shared<int>(1);
    return [&scene, next, use_masks]() -> std::optional<pipeline::FrameBundle> {
        const int t = *next;
        if (t > static_cast<int>(scene.frames.size())) return std::nullopt;
        ++*next;
        pipeline::FrameBundle bundle;
        bundle.index = t;
        bundle.image = scene.frames[static_cast<std::size_t>(t - 1)];
        std::vector<tracking::Detection> dets;
        if (const auto it = scene.detections.find(t); it != scene.detections.end()) {
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                tracking::Detection d;
                d.bbox = it->second[i].bbox;
                d.score = it->second[i].score;
                if (use_masks)
                    if (const auto m = scene.masks.find({t, static_cast<int>(i)}); m != scene.masks.end())
                        d.mask = m->second;
                dets.push_back(std::move(d));
            }
        }
        bundle.detections = std::move(dets);
        return bundle;
    };
}

std::vector<mot_io::ResultRow> track_scene(const Scene& scene, const pipeline::Config& config,
                                           pipeline::TimingReport* timing) {
    auto result = pipeline::run(scene_source(scene), config);
    if (timing != nullptr) *timing = result.timing;
    return mot_io::to_result_rows(result.records);
}

std::vector<BenchRow> bench(const Scene& scene, const std::vector<int>& L_values, const DetectorLatencyModel& latency,
                            const pipeline::Config& config) {
    if (L_values.empty()) throw Error(Errc::InvalidArgument, "bench needs at least one L value");
    if (!(latency.latency_ms >= 0)) throw Error(Errc::InvalidArgument, "latency must be >= 0");
    std::vector<BenchRow> rows;
    for (int L : L_values) {
        pipeline::Config c = config;
        c.L = L;
        pipeline::TimingReport timing;
        const auto results = track_scene(scene, c, &timing);
        BenchRow row;
        row.L = L;
        row.eval = metrics::evaluate(scene.gt, results);
        row.tracking_ms_per_frame = timing.mean_total_ms();
        row.simulated_fps = timing.fps(latency.latency_ms);
        rows.push_back(row);
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "L,MOTA,IDsw,tracking_ms_per_frame,simulated_fps\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%ld,%.4f,%.4f\n", r.L, r.eval.mota, r.eval.idsw,
                      r.tracking_ms_per_frame, r.simulated_fps);
        out += buf;
    }
    return out;
}

}  // namespace sdof::synth
