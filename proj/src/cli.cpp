#include "sdof/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "sdof/error.hpp"
#include "sdof/metrics.hpp"
#include "sdof/pipeline.hpp"
#include "sdof/synth.hpp"

namespace sdof::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
    const auto bytes = imaging::read_file(path);
    return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, const std::string& text) {
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    imaging::write_file(path, bytes);
}

// Errors carry the file name so messages point at the culprit.
template <typename Fn>
auto with_file(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what(), e.subject().empty() ? path : e.subject(), e.position());
    }
}

pipeline::Config load_config(const std::string& path) {
    if (path.empty()) return {};
    return with_file(path, [&] { return mot_io::parse_config(read_text(path)); });
}

// 3x5 glyphs for 0-9, one row per 3-bit value.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

void put(imaging::RgbImage& img, int x, int y, imaging::Rgb c) {
    if (img.contains(x, y)) img.at(x, y) = c;
}

void draw_label(imaging::RgbImage& img, int x, int y, int id, imaging::Rgb c) {
    const std::string text = std::to_string(id);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto& glyph = kDigits[static_cast<std::size_t>(text[i] - '0')];
        for (int r = 0; r < 5; ++r)
            for (int b = 0; b < 3; ++b)
                if (glyph[static_cast<std::size_t>(r)] & (4 >> b)) put(img, x + 4 * static_cast<int>(i) + b, y + r, c);
    }
}

struct TrackArgs {
    std::string frames, det, masks, config, out, points;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
    const pipeline::Config config = load_config(a.config);
    const int count = mot_io::count_frames(a.frames);
    const auto detections = with_file(a.det, [&] { return mot_io::parse_det(read_text(a.det)); });

    pipeline::Tracker tracker(config);
    std::vector<pipeline::OutputRecord> records;
    std::string points_text;
    for (int t = 1; t <= count; ++t) {
        const std::string path = mot_io::frame_path(a.frames, t);
        pipeline::FrameBundle bundle;
        bundle.index = t;
        bundle.image = with_file(path, [&] { return imaging::load_pgm(imaging::read_file(path)); });
        std::vector<tracking::Detection> dets;
        if (const auto it = detections.find(t); it != detections.end()) {
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                tracking::Detection d;
                d.bbox = it->second[i].bbox;
                d.score = it->second[i].score;
                if (!a.masks.empty()) d.mask = mot_io::load_masks(a.masks, t, static_cast<int>(i));
                dets.push_back(std::move(d));
            }
        }
        bundle.detections = std::move(dets);
        auto step = tracker.step(bundle);
        records.insert(records.end(), step.begin(), step.end());
        if (!a.points.empty()) {
            for (const auto& track : tracker.tracks())
                for (const auto& p : track.points)
                    points_text += std::to_string(t) + "," + std::to_string(track.id) + "," +
                                   mot_io::format_real(p.x) + "," + mot_io::format_real(p.y) + "\n";
        }
    }
    write_text(a.out, mot_io::write_results(mot_io::to_result_rows(records)));
    if (!a.points.empty()) write_text(a.points, points_text);

    const auto& timing = tracker.timing();
    double flow = 0, assoc = 0, sampling = 0, total = 0;
    for (const auto& f : timing.frames) {
        flow += f.flow_ms;
        assoc += f.association_ms;
        sampling += f.sampling_ms;
        total += f.total_ms;
    }
    const double n = static_cast<double>(timing.frames.size());
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "frames=%d detection_frames=%zu tracks_issued=%d\n"
                  "flow_ms_per_frame=%.3f association_ms_per_frame=%.3f sampling_ms_per_frame=%.3f "
                  "total_ms_per_frame=%.3f tracking_fps=%.2f\n",
                  count, timing.detection_frames(), tracker.next_id() - 1, flow / n, assoc / n, sampling / n,
                  total / n, timing.fps());
    out << buf;
    return kExitOk;
}

int cmd_eval(const std::string& gt_path, const std::string& res_path, double iou, std::ostream& out) {
    const auto gt = with_file(gt_path, [&] { return mot_io::parse_gt(read_text(gt_path)); });
    const auto res = with_file(res_path, [&] { return mot_io::parse_results(read_text(res_path)); });
    metrics::EvalOptions options;
    options.iou_gate = iou;
    const auto report = metrics::evaluate(gt, res, options);
    out << metrics::format_report(report) << metrics::report_csv_header() << metrics::report_csv_row(report);
    return kExitOk;
}

struct SynthArgs {
    std::string out;
    int objects = 10;
    int frames = 200;
    int width = 640;
    int height = 480;
    double fn = 0.0;
    double fp = 0.0;
    double jitter = 0.0;
    bool no_overlap = false;
    std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    synth::SceneSpec spec;
    spec.num_objects = a.objects;
    spec.num_frames = a.frames;
    spec.width = a.width;
    spec.height = a.height;
    spec.fn_rate = a.fn;
    spec.fp_rate = a.fp;
    spec.bbox_jitter_sigma = a.jitter;
    spec.allow_overlap = !a.no_overlap;
    spec.seed = a.seed;
    const auto scene = synth::generate_scene(spec);
    synth::write_scene(scene, a.out);
    out << "wrote " << scene.frames.size() << " frames, " << scene.gt.size() << " gt rows to " << a.out << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& scene_dir, const std::vector<int>& Ls, double latency_ms,
              const std::string& config_path, const std::string& csv_path, std::ostream& out) {
    const auto config = load_config(config_path);
    const auto scene = synth::load_scene(scene_dir);
    const auto rows = synth::bench(scene, Ls, {latency_ms}, config);
    const auto csv = synth::bench_csv(rows);
    if (!csv_path.empty()) write_text(csv_path, csv);
    out << csv;
    return kExitOk;
}

int cmd_overlay(const std::string& frames_dir, const std::string& res_path, const std::string& points_path,
                const std::string& out_dir, std::ostream& out) {
    const int count = mot_io::count_frames(frames_dir);
    const auto rows = with_file(res_path, [&] { return mot_io::parse_results(read_text(res_path)); });
    std::map<int, std::vector<mot_io::ResultRow>> by_frame;
    for (const auto& r : rows) {
        if (r.frame > count)
            throw Error(Errc::InvalidArgument,
                        "result row references frame " + std::to_string(r.frame) + " but the sequence has " +
                            std::to_string(count) + " frames",
                        res_path);
        by_frame[r.frame].push_back(r);
    }
    std::map<int, std::vector<std::pair<int, Point2>>> points;
    if (!points_path.empty()) {
        std::istringstream in(read_text(points_path));
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (line.empty()) continue;
            int frame = 0, id = 0;
            double x = 0, y = 0;
            if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &frame, &id, &x, &y) != 4)
                throw Error(Errc::ParseError, points_path + ": line " + std::to_string(number), points_path, number);
            points[frame].push_back({id, {x, y}});
        }
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out_dir, out_dir);
    for (int t = 1; t <= count; ++t) {
        const auto path = mot_io::frame_path(frames_dir, t);
        auto rgb = imaging::to_rgb(with_file(path, [&] { return imaging::load_pgm(imaging::read_file(path)); }));
        static const std::vector<mot_io::ResultRow> kNone;
        static const std::vector<std::pair<int, Point2>> kNoPoints;
        const auto rit = by_frame.find(t);
        const auto pit = points.find(t);
        draw_overlay(rgb, rit == by_frame.end() ? kNone : rit->second, pit == points.end() ? kNoPoints : pit->second);
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.ppm", t);
        imaging::write_file((fs::path(out_dir) / name).string(), imaging::write_ppm(rgb));
    }
    out << "wrote " << count << " overlay frames to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

imaging::Rgb id_color(int id) {
    // splitmix64 finalizer
    std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    auto channel = [&](int shift) { return static_cast<std::uint8_t>(64 + ((z >> shift) & 0xFF) % 192); };
    return {channel(0), channel(8), channel(16)};
}

void draw_overlay(imaging::RgbImage& image, const std::vector<mot_io::ResultRow>& rows,
                  const std::vector<std::pair<int, Point2>>& points) {
    for (const auto& r : rows) {
        const auto color = id_color(r.id);
        const int x0 = static_cast<int>(std::lround(r.bbox.x));
        const int y0 = static_cast<int>(std::lround(r.bbox.y));
        const int x1 = x0 + std::max(1, static_cast<int>(std::lround(r.bbox.w))) - 1;
        const int y1 = y0 + std::max(1, static_cast<int>(std::lround(r.bbox.h))) - 1;
        for (int x = x0; x <= x1; ++x) {
            put(image, x, y0, color);
            put(image, x, y1, color);
        }
        for (int y = y0; y <= y1; ++y) {
            put(image, x0, y, color);
            put(image, x1, y, color);
        }
        draw_label(image, x0 + 2, y0 + 2, r.id, color);
    }
    for (const auto& [id, p] : points)
        put(image, static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)), id_color(id));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SDOF multiple-object tracker: skipped detection + sparse optical flow"};
    app.require_subcommand(1);

    TrackArgs track;
    auto* track_cmd = app.add_subcommand("track", "Track a PGM sequence with MOT detections");
    track_cmd->add_option("--frames", track.frames, "Directory of 000001.pgm ...")->required();
    track_cmd->add_option("--det", track.det, "MOTChallenge det.txt")->required();
    track_cmd->add_option("--masks", track.masks, "Directory of <frame>_<index>.pbm masks");
    track_cmd->add_option("--config", track.config, "key = value config file");
    track_cmd->add_option("--out", track.out, "Results file")->required();
    track_cmd->add_option("--points", track.points, "Optional sidecar with interest points per frame");

    std::string gt_path, res_path;
    double iou = 0.5;
    auto* eval_cmd = app.add_subcommand("eval", "CLEAR-MOT evaluation");
    eval_cmd->add_option("--gt", gt_path, "gt.txt")->required();
    eval_cmd->add_option("--res", res_path, "Results file")->required();
    eval_cmd->add_option("--iou", iou, "IoU gate")->check(CLI::Range(1e-9, 1.0));

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene");
    synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
    synth_cmd->add_option("--objects", synth_args.objects, "Number of objects")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--frames", synth_args.frames, "Number of frames")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--width", synth_args.width, "Frame width");
    synth_cmd->add_option("--height", synth_args.height, "Frame height");
    synth_cmd->add_option("--fn", synth_args.fn, "Missed-detection probability")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--fp", synth_args.fp, "False positives per frame")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--jitter", synth_args.jitter, "Box jitter sigma, px")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--seed", synth_args.seed, "Random seed");
    synth_cmd->add_flag("--no-overlap", synth_args.no_overlap, "Keep object trajectories apart");

    std::string scene_dir, bench_config, bench_csv;
    std::string L_list;
    double latency_ms = 0.0;
    auto* bench_cmd = app.add_subcommand("bench", "Sweep the detection interval L");
    bench_cmd->add_option("--scene", scene_dir, "Scene directory (frames/, det.txt, gt.txt)")->required();
    bench_cmd->add_option("--L", L_list, "Comma-separated L values")->required();
    bench_cmd->add_option("--det-latency-ms", latency_ms, "Simulated detector latency")->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--config", bench_config, "key = value config file");
    bench_cmd->add_option("--csv", bench_csv, "Also write the table here");

    std::string ov_frames, ov_res, ov_points, ov_out;
    auto* overlay_cmd = app.add_subcommand("overlay", "Render tracking results onto the frames");
    overlay_cmd->add_option("--frames", ov_frames, "Directory of 000001.pgm ...")->required();
    overlay_cmd->add_option("--res", ov_res, "Results file")->required();
    overlay_cmd->add_option("--out", ov_out, "Output directory for PPM frames")->required();
    overlay_cmd->add_option("--points", ov_points, "Interest-point sidecar written by track --points");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*track_cmd) return cmd_track(track, out);
        if (*eval_cmd) return cmd_eval(gt_path, res_path, iou, out);
        if (*synth_cmd) return cmd_synth(synth_args, out);
        if (*bench_cmd) {
            std::vector<int> Ls;
            std::stringstream ss(L_list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item.empty()) continue;
                try {
                    std::size_t used = 0;
                    const int L = std::stoi(item, &used);
                    if (used != item.size() || L < 1) throw std::invalid_argument(item);
                    Ls.push_back(L);
                } catch (const std::exception&) {
                    err << "bench: invalid L value '" << item << "'\n";
                    return kExitUsage;
                }
            }
            if (Ls.empty()) {
                err << "bench: --L needs at least one value\n";
                return kExitUsage;
            }
            return cmd_bench(scene_dir, Ls, latency_ms, bench_config, bench_csv, out);
        }
        if (*overlay_cmd) return cmd_overlay(ov_frames, ov_res, ov_points, ov_out, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace sdof::cli
