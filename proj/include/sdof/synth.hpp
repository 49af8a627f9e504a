#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdof/imaging.hpp"
#include "sdof/metrics.hpp"
#include "sdof/mot_io.hpp"
#include "sdof/pipeline.hpp"

namespace sdof::synth {

struct SceneSpec {
    int num_objects = 10;
    int num_frames = 200;
    int width = 640;
    int height = 480;
    int min_object_w = 24, max_object_w = 48;
    int min_object_h = 48, max_object_h = 96;
    double min_speed = 0.2;          // linear drift, px/frame
    double max_speed = 1.5;
    double max_sine_amplitude = 20.0;  // px
    double min_sine_period = 30.0;     // frames
    double max_sine_period = 90.0;
    double texture_amplitude = 60.0;   // intensity units around each surface's mean
    int margin = 16;                   // px kept free along every image border
    bool allow_overlap = true;         // false: trajectories never touch each other
    double fn_rate = 0.0;
    double fp_rate = 0.0;              // expected false positives per frame
    double bbox_jitter_sigma = 0.0;    // px
    std::uint64_t seed = 1;

    void validate() const;
};

/// Ground-truth motion of one object over the sequence.
struct ObjectTrack {
    int id = 0;
    int w = 0, h = 0;
    std::vector<std::pair<int, int>> top_left;  // per frame, integer pixels
};

struct Scene {
    int width = 0;
    int height = 0;
    std::vector<imaging::Image8> frames;  // frames[t - 1] is frame t
    std::vector<mot_io::GtRow> gt;
    mot_io::DetectionsByFrame detections;
    std::map<std::pair<int, int>, imaging::BitMask> masks;  // (frame, detection index)
    std::vector<ObjectTrack> objects;
};

/// Textured rectangles over a static noise background; later objects occlude
/// earlier ones. Deterministic for a given spec. Throws Errc::ObjectLeavesImage
/// when no trajectory fits inside the margins.
Scene generate_scene(const SceneSpec& spec);

/// Writes frames/NNNNNN.pgm, det.txt, gt.txt and masks/*.pbm under `directory`.
void write_scene(const Scene& scene, const std::string& directory);

/// Reads a scene written by write_scene (or laid out the same way).
/// gt.txt and masks/ are optional.
Scene load_scene(const std::string& directory);

/// Frame source over an in-memory scene. The scene must outlive the source.
pipeline::FrameSource scene_source(const Scene& scene, bool use_masks = true);

std::vector<mot_io::ResultRow> track_scene(const Scene& scene, const pipeline::Config& config,
                                           pipeline::TimingReport* timing = nullptr);

struct DetectorLatencyModel {
    double latency_ms = 0.0;  // per detection frame
};

struct BenchRow {
    int L = 1;
    metrics::EvalReport eval;
    double tracking_ms_per_frame = 0.0;
    double simulated_fps = 0.0;
};

/// Runs the full pipeline once per L, sequentially.
std::vector<BenchRow> bench(const Scene& scene, const std::vector<int>& L_values, const DetectorLatencyModel& latency,
                            const pipeline::Config& config);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace sdof::synth
