#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sdof/geometry.hpp"
#include "sdof/imaging.hpp"
#include "sdof/optflow.hpp"
#include "sdof/tracking.hpp"

namespace sdof::pipeline {

struct Config {
    int L = 5;                 // detection interval, frames
    int M = 10;                // continuation limit, frames since last match
    int Q = 10;                // max interest points per track
    int R = 3;                 // min interest points per track
    double epsilon = 0.7;      // association gate on 1 - IoU
    double tau_var = 2.0;      // variance-ratio termination threshold
    double score_thresh = 0.2;
    double head_frac = 0.3;
    int erosion_iters = 2;
    double hotelling_confidence = 0.99;
    optflow::LkParams lk;
    std::uint64_t seed = 0;
    bool enable_segmentation = true;
    bool enable_continuation = true;
    bool enable_termination = true;

    /// Throws Errc::InvalidValue naming the offending key.
    void validate() const;
};

/// Frame 1 always detects; afterwards every L-th frame.
bool is_detection_frame(int t, int L);

struct FrameBundle {
    int index = 1;  // 1-based
    imaging::Image8 image;
    std::optional<std::vector<tracking::Detection>> detections;
};

struct OutputRecord {
    int frame = 0;
    int id = 0;
    BBox bbox;
    double conf = 1.0;

    friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

struct FrameTiming {
    int frame = 0;
    bool detection_frame = false;
    double flow_ms = 0.0;         // pyramid + LK + propagate + termination
    double association_ms = 0.0;
    double sampling_ms = 0.0;
    double total_ms = 0.0;        // tracking only; detector time is never included
};

struct TimingReport {
    std::vector<FrameTiming> frames;

    std::size_t detection_frames() const;
    double mean_total_ms() const;
    /// Frames per second with `latency_ms` added for every detection frame.
    double fps(double latency_ms = 0.0) const;
};

/// Per-frame counts of why tracks ended; useful for diagnosing runs.
struct TerminationCounts {
    std::size_t point_loss = 0;
    std::size_t variance_ratio = 0;
    std::size_t miss_timeout = 0;
    std::size_t all_points_lost = 0;
    std::size_t unmatched = 0;  // continuation disabled
};

/// Online tracker state. Each step consumes one frame and returns the live
/// tracks' boxes for it.
class Tracker {
public:
    explicit Tracker(Config config);

    std::vector<OutputRecord> step(const FrameBundle& bundle);

    const std::vector<tracking::Track>& tracks() const { return tracks_; }
    const TimingReport& timing() const { return timing_; }
    const TerminationCounts& terminations() const { return terminations_; }
    const Config& config() const { return config_; }
    int next_id() const { return next_id_; }

private:
    void flow_step(const optflow::FlowPyramid& current);
    void detection_step(const std::vector<tracking::Detection>& detections, int width, int height,
                        FrameTiming& timing);
    std::vector<Point2> resample(const tracking::Detection& det, int width, int height);

    Config config_;
    std::vector<tracking::Track> tracks_;
    int next_id_ = 1;
    int last_index_ = 0;
    std::optional<optflow::FlowPyramid> prev_pyramid_;
    tracking::Rng rng_;
    TimingReport timing_;
    TerminationCounts terminations_;
};

/// Pulls frames until it returns std::nullopt.
using FrameSource = std::function<std::optional<FrameBundle>()>;

struct RunResult {
    std::vector<OutputRecord> records;  // sorted by (frame, id)
    TimingReport timing;
    TerminationCounts terminations;
};

RunResult run(const FrameSource& source, const Config& config);

}  // namespace sdof::pipeline
