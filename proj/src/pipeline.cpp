#include "sdof/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sdof/association.hpp"
#include "sdof/error.hpp"

namespace sdof::pipeline {

using tracking::Detection;
using tracking::Track;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require(bool ok, const char* key, const char* what) {
    if (!ok) throw Error(Errc::InvalidValue, std::string(key) + " " + what, key);
}

}  // namespace

void Config::validate() const {
    require(L >= 1, "L", "must be >= 1");
    require(M >= 0, "M", "must be >= 0");
    require(R >= 1, "R", "must be >= 1");
    require(Q >= R, "Q", "must be >= R");
    require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon", "must lie in [0, 1]");
    require(tau_var > 0.0, "tau_var", "must be > 0");
    require(score_thresh >= 0.0 && score_thresh <= 1.0, "score_thresh", "must lie in [0, 1]");
    require(head_frac > 0.0 && head_frac <= 1.0, "head_frac", "must lie in (0, 1]");
    require(erosion_iters >= 0, "erosion_iters", "must be >= 0");
    require(hotelling_confidence > 0.0 && hotelling_confidence < 1.0, "hotelling_confidence", "must lie in (0, 1)");
    lk.validate();
}

bool is_detection_frame(int t, int L) {
    if (t < 1 || L < 1) throw Error(Errc::InvalidArgument, "frame index and interval must be >= 1");
    return (t - 1) % L == 0;
}

std::size_t TimingReport::detection_frames() const {
    return static_cast<std::size_t>(
        std::count_if(frames.begin(), frames.end(), [](const FrameTiming& f) { return f.detection_frame; }));
}

double TimingReport::mean_total_ms() const {
    if (frames.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& f : frames) sum += f.total_ms;
    return sum / static_cast<double>(frames.size());
}

double TimingReport::fps(double latency_ms) const {
    if (frames.empty()) return 0.0;
    double total_ms = 0.0;
    for (const auto& f : frames) total_ms += f.total_ms + (f.detection_frame ? latency_ms : 0.0);
    return total_ms > 0.0 ? 1000.0 * static_cast<double>(frames.size()) / total_ms : 0.0;
}

Tracker::Tracker(Config config) : config_(std::move(config)), rng_(config_.seed) { config_.validate(); }

std::vector<OutputRecord> Tracker::step(const FrameBundle& bundle) {
    if (bundle.index < 1 || (last_index_ != 0 && bundle.index != last_index_ + 1))
        throw Error(Errc::NonMonotonicFrameIndex,
                    "frame " + std::to_string(bundle.index) + " follows frame " + std::to_string(last_index_), {},
                    bundle.index);
    const bool detect = is_detection_frame(bundle.index, config_.L);
    if (detect && !bundle.detections)
        throw Error(Errc::MissingDetections, "frame " + std::to_string(bundle.index) + " needs detections", {},
                    bundle.index);

    const auto start = Clock::now();
    FrameTiming timing;
    timing.frame = bundle.index;
    timing.detection_frame = detect;

    auto current = optflow::make_flow_pyramid(imaging::to_float(bundle.image), config_.lk.levels);
    if (prev_pyramid_ && !tracks_.empty()) flow_step(current);
    timing.flow_ms = ms_since(start);

    if (detect) detection_step(*bundle.detections, bundle.image.width(), bundle.image.height(), timing);

    prev_pyramid_ = std::move(current);
    last_index_ = bundle.index;

    std::vector<OutputRecord> out;
    out.reserve(tracks_.size());
    for (const Track& t : tracks_) out.push_back({bundle.index, t.id, t.bbox, 1.0});
    std::sort(out.begin(), out.end(), [](const OutputRecord& a, const OutputRecord& b) { return a.id < b.id; });

    timing.total_ms = ms_since(start);
    timing_.frames.push_back(timing);
    return out;
}

void Tracker::flow_step(const optflow::FlowPyramid& current) {
    const tracking::TerminationRules rules{config_.R, config_.M, config_.tau_var, config_.enable_termination};
    std::vector<Track> survivors;
    survivors.reserve(tracks_.size());
    for (const Track& track : tracks_) {
        const auto flows = optflow::lk_track(*prev_pyramid_, current, track.points, config_.lk);

        Track moved;
        try {
            moved = tracking::propagate(track, flows, config_.hotelling_confidence);
        } catch (const Error& e) {
            if (e.code() != Errc::AllPointsLost) throw;
            ++terminations_.all_points_lost;
            continue;
        }

        std::vector<Point2> prev_ok;
        std::vector<Displacement> shifts;
        for (std::size_t i = 0; i < flows.size(); ++i) {
            if (!flows[i].ok()) continue;
            prev_ok.push_back(track.points[i]);
            shifts.push_back(flows[i].displacement);
        }
        double alpha = 1.0;
        try {
            alpha = tracking::variance_ratio(prev_ok, shifts, config_.hotelling_confidence);
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateVariance) throw;
        }

        moved.miss_frames += 1;
        moved.age += 1;
        const auto decision = tracking::should_terminate(moved, alpha, rules);
        if (decision.terminate) {
            switch (decision.reason) {
                case tracking::TerminationReason::PointLoss: ++terminations_.point_loss; break;
                case tracking::TerminationReason::VarianceRatio: ++terminations_.variance_ratio; break;
                case tracking::TerminationReason::MissTimeout: ++terminations_.miss_timeout; break;
                case tracking::TerminationReason::None: break;
            }
            continue;
        }
        survivors.push_back(std::move(moved));
    }
    tracks_ = std::move(survivors);
}

std::vector<Point2> Tracker::resample(const Detection& det, int width, int height) {
    const tracking::SamplingOptions options{config_.head_frac, config_.erosion_iters, width, height};
    const imaging::BitMask* mask = (config_.enable_segmentation && det.mask) ? &*det.mask : nullptr;
    if (mask != nullptr) {
        try {
            return tracking::sample_points(det.bbox, mask, config_.Q, options, rng_);
        } catch (const Error& e) {
            if (e.code() != Errc::NoEligiblePixels) throw;
        }
    }
    try {
        return tracking::sample_points(det.bbox, nullptr, config_.Q, options, rng_);
    } catch (const Error& e) {
        if (e.code() != Errc::NoEligiblePixels) throw;
    }
    return {};
}

void Tracker::detection_step(const std::vector<Detection>& detections, int width, int height, FrameTiming& timing) {
    const auto start = Clock::now();
    std::vector<const Detection*> kept;
    std::vector<BBox> det_boxes;
    for (const Detection& d : detections) {
        if (!d.bbox.valid()) throw Error(Errc::NegativeDimensions, "detection with non-positive size");
        if (d.mask && (d.mask->width() != static_cast<int>(std::lround(d.bbox.w)) ||
                       d.mask->height() != static_cast<int>(std::lround(d.bbox.h))))
            throw Error(Errc::InvalidArgument, "detection mask does not match the rounded box size");
        if (d.score < config_.score_thresh) continue;
        kept.push_back(&d);
        det_boxes.push_back(d.bbox);
    }
    std::vector<BBox> track_boxes;
    track_boxes.reserve(tracks_.size());
    for (const Track& t : tracks_) track_boxes.push_back(t.bbox);
    const auto assignment = association::gated_match(track_boxes, det_boxes, config_.epsilon);
    timing.association_ms += ms_since(start);

    std::vector<char> keep(tracks_.size(), 1);
    double sampling_ms = 0.0;
    for (auto [ti, di] : assignment.matches) {
        Track& t = tracks_[ti];
        t.bbox = kept[di]->bbox;
        t.miss_frames = 0;
        t.hits += 1;
        const auto s = Clock::now();
        t.points = resample(*kept[di], width, height);
        sampling_ms += ms_since(s);
        if (static_cast<int>(t.points.size()) < config_.R) {
            keep[ti] = 0;
            ++terminations_.point_loss;
        }
    }
    for (std::size_t ti : assignment.unmatched_rows) {
        if (!config_.enable_continuation) {
            keep[ti] = 0;
            ++terminations_.unmatched;
        } else if (tracks_[ti].miss_frames > config_.M) {
            keep[ti] = 0;
            ++terminations_.miss_timeout;
        }
    }

    std::vector<Track> next;
    next.reserve(tracks_.size() + assignment.unmatched_cols.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i)
        if (keep[i]) next.push_back(std::move(tracks_[i]));

    for (std::size_t di : assignment.unmatched_cols) {
        const auto s = Clock::now();
        auto points = resample(*kept[di], width, height);
        sampling_ms += ms_since(s);
        if (static_cast<int>(points.size()) < config_.R) continue;
        Track t;
        t.id = next_id_++;
        t.bbox = kept[di]->bbox;
        t.points = std::move(points);
        t.hits = 1;
        next.push_back(std::move(t));
    }
    tracks_ = std::move(next);
    timing.sampling_ms += sampling_ms;
}

RunResult run(const FrameSource& source, const Config& config) {
    Tracker tracker(config);
    RunResult result;
    while (auto bundle = source()) {
        auto records = tracker.step(*bundle);
        result.records.insert(result.records.end(), records.begin(), records.end());
    }
    if (tracker.timing().frames.empty()) throw Error(Errc::EmptyInput, "frame sequence is empty");
    result.timing = tracker.timing();
    result.terminations = tracker.terminations();
    return result;
}

}  // namespace sdof::pipeline
