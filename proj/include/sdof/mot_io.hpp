#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdof/geometry.hpp"
#include "sdof/imaging.hpp"
#include "sdof/pipeline.hpp"

namespace sdof::mot_io {

// MOTChallenge CSV rows. Coordinates are kept exactly as written in the
// file; no origin shift is applied.

struct DetRow {
    int frame = 1;
    int id = -1;
    BBox bbox;
    double score = 1.0;
    std::array<double, 3> extra{-1.0, -1.0, -1.0};

    friend bool operator==(const DetRow&, const DetRow&) = default;
};

struct ResultRow {
    int frame = 1;
    int id = 1;
    BBox bbox;
    double conf = 1.0;
    std::array<double, 3> extra{-1.0, -1.0, -1.0};

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct GtRow {
    int frame = 1;
    int id = 1;
    BBox bbox;
    int considered = 1;
    int cls = 1;
    double visibility = 1.0;

    friend bool operator==(const GtRow&, const GtRow&) = default;
};

using DetectionsByFrame = std::map<int, std::vector<DetRow>>;

/// Rows grouped by frame, file order preserved within each frame. No score
/// filtering happens here. Errors: ParseError / NegativeDimensions with the
/// 1-based line number as position().
DetectionsByFrame parse_det(std::string_view text);
std::vector<ResultRow> parse_results(std::string_view text);
std::vector<GtRow> parse_gt(std::string_view text);

std::string write_det(const DetectionsByFrame& detections);
/// Rows must be sorted by (frame, id); throws Errc::UnsortedInput otherwise.
std::string write_results(const std::vector<ResultRow>& rows);
std::string write_gt(const std::vector<GtRow>& rows);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

std::vector<ResultRow> to_result_rows(const std::vector<pipeline::OutputRecord>& records);

/// "<dir>/<frame:06>.pgm"
std::string frame_path(const std::string& directory, int frame);

/// Number of frames in a zero-padded sequence directory. Frames must run
/// contiguously from 000001.pgm to the highest index present; a gap throws
/// Errc::IoError whose subject() is the first missing path.
int count_frames(const std::string& directory);

/// "<frame:06>_<index:03>.pbm"
std::string mask_filename(int frame, int detection_index);

/// Absent file yields std::nullopt; unreadable content throws Errc::MalformedPbm.
std::optional<imaging::BitMask> load_masks(const std::string& directory, int frame, int detection_index);

/// "key = value" lines with '#' comments. Missing keys keep their defaults.
pipeline::Config parse_config(std::string_view text);
std::string write_config(const pipeline::Config& config);

}  // namespace sdof::mot_io
