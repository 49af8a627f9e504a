#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "sdof/geometry.hpp"
#include "sdof/imaging.hpp"
#include "sdof/optflow.hpp"

namespace sdof::tracking {

using Rng = std::mt19937_64;

struct Detection {
    BBox bbox;
    double score = 1.0;
    /// Cropped to the box: dimensions equal the rounded box size, pixel (0, 0)
    /// lies at image pixel (round(x), round(y)).
    std::optional<imaging::BitMask> mask;
};

struct Track {
    int id = 0;
    BBox bbox;
    std::vector<Point2> points;
    int miss_frames = 0;
    int age = 0;
    int hits = 0;
};

double iou(const BBox& a, const BBox& b);

/// Continuous band [y, y + frac*h) spanning the full box width.
struct HeadBand {
    double x0, x1;
    double y0, y1;
};

HeadBand head_band(const BBox& box, double frac);

/// Integer pixel rows/columns [begin, end) covered by a band. Never empty:
/// a band thinner than one row still yields the top pixel row of the box.
struct PixelRange {
    int col_begin, col_end;
    int row_begin, row_end;

    bool empty() const { return col_begin >= col_end || row_begin >= row_end; }
};

PixelRange rasterize(const HeadBand& band);

struct SamplingOptions {
    double head_frac = 0.3;
    int erosion_iters = 2;
    /// Pixels outside [0, width) x [0, height) are never eligible; <= 0 disables clipping.
    int image_width = 0;
    int image_height = 0;
};

/// Uniform sampling without replacement of up to `q` pixel positions in the
/// head band, restricted to the eroded mask when one is given.
/// Throws Errc::NoEligiblePixels when nothing is eligible.
std::vector<Point2> sample_points(const BBox& box, const imaging::BitMask* mask, int q,
                                  const SamplingOptions& options, Rng& rng);

Displacement median_shift(std::span<const Displacement> displacements);

/// Chi-square(2) quantile at `confidence`, i.e. -2 ln(1 - confidence).
double chi2_2dof_quantile(double confidence);

/// Squared-distance bound for a new 2-D observation judged against the mean
/// and covariance of `reference_count` other points (Hotelling T^2 prediction
/// region). Tends to chi2_2dof_quantile as the count grows. Needs >= 3.
double hotelling_gate(std::size_t reference_count, double confidence);

/// Indices of points kept by the Hotelling T^2 gate, in input order. Each
/// point is tested against the statistics of the others.
std::vector<std::size_t> hotelling_inliers(std::span<const Point2> points, double confidence = 0.99);
std::vector<Point2> hotelling_filter(std::span<const Point2> points, double confidence = 0.99);

/// Mean squared distance to the centroid.
double variance(std::span<const Point2> points);

/// var(P_t) / var(P_{t-1}); both sets are restricted to the Hotelling inliers
/// of the displaced set. Throws Errc::DegenerateVariance when the previous
/// spread is zero.
double variance_ratio(std::span<const Point2> prev_points, std::span<const Displacement> displacements,
                      double confidence = 0.99);

/// Drops lost points, displaces the rest, filters outliers, and shifts the box
/// by the median surviving displacement. Throws Errc::AllPointsLost.
Track propagate(const Track& track, std::span<const optflow::FlowResult> flows, double confidence = 0.99);

struct TerminationRules {
    int min_points = 3;         // R
    int max_miss_frames = 10;   // M
    double tau_var = 2.0;
    bool use_variance = true;
};

enum class TerminationReason { None, PointLoss, VarianceRatio, MissTimeout };

std::string_view to_string(TerminationReason reason);

struct TerminationDecision {
    bool terminate = false;
    TerminationReason reason = TerminationReason::None;
};

TerminationDecision should_terminate(const Track& track, double alpha, const TerminationRules& rules);

}  // namespace sdof::tracking
