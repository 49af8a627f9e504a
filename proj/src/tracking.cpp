#include "sdof/tracking.hpp"

#include <algorithm>
#include <cmath>

#include "sdof/error.hpp"

namespace sdof::tracking {

double iou(const BBox& a, const BBox& b) {
    const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

HeadBand head_band(const BBox& box, double frac) {
    if (!(frac > 0.0 && frac <= 1.0)) throw Error(Errc::InvalidArgument, "head fraction must be in (0, 1]");
    return {box.x, box.x + box.w, box.y, box.y + frac * box.h};
}

namespace {

// ceil() that ignores representation noise such as 20 + 0.3 * 100 = 50.000000000000007.
int ceil_tolerant(double v) { return static_cast<int>(std::ceil(v - 1e-9)); }

}  // namespace

PixelRange rasterize(const HeadBand& band) {
    PixelRange r{};
    r.col_begin = ceil_tolerant(band.x0);
    r.col_end = std::max(ceil_tolerant(band.x1), r.col_begin + 1);
    r.row_begin = ceil_tolerant(band.y0);
    r.row_end = std::max(ceil_tolerant(band.y1), r.row_begin + 1);
    return r;
}

std::vector<Point2> sample_points(const BBox& box, const imaging::BitMask* mask, int q,
                                  const SamplingOptions& options, Rng& rng) {
    if (q < 1) throw Error(Errc::InvalidArgument, "q must be >= 1");
    PixelRange range = rasterize(head_band(box, options.head_frac));
    if (options.image_width > 0 && options.image_height > 0) {
        range.col_begin = std::max(range.col_begin, 0);
        range.row_begin = std::max(range.row_begin, 0);
        range.col_end = std::min(range.col_end, options.image_width);
        range.row_end = std::min(range.row_end, options.image_height);
    }

    std::vector<Point2> eligible;
    if (!range.empty()) {
        eligible.reserve(static_cast<std::size_t>(range.col_end - range.col_begin) *
                         static_cast<std::size_t>(range.row_end - range.row_begin));
    }
    if (mask != nullptr) {
        const imaging::BitMask eroded = imaging::erode(*mask, options.erosion_iters);
        const int ox = static_cast<int>(std::lround(box.x));
        const int oy = static_cast<int>(std::lround(box.y));
        for (int r = range.row_begin; r < range.row_end; ++r)
            for (int c = range.col_begin; c < range.col_end; ++c)
                if (eroded.contains(c - ox, r - oy) && eroded.at(c - ox, r - oy))
                    eligible.push_back({static_cast<double>(c), static_cast<double>(r)});
    } else {
        for (int r = range.row_begin; r < range.row_end; ++r)
            for (int c = range.col_begin; c < range.col_end; ++c)
                eligible.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
    if (eligible.empty()) throw Error(Errc::NoEligiblePixels, "no eligible pixels in the head band");

    // Partial Fisher-Yates: the first k entries become a uniform sample.
    const std::size_t k = std::min(eligible.size(), static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
        std::swap(eligible[i], eligible[pick(rng)]);
    }
    eligible.resize(k);
    return eligible;
}

namespace {

double median_of(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

Displacement median_shift(std::span<const Displacement> displacements) {
    if (displacements.empty()) throw Error(Errc::EmptyInput, "median of an empty displacement list");
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(displacements.size());
    ys.reserve(displacements.size());
    for (const auto& d : displacements) {
        xs.push_back(d.dx);
        ys.push_back(d.dy);
    }
    return {median_of(xs), median_of(ys)};
}

double chi2_2dof_quantile(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error(Errc::InvalidArgument, "confidence must be in (0, 1)");
    return -2.0 * std::log1p(-confidence);
}

double hotelling_gate(std::size_t reference_count, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error(Errc::InvalidArgument, "confidence must be in (0, 1)");
    if (reference_count < 3) throw Error(Errc::InvalidArgument, "Hotelling gate needs at least 3 reference points");
    // F(2, k) has a closed-form quantile: k/2 * ((1 - c)^(-2/k) - 1).
    const double m = static_cast<double>(reference_count);
    const double k = m - 2.0;
    const double f = 0.5 * k * std::expm1(-2.0 / k * std::log1p(-confidence));
    return (m + 1.0) / m * 2.0 * (m - 1.0) / k * f;
}

namespace {

constexpr double kSingularDet = 1e-12;

struct Moments {
    double mx = 0, my = 0;
    double sxx = 0, sxy = 0, syy = 0;  // sample covariance (n - 1 denominator)
    double det() const { return sxx * syy - sxy * sxy; }
};

// Moments of all points except index `skip` (pass points.size() to keep all).
Moments moments(std::span<const Point2> points, std::size_t skip) {
    Moments m;
    const double n = static_cast<double>(points.size() - (skip < points.size() ? 1 : 0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == skip) continue;
        m.mx += points[i].x;
        m.my += points[i].y;
    }
    m.mx /= n;
    m.my /= n;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == skip) continue;
        const double dx = points[i].x - m.mx;
        const double dy = points[i].y - m.my;
        m.sxx += dx * dx;
        m.sxy += dx * dy;
        m.syy += dy * dy;
    }
    m.sxx /= n - 1;
    m.sxy /= n - 1;
    m.syy /= n - 1;
    return m;
}

}  // namespace

// Each point is tested against the mean and covariance of the remaining
// points. With the point included, the squared distance is bounded by
// (n-1)^2/n, which is below the 0.99 gate for n <= 11.
std::vector<std::size_t> hotelling_inliers(std::span<const Point2> points, double confidence) {
    std::vector<std::size_t> keep(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) keep[i] = i;
    if (points.size() < 4) return keep;
    if (std::abs(moments(points, points.size()).det()) < kSingularDet) return keep;

    const double gate = hotelling_gate(points.size() - 1, confidence);
    keep.clear();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Moments m = moments(points, i);
        const double det = m.det();
        if (std::abs(det) < kSingularDet) {
            keep.push_back(i);
            continue;
        }
        const double dx = points[i].x - m.mx;
        const double dy = points[i].y - m.my;
        const double d2 = (m.syy * dx * dx - 2.0 * m.sxy * dx * dy + m.sxx * dy * dy) / det;
        if (d2 <= gate) keep.push_back(i);
    }
    return keep;
}

std::vector<Point2> hotelling_filter(std::span<const Point2> points, double confidence) {
    std::vector<Point2> out;
    for (std::size_t i : hotelling_inliers(points, confidence)) out.push_back(points[i]);
    return out;
}

double variance(std::span<const Point2> points) {
    if (points.empty()) throw Error(Errc::EmptyInput, "variance of an empty point set");
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double acc = 0.0;
    for (const auto& p : points) acc += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    return acc / n;
}

double variance_ratio(std::span<const Point2> prev_points, std::span<const Displacement> displacements,
                      double confidence) {
    if (prev_points.empty()) throw Error(Errc::EmptyInput, "variance ratio of an empty point set");
    if (prev_points.size() != displacements.size())
        throw Error(Errc::InvalidArgument, "points and displacements are not aligned");
    std::vector<Point2> moved(prev_points.size());
    for (std::size_t i = 0; i < prev_points.size(); ++i) moved[i] = prev_points[i] + displacements[i];

    const auto inliers = hotelling_inliers(moved, confidence);
    std::vector<Point2> before;
    std::vector<Point2> after;
    before.reserve(inliers.size());
    after.reserve(inliers.size());
    for (std::size_t i : inliers) {
        before.push_back(prev_points[i]);
        after.push_back(moved[i]);
    }
    const double denom = variance(before);
    if (denom <= 1e-12) throw Error(Errc::DegenerateVariance, "previous point set has zero spread");
    return variance(after) / denom;
}

Track propagate(const Track& track, std::span<const optflow::FlowResult> flows, double confidence) {
    if (flows.size() != track.points.size())
        throw Error(Errc::InvalidArgument, "flow results are not aligned with track points");
    std::vector<Point2> moved;
    std::vector<Displacement> shifts;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        if (!flows[i].ok()) continue;
        moved.push_back(track.points[i] + flows[i].displacement);
        shifts.push_back(flows[i].displacement);
    }
    if (moved.empty()) throw Error(Errc::AllPointsLost, "track " + std::to_string(track.id) + " lost all points");

    const auto inliers = hotelling_inliers(moved, confidence);
    Track out = track;
    out.points.clear();
    std::vector<Displacement> kept;
    for (std::size_t i : inliers) {
        out.points.push_back(moved[i]);
        kept.push_back(shifts[i]);
    }
    const Displacement shift = median_shift(kept);
    out.bbox.x += shift.dx;
    out.bbox.y += shift.dy;
    return out;
}

std::string_view to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::None: return "None";
        case TerminationReason::PointLoss: return "PointLoss";
        case TerminationReason::VarianceRatio: return "VarianceRatio";
        case TerminationReason::MissTimeout: return "MissTimeout";
    }
    return "Unknown";
}

TerminationDecision should_terminate(const Track& track, double alpha, const TerminationRules& rules) {
    if (static_cast<int>(track.points.size()) < rules.min_points) return {true, TerminationReason::PointLoss};
    if (rules.use_variance && alpha > rules.tau_var) return {true, TerminationReason::VarianceRatio};
    if (track.miss_frames > rules.max_miss_frames) return {true, TerminationReason::MissTimeout};
    return {};
}

}  // namespace sdof::tracking
