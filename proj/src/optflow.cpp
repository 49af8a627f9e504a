#include "sdof/optflow.hpp"

#include <algorithm>
#include <cmath>

#include "sdof/error.hpp"

namespace sdof::optflow {

using imaging::ImageF;

void LkParams::validate() const {
    if (window_half < 1) throw Error(Errc::InvalidValue, "window_half must be >= 1", "lk_window_half");
    if (levels < 1) throw Error(Errc::InvalidValue, "levels must be >= 1", "lk_levels");
    if (max_iters < 1) throw Error(Errc::InvalidValue, "max_iters must be >= 1", "lk_max_iters");
    if (!(epsilon > 0.0)) throw Error(Errc::InvalidValue, "epsilon must be > 0", "lk_epsilon");
    if (!(min_eigen >= 0.0)) throw Error(Errc::InvalidValue, "min_eigen must be >= 0", "lk_min_eigen");
    if (!(max_residual > 0.0)) throw Error(Errc::InvalidValue, "max_residual must be > 0", "lk_max_residual");
}

std::string_view to_string(FlowStatus status) {
    switch (status) {
        case FlowStatus::Ok: return "Ok";
        case FlowStatus::LostSingular: return "LostSingular";
        case FlowStatus::LostOutOfBounds: return "LostOutOfBounds";
        case FlowStatus::LostDiverged: return "LostDiverged";
    }
    return "Unknown";
}

FlowPyramid make_flow_pyramid(const ImageF& image, int levels) {
    if (levels < 1) throw Error(Errc::InvalidArgument, "pyramid needs at least one level");
    const int usable = std::min(levels, std::max(1, imaging::max_pyramid_levels(image.width(), image.height(), 3)));
    FlowPyramid out;
    out.image = imaging::build_pyramid(image, usable);
    out.grad_x.reserve(static_cast<std::size_t>(usable));
    out.grad_y.reserve(static_cast<std::size_t>(usable));
    for (const ImageF& level : out.image.levels) {
        auto [gx, gy] = imaging::gradient(level);
        out.grad_x.push_back(std::move(gx));
        out.grad_y.push_back(std::move(gy));
    }
    return out;
}

namespace {

// Samples a (2*half+1)^2 window centred at (cx, cy). All window pixels share
// the same fractional offset, so the bilinear weights are computed once.
// Coordinates outside the image are clamped to the border.
class WindowSampler {
public:
    WindowSampler(double cx, double cy, int half) : half_(half) {
        const double fx0 = std::floor(cx);
        const double fy0 = std::floor(cy);
        x0_ = static_cast<int>(fx0) - half;
        y0_ = static_cast<int>(fy0) - half;
        const double ax = cx - fx0;
        const double ay = cy - fy0;
        w00_ = (1 - ax) * (1 - ay);
        w10_ = ax * (1 - ay);
        w01_ = (1 - ax) * ay;
        w11_ = ax * ay;
    }

    // `out` receives side*side samples, row-major.
    void sample(const ImageF& img, std::vector<double>& out) const {
        const int side = 2 * half_ + 1;
        out.resize(static_cast<std::size_t>(side) * side);
        const int w = img.width();
        const int h = img.height();
        const bool inside = x0_ >= 0 && y0_ >= 0 && x0_ + side < w && y0_ + side < h;
        std::size_t k = 0;
        if (inside) {
            for (int j = 0; j < side; ++j) {
                const double* r0 = img.row(y0_ + j).data() + x0_;
                const double* r1 = img.row(y0_ + j + 1).data() + x0_;
                for (int i = 0; i < side; ++i)
                    out[k++] = w00_ * r0[i] + w10_ * r0[i + 1] + w01_ * r1[i] + w11_ * r1[i + 1];
            }
            return;
        }
        for (int j = 0; j < side; ++j) {
            const int ya = std::clamp(y0_ + j, 0, h - 1);
            const int yb = std::clamp(y0_ + j + 1, 0, h - 1);
            for (int i = 0; i < side; ++i) {
                const int xa = std::clamp(x0_ + i, 0, w - 1);
                const int xb = std::clamp(x0_ + i + 1, 0, w - 1);
                out[k++] = w00_ * img.at(xa, ya) + w10_ * img.at(xb, ya) + w01_ * img.at(xa, yb) +
                           w11_ * img.at(xb, yb);
            }
        }
    }

private:
    int half_;
    int x0_ = 0;
    int y0_ = 0;
    double w00_ = 0, w10_ = 0, w01_ = 0, w11_ = 0;
};

bool window_inside(double cx, double cy, int half, int width, int height) {
    return cx - half >= 0.0 && cy - half >= 0.0 && cx + half <= width - 1 && cy + half <= height - 1;
}

struct Scratch {
    std::vector<double> prev;
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> next;
};

FlowResult track_point(const FlowPyramid& prev, const FlowPyramid& next, Point2 p, const LkParams& params,
                       int levels, Scratch& s) {
    FlowResult result;
    const int half = params.window_half;
    const double area = static_cast<double>((2 * half + 1) * (2 * half + 1));
    const int w0 = prev.width();
    const int h0 = prev.height();

    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !window_inside(p.x, p.y, half, w0, h0)) {
        result.status = FlowStatus::LostOutOfBounds;
        return result;
    }

    double gx = 0.0;
    double gy = 0.0;
    for (int level = levels - 1; level >= 0; --level) {
        const double scale = std::ldexp(1.0, -level);
        const double px = p.x * scale;
        const double py = p.y * scale;
        const ImageF& next_img = next.image[static_cast<std::size_t>(level)];

        const WindowSampler prev_window(px, py, half);
        prev_window.sample(prev.image[static_cast<std::size_t>(level)], s.prev);
        prev_window.sample(prev.grad_x[static_cast<std::size_t>(level)], s.gx);
        prev_window.sample(prev.grad_y[static_cast<std::size_t>(level)], s.gy);

        double a = 0.0, b = 0.0, c = 0.0;
        for (std::size_t k = 0; k < s.prev.size(); ++k) {
            a += s.gx[k] * s.gx[k];
            b += s.gx[k] * s.gy[k];
            c += s.gy[k] * s.gy[k];
        }
        const double det = a * c - b * b;
        const double min_eig = 0.5 * ((a + c) - std::sqrt((a - c) * (a - c) + 4.0 * b * b));
        if (min_eig / area < params.min_eigen || det <= 0.0) {
            if (level == 0) {
                result.status = FlowStatus::LostSingular;
                return result;
            }
            gx *= 2.0;
            gy *= 2.0;
            continue;
        }

        double vx = 0.0;
        double vy = 0.0;
        for (int iter = 0; iter < params.max_iters; ++iter) {
            const double qx = px + gx + vx;
            const double qy = py + gy + vy;
            if (level == 0 && !window_inside(qx, qy, half, w0, h0)) {
                result.status = FlowStatus::LostOutOfBounds;
                return result;
            }
            if (!std::isfinite(qx) || !std::isfinite(qy)) {
                result.status = FlowStatus::LostDiverged;
                return result;
            }
            WindowSampler(qx, qy, half).sample(next_img, s.next);
            double bx = 0.0;
            double by = 0.0;
            for (std::size_t k = 0; k < s.prev.size(); ++k) {
                const double diff = s.prev[k] - s.next[k];
                bx += diff * s.gx[k];
                by += diff * s.gy[k];
            }
            const double ex = (c * bx - b * by) / det;
            const double ey = (a * by - b * bx) / det;
            vx += ex;
            vy += ey;
            if (ex * ex + ey * ey < params.epsilon * params.epsilon) break;
        }
        gx += vx;
        gy += vy;
        if (level > 0) {
            gx *= 2.0;
            gy *= 2.0;
        }
    }

    if (!std::isfinite(gx) || !std::isfinite(gy)) {
        result.status = FlowStatus::LostDiverged;
        return result;
    }
    result.displacement = {gx, gy};
    if (!window_inside(p.x + gx, p.y + gy, half, w0, h0)) {
        result.status = FlowStatus::LostOutOfBounds;
        return result;
    }

    // Residual at full resolution, against the unsmoothed level-0 window.
    WindowSampler(p.x, p.y, half).sample(prev.image[0], s.prev);
    WindowSampler(p.x + gx, p.y + gy, half).sample(next.image[0], s.next);
    double sum = 0.0;
    for (std::size_t k = 0; k < s.prev.size(); ++k) sum += std::abs(s.prev[k] - s.next[k]);
    result.residual = sum / area;
    if (result.residual > params.max_residual) result.status = FlowStatus::LostDiverged;
    return result;
}

}  // namespace

std::vector<FlowResult> lk_track(const FlowPyramid& prev, const FlowPyramid& next, std::span<const Point2> points,
                                 const LkParams& params) {
    params.validate();
    if (prev.levels() == 0 || next.levels() == 0) throw Error(Errc::InvalidArgument, "empty pyramid");
    if (prev.width() != next.width() || prev.height() != next.height() || prev.levels() != next.levels())
        throw Error(Errc::DimensionMismatch, "prev and next pyramids differ in size or depth");
    const int levels = std::min(params.levels, static_cast<int>(prev.levels()));

    std::vector<FlowResult> results;
    results.reserve(points.size());
    Scratch scratch;
    for (const Point2& p : points) results.push_back(track_point(prev, next, p, params, levels, scratch));
    return results;
}

}  // namespace sdof::optflow
