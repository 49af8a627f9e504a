#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "sdof/geometry.hpp"
#include "sdof/imaging.hpp"

namespace sdof::optflow {

struct LkParams {
    int window_half = 7;  // window is (2*window_half+1)^2
    int levels = 3;
    int max_iters = 30;
    double epsilon = 0.01;        // px, convergence on update norm
    double min_eigen = 1e-4;      // smaller structure-tensor eigenvalue / window area
    double max_residual = 20.0;   // mean |prev - next| over the window, intensity units

    void validate() const;
};

enum class FlowStatus { Ok, LostSingular, LostOutOfBounds, LostDiverged };

std::string_view to_string(FlowStatus status);

struct FlowResult {
    Displacement displacement;
    FlowStatus status = FlowStatus::Ok;
    double residual = 0.0;

    bool ok() const { return status == FlowStatus::Ok; }
};

/// Image pyramid with per-level gradients, built once per frame and reused
/// when that frame becomes the previous one.
struct FlowPyramid {
    imaging::Pyramid image;
    std::vector<imaging::ImageF> grad_x;
    std::vector<imaging::ImageF> grad_y;

    std::size_t levels() const { return image.size(); }
    int width() const { return image[0].width(); }
    int height() const { return image[0].height(); }
};

/// Levels whose size drops below 3x3 (the gradient minimum) are not built,
/// so the result may hold fewer than `levels` levels for small images.
FlowPyramid make_flow_pyramid(const imaging::ImageF& image, int levels);

/// Sparse pyramidal Lucas-Kanade. Results are returned in input order.
std::vector<FlowResult> lk_track(const FlowPyramid& prev, const FlowPyramid& next,
                                 std::span<const Point2> points, const LkParams& params);

}  // namespace sdof::optflow
