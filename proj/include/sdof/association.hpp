#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sdof/geometry.hpp"

namespace sdof::association {

/// Row-major rows x cols matrix of finite, non-negative costs.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return costs_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return costs_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> costs_;
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col), ascending row
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;

    double total_cost(const CostMatrix& costs) const;
};

/// Minimum-cost assignment of min(rows, cols) pairs (shortest augmenting
/// paths with potentials, O(n^2 m)).
Assignment hungarian(const CostMatrix& costs);

/// Hungarian on 1 - IoU, then drops matches whose cost exceeds `gate`.
/// Rows are tracks, columns are detections.
Assignment gated_match(std::span<const BBox> tracks, std::span<const BBox> detections, double gate);

}  // namespace sdof::association
