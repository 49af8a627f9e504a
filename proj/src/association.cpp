#include "sdof/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdof/error.hpp"
#include "sdof/tracking.hpp"

namespace sdof::association {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), costs_(rows * cols, fill) {}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs)
    : rows_(rows), cols_(cols), costs_(std::move(costs)) {
    if (costs_.size() != rows * cols) throw Error(Errc::InvalidArgument, "cost buffer size mismatch");
}

double Assignment::total_cost(const CostMatrix& costs) const {
    double sum = 0.0;
    for (auto [r, c] : matches) sum += costs(r, c);
    return sum;
}

namespace {

// Solves with n <= m (rows <= cols). Returns col index per row.
// Rows are inserted in ascending order and columns scanned in ascending order
// with strict comparisons, so the result is deterministic for tied costs.
std::vector<std::size_t> solve_wide(std::size_t n, std::size_t m, const auto& cost) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based arrays; index 0 is the virtual source column.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

Assignment hungarian(const CostMatrix& costs) {
    const std::size_t rows = costs.rows();
    const std::size_t cols = costs.cols();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (!std::isfinite(costs(r, c))) throw Error(Errc::InvalidArgument, "cost matrix has a non-finite entry");

    Assignment out;
    std::vector<char> row_used(rows, 0), col_used(cols, 0);
    if (rows > 0 && cols > 0) {
        if (rows <= cols) {
            const auto row_to_col = solve_wide(rows, cols, [&](std::size_t r, std::size_t c) { return costs(r, c); });
            for (std::size_t r = 0; r < rows; ++r) out.matches.emplace_back(r, row_to_col[r]);
        } else {
            const auto col_to_row = solve_wide(cols, rows, [&](std::size_t c, std::size_t r) { return costs(r, c); });
            for (std::size_t c = 0; c < cols; ++c) out.matches.emplace_back(col_to_row[c], c);
            std::sort(out.matches.begin(), out.matches.end());
        }
    }
    for (auto [r, c] : out.matches) {
        row_used[r] = 1;
        col_used[c] = 1;
    }
    for (std::size_t r = 0; r < rows; ++r)
        if (!row_used[r]) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c)
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    return out;
}

Assignment gated_match(std::span<const BBox> tracks, std::span<const BBox> detections, double gate) {
    if (!(gate >= 0.0 && gate <= 1.0)) throw Error(Errc::InvalidArgument, "gate must lie in [0, 1]");
    CostMatrix costs(tracks.size(), detections.size());
    for (std::size_t r = 0; r < tracks.size(); ++r)
        for (std::size_t c = 0; c < detections.size(); ++c)
            costs(r, c) = 1.0 - tracking::iou(tracks[r], detections[c]);

    const Assignment solved = hungarian(costs);
    Assignment out;
    std::vector<char> row_used(tracks.size(), 0), col_used(detections.size(), 0);
    for (auto [r, c] : solved.matches) {
        if (costs(r, c) > gate) continue;
        out.matches.emplace_back(r, c);
        row_used[r] = 1;
        col_used[c] = 1;
    }
    for (std::size_t r = 0; r < tracks.size(); ++r)
        if (!row_used[r]) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < detections.size(); ++c)
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    return out;
}

}  // namespace sdof::association
