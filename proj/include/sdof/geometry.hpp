#pragma once

namespace sdof {

/// Subpixel image position. Integer coordinates coincide with pixel centers,
/// so a point (c, r) samples pixel column c, row r exactly.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Displacement {
    double dx = 0.0;
    double dy = 0.0;

    friend bool operator==(const Displacement&, const Displacement&) = default;
};

inline Point2 operator+(Point2 p, Displacement d) { return {p.x + d.dx, p.y + d.dy}; }

/// Axis-aligned box; (x, y) is the top-left corner and the box covers
/// [x, x + w) x [y, y + h).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

}  // namespace sdof
