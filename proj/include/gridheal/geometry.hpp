#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace gridheal {

/// Planar point in projected meters.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
};

/// Straight-line distance on the projected plane.
inline double euclidean_distance(const Point& p, const Point& q) {
    return std::hypot(p.x - q.x, p.y - q.y);
}

inline double squared_distance(const Point& p, const Point& q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    return dx * dx + dy * dy;
}

/// Closed-disk coverage test: true iff d <= r + tol. The tolerance keeps
/// boundary placements stable against floating-point noise.
inline bool is_covered(double d, double r, double tol) {
    return d <= r + tol;
}

/// Both intersection points of two radius-r circles whose centers are
/// strictly less than 2r apart (and not coincident). Empty otherwise.
inline std::vector<Point> circle_intersections(const Point& c1, const Point& c2, double r) {
    const double d = euclidean_distance(c1, c2);
    if (d <= 0.0 || d >= 2.0 * r) return {};
    const double half = d / 2.0;
    const double h = std::sqrt(std::max(0.0, r * r - half * half));
    const Point mid{(c1.x + c2.x) / 2.0, (c1.y + c2.y) / 2.0};
    const double ux = (c2.x - c1.x) / d;
    const double uy = (c2.y - c1.y) / d;
    // perpendicular offset of length h on both sides of the chord midpoint
    return {Point{mid.x - uy * h, mid.y + ux * h}, Point{mid.x + uy * h, mid.y - ux * h}};
}

/// Axis-aligned extent of a point cloud.
struct BoundingBox {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    bool empty() const { return min_x > max_x; }

    void extend(const Point& p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }

    void inflate(double margin) {
        if (empty()) return;
        min_x -= margin;
        min_y -= margin;
        max_x += margin;
        max_y += margin;
    }

    double diagonal() const {
        if (empty()) return 0.0;
        return std::hypot(max_x - min_x, max_y - min_y);
    }
};

/// Vertices of a regular n-gon approximating the circle around `center`,
/// starting at angle 0 and proceeding counter-clockwise.
inline std::vector<Point> circle_polygon(const Point& center, double radius, int sides) {
    std::vector<Point> ring;
    ring.reserve(static_cast<std::size_t>(sides));
    for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(sides);
        ring.push_back(Point{center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
    return ring;
}

} // namespace gridheal
