#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "slelab/errors.hpp"

namespace slelab {

using Complex = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    Point() = default;
    Point(double px, double py) : x(px), y(py) {}
    explicit Point(Complex z) : x(z.real()), y(z.imag()) {}

    Complex cplx() const { return {x, y}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double dist(Point a, Point b) { return norm(a - b); }

// Squared distance from p to the closed segment [a, b].
inline double dist2_point_segment(Point p, Point a, Point b) {
    Point ab = b - a;
    double len2 = norm2(ab);
    if (len2 == 0.0) return norm2(p - a);
    double t = dot(p - a, ab) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return norm2(p - (a + t * ab));
}

inline double dist_point_segment(Point p, Point a, Point b) {
    return std::sqrt(dist2_point_segment(p, a, b));
}

// Closest point on segment [a, b] to p.
inline Point closest_point_segment(Point p, Point a, Point b) {
    Point ab = b - a;
    double len2 = norm2(ab);
    if (len2 == 0.0) return a;
    double t = dot(p - a, ab) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return a + t * ab;
}

// True iff closed segments [a,b] and [c,d] intersect (touching counts).
inline bool segments_intersect(Point a, Point b, Point c, Point d) {
    auto orient = [](Point p, Point q, Point r) {
        double v = cross(q - p, r - p);
        if (v > 0) return 1;
        if (v < 0) return -1;
        return 0;
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    auto on_seg = [](Point p, Point q, Point r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    if (o1 == 0 && on_seg(a, b, c)) return true;
    if (o2 == 0 && on_seg(a, b, d)) return true;
    if (o3 == 0 && on_seg(c, d, a)) return true;
    if (o4 == 0 && on_seg(c, d, b)) return true;
    return false;
}

// Point-in-polygon by crossing count. Boundary points count as inside when
// `closed` is true. The polygon is a simple closed loop (no repeated last
// vertex required).
inline bool point_in_polygon(Point p, const std::vector<Point>& poly, bool closed = true,
                             double eps = 1e-12) {
    std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Point a = poly[i], b = poly[(i + 1) % n];
        if (dist2_point_segment(p, a, b) <= eps * eps) return closed;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xi = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

// Parameters t in [0,1] where |a + t(b-a) - z| = r, sorted.
inline int circle_segment_intersections(Point z, double r, Point a, Point b, double out[2]) {
    Point d = b - a, f = a - z;
    double A = norm2(d);
    double B = 2.0 * dot(f, d);
    double C = norm2(f) - r * r;
    if (A == 0.0) return 0;
    double disc = B * B - 4 * A * C;
    if (disc < 0) return 0;
    double sq = std::sqrt(disc);
    double t0 = (-B - sq) / (2 * A), t1 = (-B + sq) / (2 * A);
    int k = 0;
    if (t0 >= 0.0 && t0 <= 1.0) out[k++] = t0;
    if (t1 >= 0.0 && t1 <= 1.0 && t1 != t0) out[k++] = t1;
    return k;
}

inline double polyline_length(const std::vector<Point>& pts) {
    double s = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) s += dist(pts[i - 1], pts[i]);
    return s;
}

inline double polyline_diameter(const std::vector<Point>& pts) {
    double d2 = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            d2 = std::max(d2, norm2(pts[i] - pts[j]));
    return std::sqrt(d2);
}

inline double dist_point_polyline(Point p, const std::vector<Point>& pts) {
    if (pts.empty()) return std::numeric_limits<double>::infinity();
    if (pts.size() == 1) return dist(p, pts[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i)
        best = std::min(best, dist2_point_segment(p, pts[i - 1], pts[i]));
    return std::sqrt(best);
}

// Regular polygon approximation of a circle, counterclockwise.
inline std::vector<Point> circle_polygon(Point center, double radius, int sides = 512) {
    std::vector<Point> poly;
    poly.reserve(sides);
    for (int i = 0; i < sides; ++i) {
        double th = 2.0 * M_PI * i / sides;
        poly.push_back({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
    }
    return poly;
}

} // namespace slelab
