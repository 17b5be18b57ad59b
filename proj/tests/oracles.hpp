#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/geometry.hpp"

namespace oracles {

using slelab::Point;

// Subdivide every segment into pieces of length at most h.
inline std::vector<Point> refine_polyline(const std::vector<Point>& pts, double h) {
    std::vector<Point> out;
    out.push_back(pts.front());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double len = slelab::dist(pts[i - 1], pts[i]);
        int k = std::max(1, static_cast<int>(std::ceil(len / h)));
        for (int j = 1; j <= k; ++j)
            out.push_back(pts[i - 1] + (static_cast<double>(j) / k) * (pts[i] - pts[i - 1]));
    }
    return out;
}

// Classic discrete Frechet (coupling distance) via dynamic programming.
// Upper-bounds the continuous value; the gap is at most one refined edge.
inline double discrete_frechet(const std::vector<Point>& a, const std::vector<Point>& b) {
    std::size_t n = a.size(), m = b.size();
    std::vector<double> prev(m), cur(m);
    for (std::size_t j = 0; j < m; ++j)
        prev[j] = std::max(j == 0 ? 0.0 : prev[j - 1], slelab::dist(a[0], b[j]));
    for (std::size_t i = 1; i < n; ++i) {
        cur[0] = std::max(prev[0], slelab::dist(a[i], b[0]));
        for (std::size_t j = 1; j < m; ++j) {
            double reach = std::min(std::min(prev[j], cur[j - 1]), prev[j - 1]);
            cur[j] = std::max(reach, slelab::dist(a[i], b[j]));
        }
        prev.swap(cur);
    }
    return prev[m - 1];
}

// Second, independently written free-space decision procedure: full 2D
// tables, no rolling arrays, intervals as (lo, hi, valid) triples.
struct FsInterval {
    double lo = 0, hi = -1;
    bool ok() const { return lo <= hi; }
};

inline FsInterval fs_free(Point q, Point a, Point b, double d) {
    double ax = b.x - a.x, ay = b.y - a.y;
    double fx = a.x - q.x, fy = a.y - q.y;
    double A = ax * ax + ay * ay;
    double B = 2 * (fx * ax + fy * ay);
    double C = fx * fx + fy * fy - d * d;
    if (A == 0) return C <= 0 ? FsInterval{0, 1} : FsInterval{};
    double disc = B * B - 4 * A * C;
    if (disc < 0) return {};
    double s = std::sqrt(disc);
    double lo = std::max(0.0, (-B - s) / (2 * A));
    double hi = std::min(1.0, (-B + s) / (2 * A));
    if (lo > hi) return {};
    return {lo, hi};
}

inline bool fs_decision(const std::vector<Point>& P, const std::vector<Point>& Q, double d) {
    auto hyp = [](Point u, Point v) { return std::hypot(u.x - v.x, u.y - v.y); };
    if (P.size() == 1 || Q.size() == 1) {
        const std::vector<Point>& poly = P.size() == 1 ? Q : P;
        Point pt = P.size() == 1 ? P[0] : Q[0];
        for (const Point& v : poly)
            if (hyp(pt, v) > d) return false;
        return true;
    }
    if (hyp(P.front(), Q.front()) > d || hyp(P.back(), Q.back()) > d) return false;
    std::size_t n = P.size() - 1, m = Q.size() - 1;
    // LF(i,j): free interval on edge {P[i]} x Qseg j, i = 0..n, j = 0..m-1
    // BF(i,j): free interval on edge Pseg i x {Q[j]}, i = 0..n-1, j = 0..m
    std::vector<std::vector<FsInterval>> LF(n + 1, std::vector<FsInterval>(m));
    std::vector<std::vector<FsInterval>> BF(n, std::vector<FsInterval>(m + 1));
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < m; ++j) LF[i][j] = fs_free(P[i], Q[j], Q[j + 1], d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= m; ++j) BF[i][j] = fs_free(Q[j], P[i], P[i + 1], d);
    std::vector<std::vector<FsInterval>> LR(n + 1, std::vector<FsInterval>(m));
    std::vector<std::vector<FsInterval>> BR(n, std::vector<FsInterval>(m + 1));
    // boundary of the diagram
    for (std::size_t j = 0; j < m; ++j) {
        bool prev = j == 0 || (LR[0][j - 1].ok() && LR[0][j - 1].hi >= 1);
        if (prev && LF[0][j].ok() && LF[0][j].lo <= 0) LR[0][j] = {0, LF[0][j].hi};
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool prev = i == 0 || (BR[i - 1][0].ok() && BR[i - 1][0].hi >= 1);
        if (prev && BF[i][0].ok() && BF[i][0].lo <= 0) BR[i][0] = {0, BF[i][0].hi};
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            FsInterval left = LR[i][j], bottom = BR[i][j];
            if (bottom.ok()) {
                LR[i + 1][j] = LF[i + 1][j];
            } else if (left.ok() && LF[i + 1][j].ok()) {
                double lo = std::max(LF[i + 1][j].lo, left.lo);
                if (lo <= LF[i + 1][j].hi) LR[i + 1][j] = {lo, LF[i + 1][j].hi};
            }
            if (left.ok()) {
                BR[i][j + 1] = BF[i][j + 1];
            } else if (bottom.ok() && BF[i][j + 1].ok()) {
                double lo = std::max(BF[i][j + 1].lo, bottom.lo);
                if (lo <= BF[i][j + 1].hi) BR[i][j + 1] = {lo, BF[i][j + 1].hi};
            }
        }
    }
    bool right = LR[n][m - 1].ok() && LR[n][m - 1].hi >= 1;
    bool top = BR[n - 1][m].ok() && BR[n - 1][m].hi >= 1;
    return right || top;
}

inline double frechet_bisect(const std::vector<Point>& P, const std::vector<Point>& Q,
                             double tol) {
    double lo = std::max(slelab::dist(P.front(), Q.front()), slelab::dist(P.back(), Q.back()));
    double hi = 0;
    for (const Point& a : P)
        for (const Point& b : Q) hi = std::max(hi, slelab::dist(a, b));
    if (fs_decision(P, Q, lo)) return lo;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (fs_decision(P, Q, mid)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Direct summation oracle for the driving-function metric on a dense grid.
inline double function_metric_direct(const slelab::DrivingFunction& a,
                                     const slelab::DrivingFunction& b, int terms = 60,
                                     int per_unit = 4096) {
    double total = 0;
    for (int n = 1; n <= terms; ++n) {
        double sup = 0;
        for (int k = 0; k <= n * per_unit; ++k) {
            double t = static_cast<double>(k) / per_unit;
            sup = std::max(sup, std::abs(a.at(t) - b.at(t)));
        }
        total += std::pow(0.5, n) * std::min(1.0, sup);
    }
    return total;
}

} // namespace oracles
