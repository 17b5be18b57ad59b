#include "slelab/curves.hpp"

#include <algorithm>
#include <cmath>

namespace slelab {

ParamCurve::ParamCurve(std::vector<double> times, std::vector<Point> pts)
    : t(std::move(times)), p(std::move(pts)) {
    validate();
}

void ParamCurve::validate() const {
    if (t.empty() || t.size() != p.size()) throw invalid_input("curve: empty or ragged samples");
    if (t.front() != 0.0 || t.back() != 1.0)
        throw invalid_input("curve: parameter must run from 0 to 1");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !p[i].finite()) throw invalid_input("curve: non-finite sample");
        if (i > 0 && t[i] <= t[i - 1])
            throw invalid_input("curve: times must be strictly increasing");
    }
}

Point ParamCurve::at(double time) const {
    if (time <= t.front()) return p.front();
    if (time >= t.back()) return p.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    double lam = (time - t[i - 1]) / (t[i] - t[i - 1]);
    return p[i - 1] + lam * (p[i] - p[i - 1]);
}

CurveClass::CurveClass(std::vector<Point> v) : vertices(std::move(v)) { validate(); }

void CurveClass::validate() const {
    if (vertices.empty()) throw invalid_input("curve class: needs at least one vertex");
    for (const Point& q : vertices)
        if (!q.finite()) throw invalid_input("curve class: non-finite vertex");
}

DrivingFunction::DrivingFunction(std::vector<double> times, std::vector<double> values)
    : t(std::move(times)), w(std::move(values)) {
    validate();
}

void DrivingFunction::validate() const {
    if (t.empty() || t.size() != w.size())
        throw invalid_input("driving: empty or ragged samples");
    if (t.front() != 0.0) throw invalid_input("driving: first sample must be at t = 0");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(w[i]))
            throw invalid_input("driving: non-finite sample");
        if (i > 0 && t[i] <= t[i - 1])
            throw invalid_input("driving: duplicate or decreasing sample times");
    }
}

double DrivingFunction::at(double time) const {
    if (time <= t.front()) return w.front();
    if (time >= t.back()) return w.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    double lam = (time - t[i - 1]) / (t[i] - t[i - 1]);
    return w[i - 1] + lam * (w[i] - w[i - 1]);
}

CurveClass canonicalize(const ParamCurve& c) {
    c.validate();
    std::vector<Point> v;
    v.reserve(c.p.size());
    for (const Point& q : c.p)
        if (v.empty() || !(v.back() == q)) v.push_back(q);
    return CurveClass(std::move(v));
}

namespace {

struct Interval {
    double lo = 1.0;
    double hi = 0.0;
    bool empty() const { return lo > hi; }
};

// Free interval {s in [0,1] : |a + s(b-a) - q| <= d}.
Interval free_interval(Point q, Point a, Point b, double d) {
    Point ab = b - a, f = a - q;
    double A = norm2(ab);
    if (A == 0.0) {
        return norm2(f) <= d * d ? Interval{0.0, 1.0} : Interval{};
    }
    double B = 2.0 * dot(f, ab);
    double C = norm2(f) - d * d;
    double disc = B * B - 4 * A * C;
    if (disc < 0) return {};
    double sq = std::sqrt(disc);
    double lo = (-B - sq) / (2 * A), hi = (-B + sq) / (2 * A);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (lo > hi) return {};
    return {lo, hi};
}

// Frechet distance from a single point to a polyline: sup over the polyline.
double point_curve_sup(Point q, const std::vector<Point>& poly) {
    double m = 0;
    for (const Point& v : poly) m = std::max(m, dist(q, v));
    return m;
}

} // namespace

bool frechet_at_most(const CurveClass& c1, const CurveClass& c2, double d) {
    const std::vector<Point>& P = c1.vertices;
    const std::vector<Point>& Q = c2.vertices;
    if (P.size() == 1) return point_curve_sup(P[0], Q) <= d;
    if (Q.size() == 1) return point_curve_sup(Q[0], P) <= d;
    if (dist(P.front(), Q.front()) > d || dist(P.back(), Q.back()) > d) return false;

    const std::size_t n = P.size() - 1, m = Q.size() - 1;
    // Free-space diagram over cells (i, j), i indexing P-segments and j
    // Q-segments. L[j] is the reachable interval on the left edge of cell
    // (i, j) (vertex P[i] against Q-segment j); B is the reachable interval
    // on the bottom edge of the cell currently being processed (vertex Q[j]
    // against P-segment i). Within a cell the free space is convex, so the
    // standard monotone propagation rules apply.
    std::vector<Interval> L(m);
    for (std::size_t j = 0; j < m; ++j) {
        Interval f = free_interval(P[0], Q[j], Q[j + 1], d);
        bool open = (j == 0) ? (f.lo <= 0.0 && !f.empty())
                             : (!L[j - 1].empty() && L[j - 1].hi >= 1.0 && !f.empty() &&
                                f.lo <= 0.0);
        L[j] = open ? Interval{0.0, f.hi} : Interval{};
    }
    Interval b0_prev{};
    for (std::size_t i = 0; i < n; ++i) {
        Interval fb0 = free_interval(Q[0], P[i], P[i + 1], d);
        bool open = (i == 0) ? (fb0.lo <= 0.0 && !fb0.empty())
                             : (!b0_prev.empty() && b0_prev.hi >= 1.0 && !fb0.empty() &&
                                fb0.lo <= 0.0);
        Interval B = open ? Interval{0.0, fb0.hi} : Interval{};
        b0_prev = B;
        std::vector<Interval> Lnext(m);
        for (std::size_t j = 0; j < m; ++j) {
            Interval fr = free_interval(P[i + 1], Q[j], Q[j + 1], d); // right edge
            Interval ft = free_interval(Q[j + 1], P[i], P[i + 1], d); // top edge
            Interval R{}, T{};
            if (!B.empty()) {
                R = fr;
            } else if (!L[j].empty() && !fr.empty()) {
                R = {std::max(fr.lo, L[j].lo), fr.hi};
                if (R.lo > R.hi) R = {};
            }
            if (!L[j].empty()) {
                T = ft;
            } else if (!B.empty() && !ft.empty()) {
                T = {std::max(ft.lo, B.lo), ft.hi};
                if (T.lo > T.hi) T = {};
            }
            Lnext[j] = R;
            B = T; // bottom edge of cell (i, j+1)
        }
        L.swap(Lnext);
    }
    return !L[m - 1].empty() && L[m - 1].hi >= 1.0;
}

double frechet_distance(const CurveClass& c1, const CurveClass& c2, double tol) {
    c1.validate();
    c2.validate();
    if (!(tol > 0)) throw invalid_input("frechet_distance: tol must be positive");
    const std::vector<Point>& P = c1.vertices;
    const std::vector<Point>& Q = c2.vertices;
    if (P.size() == 1) return point_curve_sup(P[0], Q);
    if (Q.size() == 1) return point_curve_sup(Q[0], P);

    double lo = std::max(dist(P.front(), Q.front()), dist(P.back(), Q.back()));
    double hi = 0;
    for (const Point& a : P)
        for (const Point& b : Q) hi = std::max(hi, dist(a, b));
    if (hi <= lo) return lo;
    if (frechet_at_most(c1, c2, lo)) return lo;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (frechet_at_most(c1, c2, mid)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

double function_metric(const DrivingFunction& w1, const DrivingFunction& w2) {
    w1.validate();
    w2.validate();
    // Breakpoints of |w1 - w2|: union of both sample grids. The difference is
    // piecewise linear, so running suprema over prefixes are exact.
    std::vector<double> ts;
    ts.reserve(w1.t.size() + w2.t.size());
    ts.insert(ts.end(), w1.t.begin(), w1.t.end());
    ts.insert(ts.end(), w2.t.begin(), w2.t.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    double total = 0.0;
    double running = 0.0;
    std::size_t k = 0;
    double weight = 0.5;
    for (int n = 1; n <= 64; ++n, weight *= 0.5) {
        while (k < ts.size() && ts[k] <= static_cast<double>(n)) {
            running = std::max(running, std::abs(w1.at(ts[k]) - w2.at(ts[k])));
            ++k;
        }
        double sup_n = std::max(running, std::abs(w1.at(n) - w2.at(n)));
        total += weight * std::min(1.0, sup_n);
        if (weight < 1e-17) break;
    }
    return total;
}

} // namespace slelab
