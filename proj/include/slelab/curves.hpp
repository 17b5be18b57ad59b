#pragma once

#include <vector>

#include "slelab/geometry.hpp"

namespace slelab {

// Sampled planar curve on [0,1], piecewise linear between samples.
struct ParamCurve {
    std::vector<double> t;
    std::vector<Point> p;

    ParamCurve() = default;
    ParamCurve(std::vector<double> times, std::vector<Point> pts);

    std::size_t size() const { return t.size(); }
    Point at(double time) const;
    void validate() const;
};

// Polyline trace with the parametrization forgotten; element of the space of
// curves modulo reparametrization.
struct CurveClass {
    std::vector<Point> vertices;

    CurveClass() = default;
    explicit CurveClass(std::vector<Point> v);

    std::size_t size() const { return vertices.size(); }
    void validate() const;
};

// Real-valued function on [0, T], piecewise linear, extended constantly
// beyond T for metric purposes.
struct DrivingFunction {
    std::vector<double> t;
    std::vector<double> w;

    DrivingFunction() = default;
    DrivingFunction(std::vector<double> times, std::vector<double> values);

    std::size_t size() const { return t.size(); }
    double horizon() const { return t.empty() ? 0.0 : t.back(); }
    double at(double time) const;
    void validate() const;
};

// Continuous (monotone) Frechet distance between two polylines, computed by
// free-space decision plus bisection; the result is within tol of the exact
// value. Agrees with the curve metric of uniform convergence modulo
// reparametrization for polylines.
double frechet_distance(const CurveClass& c1, const CurveClass& c2, double tol);

// Decision procedure: is the Frechet distance at most d?
bool frechet_at_most(const CurveClass& c1, const CurveClass& c2, double d);

// Metric on driving functions: sum over n >= 1 of 2^{-n} min(1, sup over
// [0,n] of |w1 - w2|), values extended constantly beyond each horizon.
double function_metric(const DrivingFunction& w1, const DrivingFunction& w2);

// Drop the parametrization and collapse consecutive duplicate vertices.
CurveClass canonicalize(const ParamCurve& c);

inline CurveClass as_class(const ParamCurve& c) { return canonicalize(c); }

} // namespace slelab
