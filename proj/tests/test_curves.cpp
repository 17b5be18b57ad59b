#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "slelab/curves.hpp"
#include "slelab/rng.hpp"

using namespace slelab;

namespace {

CurveClass cc(std::initializer_list<Point> pts) { return CurveClass(std::vector<Point>(pts)); }

std::vector<Point> random_polyline(CounterRng& rng, int max_vertices) {
    int n = 1 + static_cast<int>(rng.below(max_vertices));
    std::vector<Point> v;
    for (int i = 0; i < n; ++i) v.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    return v;
}

} // namespace

TEST_CASE("param curve validation") {
    CHECK_NOTHROW(ParamCurve({0, 0.5, 1}, {{0, 0}, {1, 0}, {1, 1}}));
    CHECK_THROWS_AS(ParamCurve({}, {}), invalid_input);
    CHECK_THROWS_AS(ParamCurve({0, 1}, {{0, 0}}), invalid_input);
    CHECK_THROWS_AS(ParamCurve({0, 0.5}, {{0, 0}, {1, 0}}), invalid_input);
    CHECK_THROWS_AS(ParamCurve({0, 0.5, 0.5, 1}, {{0, 0}, {1, 0}, {1, 0}, {1, 1}}),
                    invalid_input);
    double nan = std::nan("");
    CHECK_THROWS_AS(ParamCurve({0, 1}, {{0, 0}, {nan, 0}}), invalid_input);
}

TEST_CASE("driving validation rejects duplicate times") {
    CHECK_THROWS_AS(DrivingFunction({0, 1, 1}, {0, 0, 0}), invalid_input);
    CHECK_THROWS_AS(DrivingFunction({0.5, 1}, {0, 0}), invalid_input);
}

TEST_CASE("canonicalize collapses duplicates and forgets parametrization") {
    ParamCurve c({0, 0.5, 1}, {{0, 0}, {0, 0}, {1, 0}});
    CurveClass k = canonicalize(c);
    REQUIRE(k.size() == 2);
    CHECK(k.vertices[0] == Point{0, 0});
    CHECK(k.vertices[1] == Point{1, 0});

    ParamCurve fast({0, 0.1, 1}, {{0, 0}, {0.9, 0}, {1, 0}});
    CHECK(frechet_distance(canonicalize(fast), cc({{0, 0}, {1, 0}}), 1e-9) ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("frechet distance fixed examples") {
    CurveClass seg = cc({{0, 0}, {1, 0}});
    CHECK(frechet_distance(seg, seg, 1e-9) == doctest::Approx(0.0));

    CurveClass shifted = cc({{0, 0.3}, {1, 0.3}});
    CHECK(frechet_distance(seg, shifted, 1e-9) == doctest::Approx(0.3).epsilon(1e-8));

    // Tent against its base: forced to visit the apex at height 0.5.
    CurveClass base = cc({{0, 0}, {2, 0}});
    CurveClass tent = cc({{0, 0}, {1, 0.5}, {2, 0}});
    double d = frechet_distance(base, tent, 1e-9);
    CHECK(d == doctest::Approx(0.5).epsilon(1e-7));
    // Frozen via the dense discrete-Frechet oracle.
    double dd = oracles::discrete_frechet(oracles::refine_polyline(base.vertices, 1e-3),
                                          oracles::refine_polyline(tent.vertices, 1e-3));
    CHECK(std::abs(dd - 0.5) < 2e-3);

    CHECK_THROWS_AS(frechet_distance(seg, shifted, 0.0), invalid_input);
}

TEST_CASE("frechet distance point-curve degenerate cases") {
    CurveClass pt = cc({{0, 0}});
    CurveClass seg = cc({{0, 1}, {0, -2}});
    CHECK(frechet_distance(pt, seg, 1e-9) == doctest::Approx(2.0));
    CHECK(frechet_distance(pt, pt, 1e-9) == doctest::Approx(0.0));
}

TEST_CASE("frechet distance agrees with independent oracle on random pairs") {
    CounterRng rng(20240601);
    for (int it = 0; it < 150; ++it) {
        CurveClass a(random_polyline(rng, 8)), b(random_polyline(rng, 8));
        double got = frechet_distance(a, b, 1e-7);
        double want = oracles::frechet_bisect(a.vertices, b.vertices, 1e-8);
        CHECK(std::abs(got - want) < 1e-6);
    }
}

TEST_CASE("frechet distance brackets dense discrete-frechet refinement") {
    CounterRng rng(7);
    for (int it = 0; it < 10; ++it) {
        CurveClass a(random_polyline(rng, 6)), b(random_polyline(rng, 6));
        double cont = frechet_distance(a, b, 1e-8);
        double disc = oracles::discrete_frechet(oracles::refine_polyline(a.vertices, 2e-3),
                                                oracles::refine_polyline(b.vertices, 2e-3));
        CHECK(cont <= disc + 1e-7);
        CHECK(disc <= cont + 4.5e-3);
    }
}

TEST_CASE("frechet metric axioms at tolerance") {
    CounterRng rng(99);
    const double tol = 1e-7;
    for (int it = 0; it < 60; ++it) {
        CurveClass a(random_polyline(rng, 6));
        CurveClass b(random_polyline(rng, 6));
        CurveClass c(random_polyline(rng, 6));
        double dab = frechet_distance(a, b, tol);
        double dba = frechet_distance(b, a, tol);
        CHECK(std::abs(dab - dba) <= 2 * tol); // symmetry
        double dac = frechet_distance(a, c, tol);
        double dcb = frechet_distance(c, b, tol);
        CHECK(dab <= dac + dcb + 3 * tol); // triangle inequality
    }
}

TEST_CASE("frechet vanishes exactly on reparametrizations") {
    // Same trace, different vertex splitting.
    CurveClass a = cc({{0, 0}, {1, 1}, {2, 0}});
    CurveClass b = cc({{0, 0}, {0.5, 0.5}, {1, 1}, {1.25, 0.75}, {2, 0}});
    CHECK(frechet_distance(a, b, 1e-9) < 1e-8);
}

TEST_CASE("frechet translation bound") {
    CounterRng rng(123);
    for (int it = 0; it < 40; ++it) {
        std::vector<Point> v = random_polyline(rng, 7);
        Point shift{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        std::vector<Point> w;
        for (Point q : v) w.push_back(q + shift);
        double d = frechet_distance(CurveClass(v), CurveClass(w), 1e-7);
        CHECK(d <= norm(shift) + 1e-6);
        // The identity matching attains |shift|; for a straight segment no
        // matching beats it, checked against the oracle.
        double want = oracles::frechet_bisect(v, w, 1e-8);
        CHECK(std::abs(d - want) < 1e-6);
    }
}

TEST_CASE("function metric fixed examples") {
    DrivingFunction zero({0, 10}, {0, 0});
    DrivingFunction half({0, 10}, {0.5, 0.5});
    CHECK(function_metric(zero, zero) == doctest::Approx(0.0));
    // sum over n >= 1 of 2^-n * 0.5 = 0.5
    CHECK(function_metric(zero, half) == doctest::Approx(0.5).epsilon(1e-12));

    DrivingFunction ramp({0, 10}, {0, 10});
    // sup over [0, n] is min(n, 10) >= 1, so every term saturates at 1.
    CHECK(function_metric(zero, ramp) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("function metric agrees with direct summation") {
    CounterRng rng(5);
    for (int it = 0; it < 8; ++it) {
        int n = 2 + static_cast<int>(rng.below(6));
        std::vector<double> t{0.0}, w1{rng.uniform(-1, 1)}, w2{rng.uniform(-1, 1)};
        for (int i = 1; i < n; ++i) {
            t.push_back(t.back() + rng.uniform(0.1, 1.5));
            w1.push_back(rng.uniform(-1, 1));
            w2.push_back(rng.uniform(-1, 1));
        }
        DrivingFunction a(t, w1), b(t, w2);
        double got = function_metric(a, b);
        double want = oracles::function_metric_direct(a, b);
        CHECK(std::abs(got - want) < 1e-3);
        CHECK(got <= 1.0 + 1e-12);
        CHECK(got >= 0.0);
    }
}

TEST_CASE("function metric monotone in pointwise sup") {
    DrivingFunction zero({0, 4}, {0, 0});
    DrivingFunction small({0, 4}, {0.2, 0.2});
    DrivingFunction big({0, 4}, {0.7, 0.7});
    CHECK(function_metric(zero, small) < function_metric(zero, big));
}

TEST_CASE("function metric zero iff equal on shared grid") {
    DrivingFunction a({0, 1, 2}, {0, 1, 0});
    DrivingFunction b({0, 0.5, 1, 2}, {0, 0.5, 1, 0});
    CHECK(function_metric(a, b) == doctest::Approx(0.0));
    DrivingFunction c({0, 1, 2}, {0, 1, 0.25});
    CHECK(function_metric(a, c) > 0.0);
}
