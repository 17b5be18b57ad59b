#include "doctest.h"

#include <cmath>
#include <set>

#include "slelab/conformal.hpp"
#include "slelab/stochastic.hpp"

using namespace slelab;

namespace {

LatticeDomain lattice_disc(int n) {
    return approximate_domain(circle_polygon({0, 0}, 1.0, 512), {0.0, 0.0}, n);
}

// boundary edges whose midpoint angle lies in [lo, hi] (radians)
std::vector<GridEdge> sector_edges(const LatticeDomain& dom, double lo, double hi) {
    std::vector<GridEdge> out;
    for (const GridEdge& e : dom.boundary_edges()) {
        Point m = e.midpoint(dom.n());
        double th = std::atan2(m.y, m.x);
        double d = std::remainder(th - lo, 2 * M_PI);
        if (d < 0) d += 2 * M_PI;
        if (d <= hi - lo + 1e-12) out.push_back(e);
    }
    return out;
}

} // namespace

TEST_CASE("harmonic measure of symmetric disc sectors") {
    LatticeDomain dom = lattice_disc(64);
    // quarter sector aligned with the lattice symmetry: exact value 1/4
    auto quarter = sector_edges(dom, -M_PI / 4, M_PI / 4);
    MCEstimate est = harmonic_measure_mc(dom, {0, 0}, quarter, 20000, 1e-4, 11);
    CHECK(std::abs(est.mean - 0.25) < 3.5 * est.stderr_);
    CHECK(est.stderr_ > 0);
    CHECK(est.n_samples == 20000);

    CHECK_THROWS_AS(harmonic_measure_mc(dom, {0, 0}, quarter, 0, 1e-4, 1), invalid_input);
    CHECK_THROWS_AS(harmonic_measure_mc(dom, {2, 2}, quarter, 10, 1e-4, 1), invalid_input);
}

TEST_CASE("harmonic measure partition sums to one") {
    LatticeDomain dom = lattice_disc(32);
    auto e1 = sector_edges(dom, -M_PI, -M_PI / 3);
    auto e2 = sector_edges(dom, -M_PI / 3, M_PI / 2);
    auto e3 = sector_edges(dom, M_PI / 2, M_PI);
    std::set<std::tuple<int, int, char>> all;
    for (auto v : {&e1, &e2, &e3})
        for (const GridEdge& e : *v) all.insert({e.i, e.j, e.dir});
    // the sectors cover every boundary edge exactly once
    REQUIRE(all.size() == dom.boundary_edges().size());
    REQUIRE(e1.size() + e2.size() + e3.size() == all.size());
    double total = 0;
    for (auto v : {&e1, &e2, &e3})
        total += harmonic_measure_mc(dom, {0.1, -0.2}, *v, 4000, 1e-4, 3).mean;
    CHECK(total == doctest::Approx(1.0)); // every walk lands in exactly one part
}

TEST_CASE("harmonic measure is insensitive to halving the absorption step") {
    LatticeDomain dom = lattice_disc(32);
    auto arc = sector_edges(dom, 0.0, M_PI / 2);
    MCEstimate a = harmonic_measure_mc(dom, {0, 0}, arc, 20000, 2e-4, 5);
    MCEstimate b = harmonic_measure_mc(dom, {0, 0}, arc, 20000, 1e-4, 6);
    double se = std::hypot(a.stderr_, b.stderr_);
    CHECK(std::abs(a.mean - b.mean) < 3 * se);
}

TEST_CASE("half-plane-like rectangle symmetry") {
    // rectangle [0,2] x [0,1] at n = 8, z on the vertical symmetry axis
    std::vector<CellIdx> cells;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 8; ++j) cells.push_back({i, j});
    LatticeDomain dom = LatticeDomain::from_cells(8, cells, {1.0, 0.5});
    // far side = top; halves split at the symmetry axis x = 1
    std::vector<GridEdge> left, right;
    for (const GridEdge& e : dom.boundary_edges()) {
        if (e.dir != 'N') continue;
        if (e.midpoint(8).x < 1.0) left.push_back(e);
        else right.push_back(e);
    }
    MCEstimate el = harmonic_measure_mc(dom, {1.0, 0.5}, left, 20000, 1e-4, 7);
    MCEstimate er = harmonic_measure_mc(dom, {1.0, 0.5}, right, 20000, 1e-4, 8);
    CHECK(std::abs(el.mean - er.mean) < 3 * std::hypot(el.stderr_, er.stderr_));
    std::vector<GridEdge> whole = left;
    whole.insert(whole.end(), right.begin(), right.end());
    MCEstimate ew = harmonic_measure_mc(dom, {1.0, 0.5}, whole, 20000, 1e-4, 7);
    CHECK(std::abs(ew.mean - (el.mean + er.mean)) <
          3 * std::hypot(el.stderr_, std::hypot(er.stderr_, ew.stderr_)));
}

TEST_CASE("conformal invariance of harmonic measure") {
    // measure of an arc from u equals the normalized image arc length
    for (int variant = 0; variant < 2; ++variant) {
        LatticeDomain dom;
        if (variant == 0) {
            dom = lattice_disc(32);
        } else {
            std::vector<CellIdx> cells; // L-shaped domain
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j)
                    if (i < 8 || j < 8) cells.push_back({i, j});
            dom = LatticeDomain::from_cells(16, cells, {0.3, 0.3});
        }
        ConformalMap phi = uniformize(dom);
        const auto& edges = dom.boundary_edges();
        std::size_t q = edges.size() / 4;
        std::vector<GridEdge> arc(edges.begin() + q, edges.begin() + 2 * q);
        MCEstimate est = harmonic_measure_mc(dom, dom.u(), arc, 20000, 1e-4, 17);
        // image arc length from the boundary table (midpoint-to-midpoint,
        // padded by half an edge on both ends)
        double span = 0;
        for (std::size_t e = q; e + 1 < 2 * q; ++e)
            span += std::abs(std::remainder(phi.boundary_angle(edges[e + 1]) -
                                                phi.boundary_angle(edges[e]),
                                            2 * M_PI));
        double lo = std::remainder(phi.boundary_angle(edges[q - 1]) -
                                       phi.boundary_angle(edges[q]),
                                   2 * M_PI);
        double hi = std::remainder(phi.boundary_angle(edges[2 * q]) -
                                       phi.boundary_angle(edges[2 * q - 1]),
                                   2 * M_PI);
        span += 0.5 * (std::abs(lo) + std::abs(hi));
        double want = span / (2 * M_PI);
        CHECK(std::abs(est.mean - want) < 3 * est.stderr_ + 0.01);
    }
}

TEST_CASE("greens function of the disc") {
    CHECK(greens_disc(Complex(0, 0), Complex(0.5, 0)) ==
          doctest::Approx(-std::log(2.0) / (2 * M_PI)).epsilon(1e-12));
    // symmetry on a grid
    for (double a : {0.1, 0.4})
        for (double b : {0.2, -0.5}) {
            Complex z(a, b * 0.5), w(b, a * 0.3);
            CHECK(greens_disc(z, w) == doctest::Approx(greens_disc(w, z)).epsilon(1e-12));
        }
    // vanishing toward the boundary
    CHECK(std::abs(greens_disc(Complex(0, 0), Complex(0.999, 0))) < 1e-3);
    CHECK_THROWS_AS(greens_disc(Complex(0.3, 0.3), Complex(0.3, 0.3)), invalid_input);
    CHECK_THROWS_AS(greens_disc(Complex(0, 0), Complex(1.2, 0)), invalid_input);
}

TEST_CASE("beurling estimate for radial slits") {
    // slit [r, 1] on the positive real axis, walks from the origin
    for (double r : {1e-2, 1e-3}) {
        std::vector<Point> slit{{r, 0}, {1, 0}};
        BeurlingReport rep = beurling_check({0, 0}, slit, 1.0, 20000, 1e-5, 23);
        CHECK(rep.pass);
        CHECK(rep.bound == doctest::Approx((4 / M_PI) * std::sqrt(r)));
        CHECK(rep.estimate.mean > 0);
        CHECK(rep.estimate.mean <= rep.bound + 3 * rep.estimate.stderr_);
    }
    // obstacle at full distance: bound exceeds one, trivially passes
    std::vector<Point> far{{1, 0}, {1, 1e-6}};
    BeurlingReport triv = beurling_check({0, 0}, far, 1.0, 500, 1e-4, 1);
    CHECK(triv.bound > 1.0);
    CHECK(triv.pass);
    // monotone trend in r/R
    std::vector<Point> s1{{0.02, 0}, {1, 0}};
    std::vector<Point> s2{{0.01, 0}, {1, 0}};
    BeurlingReport b1 = beurling_check({0, 0}, s1, 1.0, 20000, 1e-5, 5);
    BeurlingReport b2 = beurling_check({0, 0}, s2, 1.0, 20000, 1e-5, 5);
    CHECK(b2.estimate.mean <=
          b1.estimate.mean + 2 * std::hypot(b1.estimate.stderr_, b2.estimate.stderr_));
    // obstacle not reaching the circle
    std::vector<Point> shorty{{0.1, 0}, {0.5, 0}};
    CHECK_THROWS_AS(beurling_check({0, 0}, shorty, 1.0, 100, 1e-4, 1), invalid_input);
}

TEST_CASE("loop-erased random walk contracts") {
    std::vector<CellIdx> cells;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) cells.push_back({i, j});
    LatticeDomain dom =
        LatticeDomain::from_cells(8, cells, {0.5, 0.5}).with_marks_near({0, 0.5}, {1, 0.5});
    CurveClass path = sample_lerw(dom, dom.mark_a(), dom.mark_b(), 42);
    // endpoints are the marked edge midpoints
    CHECK(dist(path.vertices.front(), dom.mark_a().midpoint(8)) < 1e-12);
    CHECK(dist(path.vertices.back(), dom.mark_b().midpoint(8)) < 1e-12);
    // simple: no repeated vertices
    std::set<std::pair<long, long>> seen;
    for (const Point& p : path.vertices)
        CHECK(seen.insert({std::lround(p.x * 1e9), std::lround(p.y * 1e9)}).second);
    // determinism
    CurveClass again = sample_lerw(dom, dom.mark_a(), dom.mark_b(), 42);
    REQUIRE(again.size() == path.size());
    for (std::size_t i = 0; i < path.size(); ++i)
        CHECK(dist(path.vertices[i], again.vertices[i]) == 0.0);
}

TEST_CASE("condition G estimates") {
    std::vector<CellIdx> cells;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) cells.push_back({i, j});
    LatticeDomain dom =
        LatticeDomain::from_cells(8, cells, {0.5, 0.45}).with_marks_near({0, 0.5}, {1, 0.5});
    double ymid = dom.mark_a().midpoint(8).y;

    // deterministic diameter model: every crossing is forced, p = 0
    CurveSampler diameter = [&](std::uint64_t) {
        return CurveClass({{0, ymid}, {1, ymid}});
    };
    auto rows = estimate_condition_g(diameter, dom, {4.0, 8.0}, 3, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        if (row.annuli == 0) continue;
        CHECK(row.p_hat == 0.0);
        CHECK(row.unforced == 0);
    }

    // loop-erased walks: doubling M does not increase the estimate beyond noise
    CurveSampler lerw = [&](std::uint64_t s) {
        return sample_lerw(dom, dom.mark_a(), dom.mark_b(), s);
    };
    auto lrows = estimate_condition_g(lerw, dom, {2.0, 4.0}, 24, 7);
    REQUIRE(lrows.size() == 2);
    if (lrows[0].annuli > 0 && lrows[1].annuli > 0) {
        CHECK(lrows[1].p_hat <=
              lrows[0].p_hat + 2 * std::hypot(lrows[0].stderr_, lrows[1].stderr_));
    }

    CHECK_THROWS_AS(estimate_condition_g(diameter, dom, {4.0}, 0, 1), invalid_input);
}
