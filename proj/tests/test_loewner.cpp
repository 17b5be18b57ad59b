#include "doctest.h"

#include <cmath>

#include "slelab/loewner.hpp"
#include "slelab/rng.hpp"

using namespace slelab;

namespace {

DrivingFunction constant_driving(double c, double T) {
    return DrivingFunction({0.0, T}, {c, c});
}

ParamCurve vertical_slit_trace(double c, double T, int n) {
    std::vector<double> t(n + 1);
    std::vector<Point> p(n + 1);
    for (int i = 0; i <= n; ++i) {
        t[i] = static_cast<double>(i) / n;
        p[i] = {c, 2.0 * std::sqrt(t[i] * T)};
    }
    return ParamCurve(std::move(t), std::move(p));
}

} // namespace

TEST_CASE("mobius transports match the printed formulas") {
    CHECK(std::abs(mobius_D_to_H(Complex(0, 0)) - Complex(0, 1)) < 1e-15);
    CHECK(std::abs(mobius_D_to_H(Complex(-1, 0))) < 1e-15);
    CHECK(std::abs(mobius_H_to_D(Complex(0, 1))) < 1e-15);
    CHECK_THROWS_AS(mobius_D_to_H(Complex(1, 0)), invalid_input);

    CounterRng rng(3);
    for (int i = 0; i < 50; ++i) {
        Complex z(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
        if (std::abs(z) >= 1) continue;
        CHECK(std::abs(mobius_H_to_D(mobius_D_to_H(z)) - z) < 1e-12);
    }
}

TEST_CASE("slit maps are inverse pairs") {
    CounterRng rng(11);
    for (int i = 0; i < 200; ++i) {
        SlitStep st{rng.uniform(0.05, 2.0), rng.uniform(0.05, 0.95), rng.uniform(-1, 1), 0};
        st.dt = st.s * st.s * st.alpha * (1 - st.alpha) / 4.0;
        Complex w(rng.uniform(-3, 3), rng.uniform(0.02, 3));
        Complex z = slit_forward(st, w);
        CHECK(z.imag() >= -1e-12);
        Complex back = slit_inverse(st, z);
        CHECK(std::abs(back - w) < 1e-9 * (1 + std::abs(w)));
    }
}

TEST_CASE("zero driving gives the vertical slit 2i sqrt(t)") {
    HullTrace ht = forward_evolve(constant_driving(0.0, 1.0), 1e-3, 10);
    for (std::size_t i = 0; i < ht.trace.size(); ++i) {
        double tau = ht.trace.t[i];
        Complex want(0.0, 2.0 * std::sqrt(tau));
        CHECK(std::abs(ht.trace.p[i].cplx() - want) < 1e-9);
    }

    MappingOut mo = build_mapping_out(constant_driving(0.0, 1.0), 1e-3);
    // g_t(z) = sqrt(z^2 + 4t) at test points, taking the branch in the
    // closed upper half plane
    for (Complex z : {Complex(1, 1), Complex(-2, 0.5), Complex(0, 3)}) {
        Complex want = std::sqrt(z * z + 4.0);
        if (want.imag() < 0) want = -want;
        Complex got = mo.map_point(z);
        CHECK(std::abs(got - want) < 1e-9);
    }
}

TEST_CASE("constant driving translates the slit") {
    HullTrace ht = forward_evolve(constant_driving(0.7, 0.5), 1e-3, 25);
    for (std::size_t i = 0; i < ht.trace.size(); ++i) {
        double tau = ht.trace.t[i] * 0.5;
        Complex want(0.7, 2.0 * std::sqrt(tau));
        CHECK(std::abs(ht.trace.p[i].cplx() - want) < 1e-9);
    }
}

TEST_CASE("hcap from the expansion matches capacity") {
    MappingOut mo = build_mapping_out(constant_driving(0.0, 0.25), 1e-3);
    CHECK(mo.hcap_expansion() == doctest::Approx(0.25).epsilon(1e-4));

    DrivingFunction drift({0, 1.0}, {0, 1.5});
    MappingOut mo2 = build_mapping_out(drift, 1e-3);
    CHECK(mo2.hcap_expansion() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("capacity additivity under composition") {
    DrivingFunction w({0, 0.3, 0.6, 1.0}, {0, 0.4, -0.2, 0.1});
    MappingOut whole = build_mapping_out(w, 1e-3);
    std::vector<double> ta, tb, wa, wb;
    for (int i = 0; i <= 50; ++i) {
        double t = 0.5 * i / 50.0;
        ta.push_back(t);
        wa.push_back(w.at(t));
        tb.push_back(t);
        wb.push_back(w.at(0.5 + t));
    }
    MappingOut first = build_mapping_out(DrivingFunction(ta, wa), 1e-3);
    MappingOut second = build_mapping_out(DrivingFunction(tb, wb), 1e-3);
    for (Complex z : {Complex(1.5, 1), Complex(-1, 2)}) {
        Complex got = second.map_point(first.map_point(z));
        Complex want = whole.map_point(z);
        CHECK(std::abs(got - want) < 5e-3);
    }
}

TEST_CASE("extract driving of a vertical slit is constant") {
    ParamCurve tr = vertical_slit_trace(0.3, 1.0, 400);
    DrivingFunction drv = extract_driving(tr, 400);
    double sup = 0;
    for (double v : drv.w) sup = std::max(sup, std::abs(v - 0.3));
    CHECK(sup < 1e-6);
    CHECK(drv.horizon() == doctest::Approx(1.0).epsilon(1e-6));

    ExtractionReport rep = extract_driving_report(tr, 400);
    CHECK(rep.roundtrip_sup < 1e-3);
}

TEST_CASE("extract driving rejects degenerate traces") {
    ParamCurve two({0, 1}, {{0, 0}, {0, 1}});
    CHECK_THROWS_AS(extract_driving(two, 100), not_simple);
    ParamCurve below({0, 0.5, 1}, {{0, 0}, {0.2, -0.1}, {0.4, 0.5}});
    CHECK_THROWS_AS(extract_driving(below, 100), not_simple);
}

TEST_CASE("sle round trip at moderate resolution") {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        HullTrace ht = sample_sle(2.0, 0.5, 2e-4, seed);
        // unzipping at the trace's own vertices inverts the evolution
        DrivingFunction back = extract_driving(ht.trace, static_cast<int>(ht.trace.size()));
        double d = function_metric(ht.driving, back);
        CHECK(d < 0.05);
        // resampling the trace perturbs the extracted driving pointwise at
        // the curve's local scale; the metric stays moderate
        DrivingFunction coarse = extract_driving(ht.trace, 1500);
        CHECK(function_metric(ht.driving, coarse) < 0.2);
    }
}

TEST_CASE("hcap of slits and scaling covariance") {
    for (double h : {0.5, 1.0, 2.0}) {
        ParamCurve tr = vertical_slit_trace(0.0, h * h / 4.0, 300);
        CHECK(hcap(tr) == doctest::Approx(h * h / 4.0).epsilon(1e-4));
    }
    ParamCurve pt({0, 1}, {{0.2, 0}, {0.2, 0}});
    CHECK(hcap(pt) == 0.0);

    HullTrace ht = sample_sle(3.0, 0.3, 5e-4, 7);
    double base = hcap(ht.trace);
    double lam = 1.7;
    std::vector<Point> scaled;
    for (Point q : ht.trace.p) scaled.push_back({lam * q.x, lam * q.y});
    ParamCurve sc(ht.trace.t, scaled);
    CHECK(hcap(sc) == doctest::Approx(lam * lam * base).epsilon(5e-3));
}

TEST_CASE("sample_sle determinism, parameter checks, variance") {
    HullTrace a = sample_sle(2.5, 0.4, 1e-3, 42);
    HullTrace b = sample_sle(2.5, 0.4, 1e-3, 42);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace.p[i].x == b.trace.p[i].x);
        CHECK(a.trace.p[i].y == b.trace.p[i].y);
    }
    CHECK_THROWS_AS(sample_sle(-1.0, 1, 1e-2, 1), invalid_input);
    CHECK_THROWS_AS(sample_sle(8.0, 1, 1e-2, 1), invalid_input);

    // Var(W_T) ~ kappa T over many seeds (driving increments only)
    const double kappa = 2.0, T = 1.0;
    const int nseeds = 10000;
    double sum = 0, sum2 = 0;
    for (int s = 0; s < nseeds; ++s) {
        CounterRng rng(1000 + s);
        double wT = 0;
        int K = 16;
        for (int j = 0; j < K; ++j) wT += std::sqrt(kappa) * std::sqrt(T / K) * rng.normal();
        sum += wT;
        sum2 += wT * wT;
    }
    double var = sum2 / nseeds - (sum / nseeds) * (sum / nseeds);
    double se = kappa * T * std::sqrt(2.0 / nseeds); // sd of the variance estimator
    CHECK(std::abs(var - kappa * T) < 3 * se);
}

TEST_CASE("kappa 0 sle is the deterministic slit") {
    HullTrace ht = sample_sle(0.0, 1.0, 1e-3, 9);
    for (std::size_t i = 0; i < ht.trace.size(); ++i) {
        Complex want(0, 2.0 * std::sqrt(ht.trace.t[i]));
        CHECK(std::abs(ht.trace.p[i].cplx() - want) < 1e-9);
    }
}

TEST_CASE("trace in disc starts at -1 and runs along the diameter for kappa 0") {
    HullTrace ht = sample_sle(0.0, 4.0, 1e-3, 1);
    ParamCurve d = trace_in_disc(ht);
    CHECK(std::abs(d.p.front().cplx() - Complex(-1, 0)) < 1e-12);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::abs(d.p[i].y) < 1e-9);
        CHECK(d.p[i].x >= -1.0 - 1e-12);
        CHECK(d.p[i].x < 1.0);
    }
    // closed form: phi_HD(2 i sqrt(s)) = (2 sqrt(s) - 1) / (2 sqrt(s) + 1)
    double s = ht.capacity;
    double want = (2 * std::sqrt(s) - 1) / (2 * std::sqrt(s) + 1);
    CHECK(d.p.back().x == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("reparametrize by capacity satisfies the capacity identity") {
    HullTrace ht = sample_sle(0.0, 3.0, 1e-3, 1);
    ParamCurve d = trace_in_disc(ht);
    ParamCurve rp = reparametrize_by_capacity(d);
    CHECK(rp.t.front() == 0.0);
    CHECK(rp.t.back() == 1.0);
    // at interior sample times, hcap(phi_DH(curve up to t)) = t/(1-t)
    for (std::size_t i = 4; i + 1 < rp.size(); i += std::max<std::size_t>(rp.size() / 7, 1)) {
        std::vector<double> ts(rp.t.begin(), rp.t.begin() + i + 1);
        std::vector<Point> hs;
        for (std::size_t j = 0; j <= i; ++j)
            hs.push_back(Point(mobius_D_to_H(rp.p[j].cplx())));
        double t0 = ts.front(), t1 = ts.back();
        for (double& tv : ts) tv = (tv - t0) / (t1 - t0);
        ts.front() = 0.0;
        ts.back() = 1.0;
        double got = hcap(ParamCurve(ts, hs));
        double want = rp.t[i] / (1.0 - rp.t[i]);
        CHECK(got == doctest::Approx(want).epsilon(0.02));
    }
    // idempotence within tolerance
    ParamCurve rp2 = reparametrize_by_capacity(rp);
    for (std::size_t i = 0; i + 1 < rp.size() && i + 1 < rp2.size(); ++i)
        CHECK(std::abs(rp2.t[i] - rp.t[i]) < 5e-3);
}
