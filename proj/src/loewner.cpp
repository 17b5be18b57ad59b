#include "slelab/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slelab/rng.hpp"

namespace slelab {

namespace {

constexpr double kPoleTol = 1e-14;

// (s, alpha) for prescribed driving and capacity increments.
SlitStep step_from_increments(double dW, double dt, double w_prev) {
    if (dW == 0.0) return {4.0 * std::sqrt(dt), 0.5, w_prev, dt};
    double u = dW / std::sqrt(dW * dW + 16.0 * dt);
    double alpha = 0.5 * (1.0 - u);
    double s = dW / u;
    return {s, alpha, w_prev, dt};
}

// (s, alpha) for a slit whose tip sits exactly at zrel (coordinates relative
// to the current driving position).
SlitStep step_from_tip(Complex zrel, double w_prev) {
    double alpha = std::arg(zrel) / M_PI;
    alpha = std::min(std::max(alpha, 1e-9), 1.0 - 1e-9);
    double logmag = (1.0 - alpha) * std::log1p(-alpha) + alpha * std::log(alpha);
    double s = std::abs(zrel) / std::exp(logmag);
    double dt = s * s * alpha * (1.0 - alpha) / 4.0;
    return {s, alpha, w_prev, dt};
}

} // namespace

Complex mobius_D_to_H(Complex z) {
    if (std::abs(z - 1.0) < kPoleTol) throw invalid_input("mobius_D_to_H: pole at z = 1");
    return Complex(0, 1) * (z + 1.0) / (1.0 - z);
}

Complex mobius_H_to_D(Complex z) {
    if (std::abs(z + Complex(0, 1)) < kPoleTol)
        throw invalid_input("mobius_H_to_D: pole at z = -i");
    return (z - Complex(0, 1)) / (z + Complex(0, 1));
}

Complex slit_tip(const SlitStep& st) {
    double a = st.alpha;
    double mag = st.s * std::exp((1.0 - a) * std::log1p(-a) + a * std::log(a));
    return Complex(st.w_prev, 0) + mag * Complex(std::cos(a * M_PI), std::sin(a * M_PI));
}

Complex slit_forward(const SlitStep& st, Complex w) {
    w -= st.w_prev;
    Complex out;
    if (st.alpha == 0.5) {
        // vertical slit: sqrt(w^2 - 4 dt); the w*sqrt(1 - ...) form keeps the
        // principal branch analytic on the slit half plane
        out = w * std::sqrt(1.0 - 4.0 * st.dt / (w * w));
    } else {
        double a = st.alpha;
        out = std::pow(w + a * st.s, 1.0 - a) * std::pow(w - (1.0 - a) * st.s, a);
    }
    return out + st.w_prev;
}

Complex slit_inverse(const SlitStep& st, Complex z) {
    z -= st.w_prev;
    if (st.alpha == 0.5) {
        Complex w = z * std::sqrt(1.0 + 4.0 * st.dt / (z * z));
        return w + st.w_prev;
    }
    double a = st.alpha;
    double as = a * st.s, bs = (1.0 - a) * st.s;
    // Newton on F(w) = z with a vertical-slit warm start.
    Complex w = z * std::sqrt(1.0 + 4.0 * st.dt / (z * z));
    if (!(w.imag() > 0)) w = Complex(w.real(), 1e-12 * st.s);
    double scale = std::max(std::abs(z), st.s);
    for (int it = 0; it < 60; ++it) {
        Complex f = std::pow(w + as, 1.0 - a) * std::pow(w - bs, a);
        Complex res = f - z;
        if (std::abs(res) <= 1e-13 * scale) return w + st.w_prev;
        Complex logd = (1.0 - a) / (w + as) + a / (w - bs);
        Complex dw = res / (f * logd);
        double damp = 1.0;
        Complex wn = w - dw;
        while (wn.imag() <= 0 && damp > 1e-6) {
            damp *= 0.5;
            wn = w - damp * dw;
        }
        if (wn.imag() <= 0) wn = Complex(wn.real(), 1e-12 * st.s);
        if (std::abs(wn - w) <= 1e-16 * scale) {
            w = wn;
            break;
        }
        w = wn;
    }
    Complex f = std::pow(w + as, 1.0 - a) * std::pow(w - bs, a);
    if (std::abs(f - z) > 1e-6 * scale)
        throw numeric_failure("slit_inverse: Newton failed to converge");
    return w + st.w_prev;
}

Complex MappingOut::map_point(Complex z) const {
    for (const SlitStep& st : steps) z = slit_inverse(st, z);
    return z;
}

double MappingOut::hcap_expansion(double probe_height) const {
    Complex z(0.0, probe_height);
    Complex g = map_point(z);
    return 0.5 * ((g - z) * z).real();
}

MappingOut build_mapping_out(const DrivingFunction& w, double dt) {
    w.validate();
    if (!(dt > 0)) throw invalid_input("build_mapping_out: dt must be positive");
    double T = w.horizon();
    if (!(T > 0)) throw invalid_input("build_mapping_out: empty horizon");
    int K = std::max(1, static_cast<int>(std::lround(T / dt)));
    MappingOut mo;
    mo.steps.reserve(K);
    double tprev = 0.0, wprev = w.at(0.0);
    for (int j = 1; j <= K; ++j) {
        double tj = T * j / K;
        double wj = w.at(tj);
        mo.steps.push_back(step_from_increments(wj - wprev, tj - tprev, wprev));
        tprev = tj;
        wprev = wj;
    }
    mo.capacity = T;
    return mo;
}

HullTrace forward_evolve(const DrivingFunction& w, double dt, int stride) {
    if (stride < 1) throw invalid_input("forward_evolve: stride must be >= 1");
    MappingOut mo = build_mapping_out(w, dt);
    const int K = static_cast<int>(mo.steps.size());
    const double T = mo.capacity;

    std::vector<double> ts;
    std::vector<Point> ps;
    ts.push_back(0.0);
    ps.push_back({w.at(0.0), 0.0});
    double tcur = 0.0;
    for (int k = 1; k <= K; ++k) {
        tcur += mo.steps[k - 1].dt;
        if (k % stride != 0 && k != K) continue;
        // gamma(t_k) = G_1^{-1} o ... o G_k^{-1}(W_k); the innermost value is
        // the tip of the step-k slit.
        Complex z = slit_tip(mo.steps[k - 1]);
        for (int j = k - 2; j >= 0; --j) z = slit_forward(mo.steps[j], z);
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw numeric_failure("forward_evolve: non-finite tip at step " + std::to_string(k));
        ts.push_back(tcur / T);
        ps.push_back(Point(z));
    }
    ts.back() = 1.0; // guard against rounding in the accumulated time
    HullTrace ht;
    ht.trace = ParamCurve(std::move(ts), std::move(ps));
    ht.capacity = T;
    ht.driving = w;
    return ht;
}

namespace {

// Shared unzip core: per-vertex slit steps plus cumulative capacities and
// driving values.
struct Unzipped {
    std::vector<SlitStep> steps;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::size_t> vertex; // index into the resampled vertex list
    std::vector<Complex> pts;        // the resampled vertices themselves
    double w0 = 0.0;
};

Unzipped unzip_trace(const ParamCurve& trace, int npts) {
    trace.validate();
    if (npts < 2) throw invalid_input("extract_driving: npts must be >= 2");
    if (trace.size() < 3) throw not_simple("extract_driving: trace has too few samples");

    std::vector<Complex> pts;
    if (static_cast<int>(trace.size()) <= npts) {
        for (const Point& q : trace.p) pts.push_back(q.cplx());
    } else {
        pts.reserve(npts);
        for (int j = 0; j < npts; ++j)
            pts.push_back(trace.at(static_cast<double>(j) / (npts - 1)).cplx());
    }
    if (std::abs(pts.front().imag()) > 1e-9)
        throw invalid_input("extract_driving: trace must start on the real line");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].imag() <= 0)
            throw not_simple("extract_driving: interior trace point at or below the real line");

    Unzipped uz;
    uz.w0 = pts.front().real();
    double wcur = uz.w0, tcur = 0.0;
    std::vector<Complex> img(pts.begin() + 1, pts.end());
    for (std::size_t j = 0; j < img.size(); ++j) {
        Complex zrel = img[j] - wcur;
        double scale = 1.0 + std::abs(wcur);
        if (std::abs(zrel) < 1e-12 * scale) continue; // duplicate vertex
        if (zrel.imag() <= 0)
            throw not_simple("extract_driving: vertex unzipped onto the boundary");
        SlitStep st = step_from_tip(zrel, wcur);
        if (!(st.dt > 0) || !(tcur + st.dt > tcur)) continue; // below clock resolution
        for (std::size_t i = j + 1; i < img.size(); ++i) img[i] = slit_inverse(st, img[i]);
        wcur += st.s * (1.0 - 2.0 * st.alpha);
        tcur += st.dt;
        uz.steps.push_back(st);
        uz.times.push_back(tcur);
        uz.values.push_back(wcur);
        uz.vertex.push_back(j + 1);
    }
    if (uz.times.empty()) throw not_simple("extract_driving: degenerate trace");
    uz.pts = std::move(pts);
    return uz;
}

} // namespace

DrivingFunction extract_driving(const ParamCurve& trace, int npts) {
    Unzipped uz = unzip_trace(trace, npts);
    std::vector<double> t{0.0}, w{uz.w0};
    t.insert(t.end(), uz.times.begin(), uz.times.end());
    w.insert(w.end(), uz.values.begin(), uz.values.end());
    return DrivingFunction(std::move(t), std::move(w));
}

ExtractionReport extract_driving_report(const ParamCurve& trace, int npts) {
    Unzipped uz = unzip_trace(trace, npts);
    std::vector<double> t{0.0}, w{uz.w0};
    t.insert(t.end(), uz.times.begin(), uz.times.end());
    w.insert(w.end(), uz.values.begin(), uz.values.end());
    DrivingFunction drv(std::move(t), std::move(w));
    double T = drv.horizon();
    double dt = T / static_cast<double>(std::max<std::size_t>(drv.size() - 1, 1));
    HullTrace re = forward_evolve(drv, dt);
    double sup = 0;
    for (std::size_t j = 0; j < uz.times.size(); ++j) {
        Point a = re.trace.at(uz.times[j] / T);
        Point b{uz.pts[uz.vertex[j]].real(), uz.pts[uz.vertex[j]].imag()};
        sup = std::max(sup, dist(a, b));
    }
    return {std::move(drv), sup};
}

double hcap(const ParamCurve& trace) {
    trace.validate();
    CurveClass k = canonicalize(trace);
    if (k.size() <= 1) return 0.0;
    Unzipped uz =
        unzip_trace(trace, static_cast<int>(std::max<std::size_t>(trace.size(), 3)));
    return uz.times.back();
}

DrivingFunction sample_sle_driving(double kappa, double T, double dt, std::uint64_t seed) {
    if (kappa < 0 || kappa >= 8.0)
        throw invalid_input("sample_sle: kappa must lie in [0, 8)");
    if (!(T > 0) || !(dt > 0) || dt > T) throw invalid_input("sample_sle: bad T or dt");
    int K = std::max(1, static_cast<int>(std::lround(T / dt)));
    double h = T / K;
    CounterRng rng(seed);
    std::vector<double> t(K + 1), w(K + 1);
    double amp = std::sqrt(kappa) * std::sqrt(h);
    t[0] = 0.0;
    w[0] = 0.0;
    for (int j = 1; j <= K; ++j) {
        t[j] = h * j;
        w[j] = w[j - 1] + amp * rng.normal();
    }
    return DrivingFunction(std::move(t), std::move(w));
}

HullTrace sample_sle(double kappa, double T, double dt, std::uint64_t seed) {
    DrivingFunction drv = sample_sle_driving(kappa, T, dt, seed);
    int K = static_cast<int>(drv.size()) - 1;
    int stride = std::max(1, K / 4000);
    return forward_evolve(drv, dt, stride);
}

ParamCurve trace_in_disc(const HullTrace& hull) {
    const ParamCurve& tr = hull.trace;
    double T = hull.capacity;
    std::vector<double> ts;
    std::vector<Point> ps;
    ts.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        double tau = tr.t[i] * T;          // capacity time
        double tclock = tau / (1.0 + tau); // [0,1] clock, truncated at T
        if (!ts.empty() && tclock <= ts.back()) continue;
        ts.push_back(tclock);
        ps.push_back(Point(mobius_H_to_D(tr.p[i].cplx())));
    }
    // rescale the truncated clock to [0,1]
    double tend = ts.back();
    for (double& v : ts) v /= tend;
    ts.front() = 0.0;
    ts.back() = 1.0;
    return ParamCurve(std::move(ts), std::move(ps));
}

ParamCurve reparametrize_by_capacity(const ParamCurve& disc_curve) {
    disc_curve.validate();
    std::vector<Complex> hpts;
    std::vector<Point> kept;
    for (std::size_t i = 0; i < disc_curve.size(); ++i) {
        Point q = disc_curve.p[i];
        if (std::abs(q.cplx() - Complex(1, 0)) < 1e-12) continue; // pole of the transport
        hpts.push_back(mobius_D_to_H(q.cplx()));
        kept.push_back(q);
    }
    if (hpts.size() < 3) throw invalid_input("reparametrize_by_capacity: too few samples");
    std::vector<double> ts(hpts.size());
    std::vector<Point> hp(hpts.size());
    for (std::size_t i = 0; i < hpts.size(); ++i) {
        ts[i] = static_cast<double>(i) / (hpts.size() - 1);
        hp[i] = Point(hpts[i]);
    }
    ParamCurve htrace(std::move(ts), std::move(hp));
    Unzipped uz = unzip_trace(htrace, static_cast<int>(hpts.size()));

    // capacity tau_j -> clock t_j = tau/(1+tau); final sample pinned at 1.
    std::vector<double> tout{0.0};
    std::vector<Point> pout{kept.front()};
    for (std::size_t j = 0; j < uz.times.size(); ++j) {
        double tj = uz.times[j] / (1.0 + uz.times[j]);
        if (tj < tout.back())
            throw invalid_input("reparametrize_by_capacity: capacity not monotone");
        if (tj == tout.back()) continue; // clock tie at resolution
        tout.push_back(tj);
        pout.push_back(kept[uz.vertex[j]]);
    }
    if (tout.back() < 1.0) {
        tout.push_back(1.0);
        pout.push_back(pout.back());
    }
    return ParamCurve(std::move(tout), std::move(pout));
}

} // namespace slelab
