#include "slelab/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace slelab {

namespace {

constexpr double kInfVal = std::numeric_limits<double>::infinity();

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace

// --- Mobius ------------------------------------------------------------------

Complex Mobius::operator()(Complex z) const { return (a * z + b) / (c * z + d); }

Mobius Mobius::inverse() const { return {d, -b, -c, a}; }

Mobius Mobius::compose(const Mobius& f, const Mobius& g) {
    return {f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d, f.c * g.a + f.d * g.c,
            f.c * g.b + f.d * g.d};
}

Mobius Mobius::disc_automorphism(Complex p, Complex rot) {
    return {rot, -rot * p, -std::conj(p), Complex(1, 0)};
}

// --- zipper core ---------------------------------------------------------------

struct ConformalMap::Core {
    Complex z0, z1;                  // endpoints of the opened boundary piece
    std::vector<GeodesicStep> steps; // geodesic unzip steps
    double x0 = 0;                   // real image of z0 before the final map
    int final_sign = 1;              // +1: zeta = -(M w)^2 ; -1: zeta = +(M w)^2
    Complex phi_u;                   // image of u in H before the disc transport
    Complex rot{1, 0};               // rotation fixing arg phi'(u) = 0

    Complex initial(Complex z) const {
        return Complex(0, 1) * std::sqrt((z - z1) / (z - z0));
    }
    Complex initial_inv(Complex w) const {
        Complex q = w / Complex(0, 1);
        q = q * q;
        return (z1 - q * z0) / (1.0 - q);
    }
    static Complex step_fwd(const GeodesicStep& st, Complex z) {
        Complex m = st.has_mobius ? z / (1.0 - z / st.c) : z;
        // sqrt(m^2 + d^2), analytic on the half plane minus the slit
        return m * std::sqrt(1.0 + (st.d / m) * (st.d / m));
    }
    static Complex step_inv(const GeodesicStep& st, Complex w) {
        Complex v = w * std::sqrt(1.0 - (st.d / w) * (st.d / w));
        return st.has_mobius ? v / (1.0 + v / st.c) : v;
    }
    Complex final_fwd(Complex w) const {
        Complex M = w / (1.0 - w / x0);
        return (final_sign > 0 ? -1.0 : 1.0) * M * M;
    }
    Complex final_inv(Complex zeta) const {
        Complex M;
        if (final_sign > 0) {
            M = -std::sqrt(-zeta); // second-quadrant branch
        } else {
            M = std::sqrt(zeta); // first-quadrant branch
        }
        return M / (1.0 + M / x0);
    }
    Complex to_disc(Complex w) const { return rot * (w - phi_u) / (w - std::conj(phi_u)); }
    Complex from_disc(Complex zeta) const {
        Complex t = zeta / rot;
        return (phi_u - t * std::conj(phi_u)) / (1.0 - t);
    }

    Complex fwd(Complex z) const {
        Complex w = initial(z);
        for (const GeodesicStep& st : steps) w = step_fwd(st, w);
        return to_disc(final_fwd(w));
    }
    Complex inv(Complex zeta) const {
        Complex w = final_inv(from_disc(zeta));
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) w = step_inv(*it, w);
        return initial_inv(w);
    }
};

Complex ConformalMap::map(Complex z) const { return post_(core_->fwd(z)); }

Complex ConformalMap::inverse(Complex w) const { return core_->inv(post_.inverse()(w)); }

double ConformalMap::boundary_angle(const GridEdge& e) const {
    for (const BoundaryEntry& be : table_)
        if (be.edge == e) return be.angle;
    throw not_found("conformal: edge has no boundary-table entry");
}

// --- uniformize ----------------------------------------------------------------

ConformalMap uniformize(const LatticeDomain& dom, double tol) {
    dom.validate();
    const int n = dom.n();
    const std::vector<Point>& loop = dom.boundary_loop();
    const std::vector<GridEdge>& edges = dom.boundary_edges();
    const std::size_t ne = edges.size();

    // zipper points: vertices and edge midpoints, in loop order
    auto build_points = [&](bool reversed) {
        std::vector<Complex> pts;
        pts.reserve(2 * ne);
        if (!reversed) {
            for (std::size_t e = 0; e < ne; ++e) {
                Complex v0 = loop[e].cplx(), v1 = loop[e + 1].cplx();
                pts.push_back(v0);
                pts.push_back(0.5 * (v0 + v1));
            }
        } else {
            for (std::size_t e = ne; e-- > 0;) {
                Complex v0 = loop[e + 1].cplx(), v1 = loop[e].cplx();
                pts.push_back(v0);
                pts.push_back(0.5 * (v0 + v1));
            }
        }
        return pts;
    };

    Complex u = dom.u().cplx();
    auto core = std::make_shared<ConformalMap::Core>();
    std::vector<Complex> pts = build_points(false);
    {
        ConformalMap::Core probe;
        probe.z0 = pts[0];
        probe.z1 = pts[1];
        if (probe.initial(u).imag() <= 0) pts = build_points(true);
    }
    core->z0 = pts[0];
    core->z1 = pts[1];

    // tracked values: remaining zipper targets, u, and near-boundary probes
    // for the table (edge midpoints nudged slightly inward)
    const double inward = 0.01 / (n * RefinedGrid::kFactor);
    std::vector<Complex> targets(pts.begin() + 2, pts.end());
    std::vector<Complex> probes(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        Point q = edges[e].midpoint(n) + inward * edges[e].inward_normal();
        probes[e] = q.cplx();
    }

    {
        ConformalMap::Core& c = *core;
        for (Complex& t : targets) t = c.initial(t);
        for (Complex& p : probes) p = c.initial(p);
        u = c.initial(u);
    }
    bool x0_at_inf = true;
    double x0 = 0;

    core->steps.reserve(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        Complex a = targets[k];
        if (!finite(a)) throw numeric_failure("uniformize: target escaped to infinity");
        if (a.imag() <= 0) {
            if (a.imag() < -1e-6)
                throw numeric_failure("uniformize: boundary target left the half plane");
            a = Complex(a.real(), 1e-12);
        }
        GeodesicStep st;
        double re = a.real(), im = a.imag();
        double n2 = re * re + im * im;
        if (std::abs(re) < 1e-14 * std::sqrt(n2)) {
            st.has_mobius = false;
            st.d = im;
        } else {
            st.c = n2 / re;
            st.d = n2 / im;
        }
        core->steps.push_back(st);
        for (std::size_t j = k + 1; j < targets.size(); ++j)
            targets[j] = ConformalMap::Core::step_fwd(st, targets[j]);
        for (Complex& p : probes) p = ConformalMap::Core::step_fwd(st, p);
        u = ConformalMap::Core::step_fwd(st, u);
        if (x0_at_inf) {
            if (st.has_mobius) {
                double m0 = -st.c;
                x0 = (m0 >= 0 ? 1.0 : -1.0) * std::sqrt(m0 * m0 + st.d * st.d);
                x0_at_inf = false;
            }
        } else {
            double m0 = st.has_mobius ? x0 / (1.0 - x0 / st.c) : x0;
            x0 = (m0 >= 0 ? 1.0 : -1.0) * std::sqrt(m0 * m0 + st.d * st.d);
        }
    }
    if (x0_at_inf)
        throw numeric_failure("uniformize: image of the base vertex stayed at infinity");
    core->x0 = x0;
    core->final_sign = x0 > 0 ? 1 : -1;

    Complex w_u = core->final_fwd(u);
    if (!(w_u.imag() > 0)) throw numeric_failure("uniformize: u left the half plane");
    core->phi_u = w_u;
    core->rot = Complex(1, 0);

    ConformalMap out;
    out.core_ = core;
    out.post_ = Mobius{};
    out.norm_ = ConformalMap::Normalization::at_u;
    out.dom_ = dom;

    // rotation from a centered difference at u with step 1/(4n), shrunk when
    // u sits close to the boundary
    Complex u0 = dom.u().cplx();
    double step = std::min(1.0 / (4.0 * n), 0.25 * dom.dist_to_boundary(dom.u()));
    Complex deriv =
        (out.core_->fwd(u0 + step) - out.core_->fwd(u0 - step)) / (2.0 * step);
    if (std::abs(deriv) == 0 || !finite(deriv))
        throw numeric_failure("uniformize: derivative estimate failed at u");
    core->rot = std::conj(deriv) / std::abs(deriv);

    out.table_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        Complex img = core->to_disc(core->final_fwd(probes[e]));
        out.table_[e] = {edges[e], edges[e].midpoint(n), std::arg(img)};
    }

    // self check: normalization and a round trip near u
    if (std::abs(out.map(u0)) > std::max(tol, 1e-9))
        throw numeric_failure("uniformize: phi(u) missed the origin");
    Complex probe = u0 + Complex(0.5 * step, 0.25 * step);
    Complex rt = out.inverse(out.map(probe));
    if (!finite(rt) || std::abs(rt - probe) > 1e-5)
        throw numeric_failure("uniformize: round trip failed near u");
    return out;
}

ConformalMap boundary_normalized(const ConformalMap& map, GridEdge a, GridEdge b) {
    if (a == b) throw invalid_input("boundary_normalized: marks must differ");
    double alpha = map.boundary_angle(a);
    double beta = map.boundary_angle(b);
    // closest-to-center point of the hyperbolic geodesic between the marks
    double D = std::remainder(beta - alpha, 2 * M_PI);
    double mu = alpha + D / 2;
    double gamma = std::abs(D) / 2;
    double rad = std::tan(M_PI / 4 - gamma / 2);
    Complex P = rad * Complex(std::cos(mu), std::sin(mu));
    Mobius T = Mobius::disc_automorphism(P, Complex(1, 0));
    Complex ia = T(Complex(std::cos(alpha), std::sin(alpha)));
    Complex rot = Complex(-1, 0) / ia;
    Mobius M = Mobius::disc_automorphism(P, rot);

    ConformalMap out = map;
    out.post_ = Mobius::compose(M, map.post_);
    out.norm_ = ConformalMap::Normalization::boundary;
    for (BoundaryEntry& be : out.table_) {
        Complex w = M(Complex(std::cos(be.angle), std::sin(be.angle)));
        be.angle = std::arg(w);
    }
    return out;
}

// --- projections and rays ------------------------------------------------------

Complex radial_projection(Complex z, double eps) {
    if (!(eps > 0 && eps < 1)) throw invalid_input("radial_projection: eps in (0,1)");
    double r = std::abs(z);
    if (r > 1 + 1e-9) throw invalid_input("radial_projection: point outside the closed disc");
    if (r == 0) return {0, 0};
    return z / r * std::min(1.0 - eps, r);
}

namespace {

// interpolated boundary angle at a boundary point (cyclic in loop order)
double interpolated_angle(const ConformalMap& map, Point z) {
    const LatticeDomain& dom = map.domain();
    const std::vector<Point>& loop = dom.boundary_loop();
    const std::vector<BoundaryEntry>& table = map.boundary_table();
    std::size_t best_e = 0;
    double best = kInfVal;
    for (std::size_t e = 0; e + 1 < loop.size(); ++e) {
        double d = dist2_point_segment(z, loop[e], loop[e + 1]);
        if (d < best) {
            best = d;
            best_e = e;
        }
    }
    if (std::sqrt(best) > 1.0 / dom.n())
        throw no_radial_limit("domain_projection: point is not on the boundary");
    Point p0 = loop[best_e], p1 = loop[best_e + 1];
    double t = dot(z - p0, p1 - p0) / norm2(p1 - p0);
    double a1 = table[best_e].angle;
    std::size_t other = t < 0.5 ? (best_e + table.size() - 1) % table.size()
                                : (best_e + 1) % table.size();
    double a2 = table[other].angle;
    double frac = t < 0.5 ? 0.5 - t : t - 0.5;
    double diff = std::remainder(a2 - a1, 2 * M_PI);
    return a1 + diff * frac;
}

} // namespace

Point domain_projection(const ConformalMap& map, Point z, double eps) {
    const LatticeDomain& dom = map.domain();
    if (dom.is_interior(z)) {
        Complex w = map.map(z.cplx());
        double r = std::abs(w);
        if (r > 1.0) w /= r; // clamp numerical overshoot at the boundary
        return Point(map.inverse(radial_projection(w, eps)));
    }
    const double tol = 1e-9 / dom.n();
    for (const BoundaryEntry& be : map.boundary_table()) {
        if (dist(be.point, z) < tol) {
            Complex w = std::polar(1.0 - eps, be.angle);
            return Point(map.inverse(w));
        }
    }
    double theta = interpolated_angle(map, z);
    // radial-limit check: the discretized ray must be Cauchy toward z
    Complex prev = map.inverse(std::polar(1.0 - 1e-2, theta));
    Complex last = map.inverse(std::polar(1.0 - 1e-3, theta));
    if (std::abs(last - z.cplx()) > std::abs(prev - z.cplx()) + 0.5 / dom.n())
        throw no_radial_limit("domain_projection: radial limit not Cauchy at this point");
    return Point(map.inverse(std::polar(1.0 - eps, theta)));
}

ParamCurve conformal_ray(const ConformalMap& map, double theta, double p, double q,
                         int npts) {
    if (!(0 <= p && p < q && q < 1)) throw invalid_input("conformal_ray: need 0 <= p < q < 1");
    if (npts < 2) throw invalid_input("conformal_ray: npts must be >= 2");
    std::vector<double> ts(npts);
    std::vector<Point> ps(npts);
    for (int i = 0; i < npts; ++i) {
        double t = static_cast<double>(i) / (npts - 1);
        ts[i] = t;
        double r = p + (q - p) * t;
        ps[i] = Point(map.inverse(std::polar(r, theta)));
    }
    ts.front() = 0.0;
    ts.back() = 1.0;
    return ParamCurve(std::move(ts), std::move(ps));
}

double caratheodory_sup_error(const std::function<Complex(Complex)>& inv_n,
                              const std::function<Complex(Complex)>& inv_limit,
                              double radius, int grid) {
    if (!(radius > 0 && radius < 1)) throw invalid_input("caratheodory: radius in (0,1)");
    if (grid < 2) throw invalid_input("caratheodory: grid must be >= 2");
    double sup = 0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            double x = -radius + 2 * radius * i / (grid - 1);
            double y = -radius + 2 * radius * j / (grid - 1);
            Complex z(x, y);
            if (std::abs(z) > radius) continue;
            sup = std::max(sup, std::abs(inv_n(z) - inv_limit(z)));
        }
    }
    return sup;
}

double caratheodory_sup_error(const ConformalMap& map_n, const ConformalMap& map_limit,
                              double radius, int grid) {
    return caratheodory_sup_error([&](Complex z) { return map_n.inverse(z); },
                                  [&](Complex z) { return map_limit.inverse(z); }, radius,
                                  grid);
}

bool verify_ray_in_fjord(const ConformalMap& map, const LatticeDomain& dom, double theta,
                         double eps, double delta, double C) {
    if (!(eps > 0 && eps < 1)) throw invalid_input("verify_ray_in_fjord: eps in (0,1)");
    Point z = Point(map.inverse(std::polar(1.0 - eps, theta)));
    if (!dom.is_interior(z))
        throw resolution_error("verify_ray_in_fjord: ray point not resolvable");
    if (dom.dist_to_boundary(z) >= delta)
        throw resolution_error(
            "verify_ray_in_fjord: ray start is not delta-close to the boundary");
    Point u = dom.u();
    double r = C * delta;
    if (r >= dist(z, u)) return false;
    CrossCut cut;
    try {
        cut = innermost_disconnecting(dom, z, r, u);
    } catch (const not_found&) {
        return false;
    }
    // flood from u with the cut removed; the ray tail must stay on z's side
    const RefinedGrid& g = dom.refined();
    int ua = 0, ub = 0;
    if (!g.nearest_interior(u, ua, ub)) return false;
    RefinedGrid::Walls walls(g, {cut.polyline});
    std::vector<char> ureach = g.flood(g.index(ua, ub), &walls);
    double t = 1.0 - eps;
    Complex prev{kInfVal, kInfVal};
    for (int k = 0; k < 60; ++k) {
        Complex w = map.inverse(std::polar(t, theta));
        if (!finite(w)) break;
        int a = 0, b = 0;
        if (g.nearest_interior(Point(w), a, b) && ureach[g.index(a, b)]) return false;
        if (std::abs(w - prev) < 0.25 * g.h() && k > 8) break;
        prev = w;
        t = 1.0 - (1.0 - t) * 0.7;
    }
    return true;
}

// --- save / load ---------------------------------------------------------------

void ConformalMap::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("confmap: cannot open " + path);
    out.precision(17);
    out << "confmap v1\n";
    out << "normalization " << (norm_ == Normalization::at_u ? "u" : "boundary") << "\n";
    out << "z0 " << core_->z0.real() << " " << core_->z0.imag() << "\n";
    out << "z1 " << core_->z1.real() << " " << core_->z1.imag() << "\n";
    out << "x0 " << core_->x0 << " " << core_->final_sign << "\n";
    out << "phiu " << core_->phi_u.real() << " " << core_->phi_u.imag() << "\n";
    out << "rot " << core_->rot.real() << " " << core_->rot.imag() << "\n";
    out << "post " << post_.a.real() << " " << post_.a.imag() << " " << post_.b.real()
        << " " << post_.b.imag() << " " << post_.c.real() << " " << post_.c.imag() << " "
        << post_.d.real() << " " << post_.d.imag() << "\n";
    out << "steps " << core_->steps.size() << "\n";
    for (const GeodesicStep& st : core_->steps)
        out << st.c << " " << st.d << " " << (st.has_mobius ? 1 : 0) << "\n";
    out << "table " << table_.size() << "\n";
    for (const BoundaryEntry& be : table_)
        out << be.edge.i << " " << be.edge.j << " " << be.edge.dir << " " << be.angle
            << "\n";
}

ConformalMap ConformalMap::load(const LatticeDomain& dom, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("confmap: cannot open " + path);
    std::string tag, ver;
    in >> tag >> ver;
    if (tag != "confmap" || ver != "v1") throw io_error("confmap: bad header");
    auto core = std::make_shared<Core>();
    ConformalMap out;
    std::string key, normtag;
    in >> key >> normtag;
    double xr, xi;
    in >> key >> xr >> xi;
    core->z0 = {xr, xi};
    in >> key >> xr >> xi;
    core->z1 = {xr, xi};
    in >> key >> core->x0 >> core->final_sign;
    in >> key >> xr >> xi;
    core->phi_u = {xr, xi};
    in >> key >> xr >> xi;
    core->rot = {xr, xi};
    double pa, pb, pc, pd, pe, pf, pg, ph;
    in >> key >> pa >> pb >> pc >> pd >> pe >> pf >> pg >> ph;
    out.post_ = {{pa, pb}, {pc, pd}, {pe, pf}, {pg, ph}};
    std::size_t k = 0;
    in >> key >> k;
    core->steps.resize(k);
    for (auto& st : core->steps) {
        int hm;
        in >> st.c >> st.d >> hm;
        st.has_mobius = hm != 0;
    }
    in >> key >> k;
    out.table_.resize(k);
    for (auto& be : out.table_) {
        in >> be.edge.i >> be.edge.j >> be.edge.dir >> be.angle;
        be.point = be.edge.midpoint(dom.n());
    }
    if (!in) throw io_error("confmap: truncated file");
    out.core_ = core;
    out.norm_ = normtag == "u" ? Normalization::at_u : Normalization::boundary;
    out.dom_ = dom;
    return out;
}

} // namespace slelab
