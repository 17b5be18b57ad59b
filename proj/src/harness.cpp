#include "slelab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slelab/svg.hpp"

namespace slelab {

namespace {

std::uint64_t fnv_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    double idx = q * (static_cast<double>(v.size()) - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return v[lo] * (1 - frac) + v[hi] * frac;
}

std::vector<Point> unit_square_polygon() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

// resample a curve to at most npts vertices, keeping the endpoints
std::vector<Point> resample(const ParamCurve& c, int npts) {
    if (static_cast<int>(c.size()) <= npts) return c.p;
    std::vector<Point> out;
    out.reserve(npts);
    for (int i = 0; i < npts; ++i)
        out.push_back(c.at(static_cast<double>(i) / (npts - 1)));
    return out;
}

Complex clamp_disc(Complex w, double margin = 1e-6) {
    double r = std::abs(w);
    if (r > 1.0 - margin) return w * ((1.0 - margin) / r);
    return w;
}

} // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
    ExperimentConfig ec;
    ec.experiment = cfg.get("experiment", "commute");
    std::string dom = cfg.get("domain", "square");
    if (dom == "square") {
        ec.polygon = unit_square_polygon();
    } else if (dom == "disc") {
        ec.polygon = circle_polygon({0.5, 0.5}, 0.5, 512);
    } else if (dom == "polygon") {
        std::string pts = cfg.get("polygon");
        std::istringstream in(pts);
        std::string pair;
        while (std::getline(in, pair, ';')) {
            std::istringstream pp(pair);
            double x, y;
            char comma;
            if (pp >> x >> comma >> y) ec.polygon.push_back({x, y});
        }
        if (ec.polygon.size() < 3) throw invalid_input("config: polygon needs >= 3 points");
    } else {
        throw invalid_input("config: unknown domain '" + dom + "'");
    }
    if (cfg.has("u")) ec.u = cfg.get_point("u");
    if (cfg.has("mark_a")) ec.mark_a = cfg.get_point("mark_a");
    if (cfg.has("mark_b")) ec.mark_b = cfg.get_point("mark_b");
    ec.model = cfg.get("model", "sle");
    ec.kappa = cfg.get_double("kappa", 3.0);
    if (cfg.has("kappa_list")) ec.kappa_list = cfg.get_list("kappa_list");
    ec.T = cfg.get_double("T", 4.0);
    ec.dt = cfg.get_double("dt", 5e-4);
    if (cfg.has("n_list")) {
        ec.n_list.clear();
        for (double v : cfg.get_list("n_list")) ec.n_list.push_back(static_cast<int>(v));
    }
    if (cfg.has("eps_list")) ec.eps_list = cfg.get_list("eps_list");
    ec.ell = cfg.get_double("ell", 0.2);
    ec.delta = cfg.get_double("delta", 1.0 / 96);
    ec.C = cfg.get_double("C", 16.0);
    ec.samples = static_cast<int>(cfg.get_long("samples", 100));
    ec.curve_points = static_cast<int>(cfg.get_long("curve_points", 300));
    ec.alpha = cfg.get_double("alpha", 1.0);
    if (!cfg.has("seed")) throw invalid_input("config: seed is mandatory");
    ec.seed = static_cast<std::uint64_t>(cfg.get_long("seed"));
    ec.out = cfg.get("out", "");
    return ec;
}

Config ExperimentConfig::to_config() const {
    Config cfg;
    cfg.set("experiment", experiment);
    std::ostringstream poly;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        if (i) poly << ";";
        poly << format_double(polygon[i].x) << "," << format_double(polygon[i].y);
    }
    cfg.set("domain", "polygon");
    cfg.set("polygon", poly.str());
    cfg.set("u", format_double(u.x) + "," + format_double(u.y));
    cfg.set("mark_a", format_double(mark_a.x) + "," + format_double(mark_a.y));
    cfg.set("mark_b", format_double(mark_b.x) + "," + format_double(mark_b.y));
    cfg.set("model", model);
    cfg.set("kappa", format_double(kappa));
    if (!kappa_list.empty()) {
        std::ostringstream kl;
        for (std::size_t i = 0; i < kappa_list.size(); ++i) {
            if (i) kl << ",";
            kl << format_double(kappa_list[i]);
        }
        cfg.set("kappa_list", kl.str());
    }
    cfg.set("T", format_double(T));
    cfg.set("dt", format_double(dt));
    {
        std::ostringstream nl;
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            if (i) nl << ",";
            nl << n_list[i];
        }
        cfg.set("n_list", nl.str());
    }
    {
        std::ostringstream el;
        for (std::size_t i = 0; i < eps_list.size(); ++i) {
            if (i) el << ",";
            el << format_double(eps_list[i]);
        }
        cfg.set("eps_list", el.str());
    }
    cfg.set("ell", format_double(ell));
    cfg.set("delta", format_double(delta));
    cfg.set("C", format_double(C));
    cfg.set("samples", std::to_string(samples));
    cfg.set("curve_points", std::to_string(curve_points));
    cfg.set("alpha", format_double(alpha));
    cfg.set("seed", std::to_string(seed));
    cfg.set("out", out);
    return cfg;
}

const ReportTable& ExperimentReport::table(const std::string& name) const {
    for (const ReportTable& t : tables)
        if (t.name == name) return t;
    throw not_found("report: no table named " + name);
}

// --- commutation ---------------------------------------------------------------

ExperimentReport run_commutation_experiment(const ExperimentConfig& cfg) {
    if (cfg.polygon.size() < 3) throw invalid_input("commute: domain polygon required");
    if (cfg.samples <= 0) throw invalid_input("commute: samples must be positive");
    ExperimentReport rep;
    rep.experiment = "commute";
    rep.config_echo = cfg.to_config().echo();
    rep.config_hash = fnv_hash(rep.config_echo);

    ReportTable cells{"commute_cells",
                      {"n", "eps", "samples", "seed", "d_q50", "d_q90", "d_max",
                       "exceed_frac", "ell"},
                      {}};
    ReportTable drv{"driving_metrics", {"n", "samples", "metric_q50", "metric_q90"}, {}};

    // per (n, sample) domain curves, kept across n for the lerw panel
    std::vector<std::vector<DrivingFunction>> per_n_drivings;

    for (int n : cfg.n_list) {
        LatticeDomain dom =
            approximate_domain(cfg.polygon, cfg.u, n).with_marks_near(cfg.mark_a, cfg.mark_b);
        ConformalMap phi = uniformize(dom);
        ConformalMap psi = boundary_normalized(phi, dom.mark_a(), dom.mark_b());

        std::vector<std::vector<double>> dists(cfg.eps_list.size());
        std::vector<DrivingFunction> drivings;
        std::vector<double> drv_metrics;
        const int drv_samples = std::min(cfg.samples, 50);

        for (int s = 0; s < cfg.samples; ++s) {
            std::uint64_t sample_seed = cfg.seed + static_cast<std::uint64_t>(s);
            // the chordal curve in the domain and its disc coordinates;
            // boundary endpoints go through the table (forward evaluation at
            // exact boundary points is side-ambiguous on the unzipped slits)
            std::vector<Point> x;       // curve in the domain
            std::vector<Complex> wtild; // u-normalized disc coordinates
            bool ends_marked = false;
            DrivingFunction input_driving({0, 1}, {0, 0});
            bool have_input = false;
            if (cfg.model == "sle") {
                DrivingFunction w = sample_sle_driving(cfg.kappa, cfg.T, cfg.dt, sample_seed);
                int K = static_cast<int>(w.size()) - 1;
                HullTrace ht =
                    forward_evolve(w, cfg.dt, std::max(1, K / cfg.curve_points));
                input_driving = ht.driving;
                have_input = true;
                ParamCurve dcurve = trace_in_disc(ht);
                for (Point q : resample(dcurve, cfg.curve_points)) {
                    Complex wd = clamp_disc(q.cplx());
                    x.push_back(Point(psi.inverse(wd)));
                }
            } else if (cfg.model == "lerw") {
                CurveClass path = sample_lerw(dom, dom.mark_a(), dom.mark_b(), sample_seed);
                x = path.vertices;
                ends_marked = true;
            } else {
                throw invalid_input("commute: unknown model '" + cfg.model + "'");
            }
            wtild.reserve(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (ends_marked && i == 0)
                    wtild.push_back(std::polar(1.0 - 1e-6, phi.boundary_angle(dom.mark_a())));
                else if (ends_marked && i + 1 == x.size())
                    wtild.push_back(std::polar(1.0 - 1e-6, phi.boundary_angle(dom.mark_b())));
                else
                    wtild.push_back(clamp_disc(phi.map(x[i].cplx())));
            }

            CurveClass gamma(x);
            for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
                double eps = cfg.eps_list[e];
                std::vector<Point> proj;
                proj.reserve(x.size());
                for (Complex wd : wtild)
                    proj.push_back(Point(phi.inverse(radial_projection(wd, eps))));
                double d = frechet_distance(gamma, CurveClass(proj),
                                            std::max(1e-4, cfg.ell / 100));
                dists[e].push_back(d);
            }

            // driving panel: extract from the boundary-normalized disc curve,
            // truncated before the terminal approach to the mark b where the
            // half-plane transport degenerates
            if (s < drv_samples) {
                std::vector<Complex> wd;
                wd.reserve(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (ends_marked && i == 0)
                        wd.push_back(Complex(-(1.0 - 1e-6), 0));
                    else if (ends_marked && i + 1 == x.size())
                        wd.push_back(Complex(1.0 - 1e-6, 0));
                    else
                        wd.push_back(clamp_disc(psi.map(x[i].cplx())));
                }
                std::size_t keep = wd.size();
                while (keep > 3 && std::abs(wd[keep - 1] - Complex(1, 0)) < 0.05) --keep;
                wd.resize(keep);
                std::vector<double> ts(wd.size());
                std::vector<Point> hp(wd.size());
                for (std::size_t i = 0; i < wd.size(); ++i) {
                    ts[i] = wd.size() == 1 ? 0.0
                                           : static_cast<double>(i) /
                                                 (static_cast<double>(wd.size()) - 1);
                    hp[i] = Point(mobius_D_to_H(wd[i]));
                }
                ts.front() = 0;
                ts.back() = 1;
                // pin the start onto the real axis (the mark itself)
                hp.front() = {hp.front().x, 0.0};
                try {
                    DrivingFunction ext =
                        extract_driving(ParamCurve(ts, hp), static_cast<int>(wd.size()));
                    if (have_input) {
                        drv_metrics.push_back(function_metric(input_driving, ext));
                    } else if (!per_n_drivings.empty() &&
                               s < static_cast<int>(per_n_drivings.back().size())) {
                        drv_metrics.push_back(
                            function_metric(per_n_drivings.back()[s], ext));
                    }
                    drivings.push_back(std::move(ext));
                } catch (const error&) {
                    // near-boundary excursions can defeat the unzipping at
                    // this resolution; the panel simply skips the sample
                }
            }
        }

        for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
            const std::vector<double>& d = dists[e];
            double exceed = 0;
            for (double v : d)
                if (v > cfg.ell) exceed += 1;
            exceed /= static_cast<double>(d.size());
            cells.rows.push_back({static_cast<double>(n), cfg.eps_list[e],
                                  static_cast<double>(d.size()),
                                  static_cast<double>(cfg.seed), quantile(d, 0.5),
                                  quantile(d, 0.9), quantile(d, 1.0), exceed, cfg.ell});
        }
        if (!drv_metrics.empty())
            drv.rows.push_back({static_cast<double>(n),
                                static_cast<double>(drv_metrics.size()),
                                quantile(drv_metrics, 0.5), quantile(drv_metrics, 0.9)});
        per_n_drivings.push_back(std::move(drivings));
    }
    rep.tables.push_back(std::move(cells));
    rep.tables.push_back(std::move(drv));
    if (!cfg.out.empty()) write_report(rep, cfg.out);
    return rep;
}

// --- warning example -------------------------------------------------------------

Point twist_map(Point z, int n, double alpha) {
    double rho = norm(z);
    double r0 = 1.0 - 1.0 / n;
    if (rho <= r0 || rho >= 1.0) return z; // exact identity off the band
    double t = (rho - r0) * n; // 0 .. 1 across the band
    double beta = alpha * (t < 0.5 ? 2 * t : 2 * (1 - t));
    double th = std::atan2(z.y, z.x) + beta;
    return {rho * std::cos(th), rho * std::sin(th)};
}

ExperimentReport run_warning_example(const std::vector<int>& n_values, double alpha,
                                     const std::string& out_dir) {
    if (!(alpha >= 0 && alpha < M_PI)) throw invalid_input("warning: alpha in [0, pi)");
    if (n_values.empty()) throw invalid_input("warning: n list empty");
    ExperimentReport rep;
    rep.experiment = "warning";
    {
        Config cfg;
        cfg.set("experiment", "warning");
        cfg.set("alpha", format_double(alpha));
        std::ostringstream nl;
        for (std::size_t i = 0; i < n_values.size(); ++i) {
            if (i) nl << ",";
            nl << n_values[i];
        }
        cfg.set("n_list", nl.str());
        rep.config_echo = cfg.echo();
        rep.config_hash = fnv_hash(rep.config_echo);
    }
    ReportTable tab{"warning", {"n", "alpha", "gap", "disc_gap"}, {}};
    CurveClass limit({{-1, 0}, {1, 0}});
    for (int n : n_values) {
        if (n < 2) throw invalid_input("warning: n must be >= 2");
        // sample [-1, 1] with extra resolution across the twist bands
        std::vector<double> xs;
        for (int i = 0; i <= 1200; ++i) xs.push_back(-1.0 + 2.0 * i / 1200);
        for (int i = 0; i <= 400; ++i) {
            double t = static_cast<double>(i) / 400;
            xs.push_back(-1.0 + t / n);
            xs.push_back(1.0 - t / n);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<Point> pts;
        pts.reserve(xs.size());
        for (double xv : xs) pts.push_back(twist_map({xv, 0.0}, n, alpha));
        double gap = frechet_distance(CurveClass(pts), limit, 1e-3);
        // the disc curves coincide by construction: T_n is applied after the
        // conformal transport, gamma_D^(n) = gamma_D
        tab.rows.push_back({static_cast<double>(n), alpha, gap, 0.0});
    }
    rep.tables.push_back(std::move(tab));
    if (!out_dir.empty()) write_report(rep, out_dir);
    return rep;
}

// --- stability -------------------------------------------------------------------

ExperimentReport run_stability_experiment(const ExperimentConfig& cfg) {
    if (cfg.kappa_list.empty()) throw invalid_input("stability: kappa_list required");
    for (double k : cfg.kappa_list)
        if (k < 0 || k >= 8) throw invalid_input("stability: kappa values must lie in [0,8)");
    if (cfg.samples <= 0) throw invalid_input("stability: samples must be positive");
    ExperimentReport rep;
    rep.experiment = "stability";
    rep.config_echo = cfg.to_config().echo();
    rep.config_hash = fnv_hash(rep.config_echo);

    // kappa_m sorted by distance to the target, farthest first
    std::vector<double> ks = cfg.kappa_list;
    std::sort(ks.begin(), ks.end(), [&](double a, double b) {
        return std::abs(a - cfg.kappa) > std::abs(b - cfg.kappa);
    });

    const double T = std::min(cfg.T, 2.0), dt = std::max(cfg.dt, 1e-3);
    const int K = std::max(1, static_cast<int>(std::lround(T / dt)));
    const int stride = std::max(1, K / 250);

    ReportTable per_seed{"stability_per_seed", {"kappa_m", "seed", "distance"}, {}};
    ReportTable summary{"stability",
                        {"kappa_m", "dkappa", "samples", "d_q50", "d_q90"},
                        {}};
    std::vector<std::vector<double>> dists(ks.size());
    for (int s = 0; s < cfg.samples; ++s) {
        std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        // one Brownian path per seed, scaled per kappa
        DrivingFunction base = sample_sle_driving(1.0, T, dt, seed);
        auto disc_trace = [&](double kap) {
            std::vector<double> w(base.w.size());
            double amp = std::sqrt(kap);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = amp * base.w[i];
            DrivingFunction drv(base.t, w);
            return trace_in_disc(forward_evolve(drv, dt, stride));
        };
        ParamCurve target = disc_trace(cfg.kappa);
        CurveClass target_class = canonicalize(target);
        for (std::size_t m = 0; m < ks.size(); ++m) {
            double d = ks[m] == cfg.kappa
                           ? 0.0
                           : frechet_distance(canonicalize(disc_trace(ks[m])),
                                              target_class, 1e-3);
            dists[m].push_back(d);
            per_seed.rows.push_back({ks[m], static_cast<double>(seed), d});
        }
    }
    for (std::size_t m = 0; m < ks.size(); ++m)
        summary.rows.push_back({ks[m], std::abs(ks[m] - cfg.kappa),
                                static_cast<double>(dists[m].size()),
                                quantile(dists[m], 0.5), quantile(dists[m], 0.9)});
    // fraction of seeds whose distances decrease monotonically along ks
    double monotone = 0;
    for (int s = 0; s < cfg.samples; ++s) {
        bool ok = true;
        for (std::size_t m = 1; m < ks.size(); ++m)
            if (dists[m][static_cast<std::size_t>(s)] >
                dists[m - 1][static_cast<std::size_t>(s)])
                ok = false;
        if (ok) monotone += 1;
    }
    monotone /= static_cast<double>(cfg.samples);
    ReportTable mono{"stability_monotone", {"samples", "frac_monotone"}, {}};
    mono.rows.push_back({static_cast<double>(cfg.samples), monotone});
    rep.tables.push_back(std::move(summary));
    rep.tables.push_back(std::move(mono));
    rep.tables.push_back(std::move(per_seed));
    if (!cfg.out.empty()) write_report(rep, cfg.out);
    return rep;
}

// --- report emission ---------------------------------------------------------------

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const ReportTable& tab : report.tables) {
        std::ofstream csv(out_dir + "/" + tab.name + ".csv");
        if (!csv) throw io_error("report: cannot open " + out_dir + "/" + tab.name + ".csv");
        for (std::size_t c = 0; c < tab.columns.size(); ++c)
            csv << (c ? "," : "") << tab.columns[c];
        csv << "\n";
        for (const auto& row : tab.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                csv << (c ? "," : "") << format_double(row[c]);
            csv << "\n";
        }
    }
    std::ofstream man(out_dir + "/manifest.txt");
    man << kVersion << "\n";
    man << "experiment " << report.experiment << "\n";
    man << "config_hash " << report.config_hash << "\n";
    man << "---\n" << report.config_echo;

    // one SVG panel per experiment type
    if (report.experiment == "commute") {
        const ReportTable& t = report.table("commute_cells");
        SvgPlot plot("projection distance exceedance", "eps", "exceed fraction");
        std::vector<double> nvals;
        for (const auto& r : t.rows)
            if (nvals.empty() || nvals.back() != r[0]) nvals.push_back(r[0]);
        for (double n : nvals) {
            std::vector<double> xs, ys;
            for (const auto& r : t.rows)
                if (r[0] == n) {
                    xs.push_back(r[1]);
                    ys.push_back(r[7]);
                }
            plot.add_series("n=" + std::to_string(static_cast<int>(n)), xs, ys);
        }
        plot.write(out_dir + "/commute_exceedance.svg");
    } else if (report.experiment == "warning") {
        const ReportTable& t = report.table("warning");
        std::vector<double> xs, ys;
        for (const auto& r : t.rows) {
            xs.push_back(r[0]);
            ys.push_back(r[2]);
        }
        SvgPlot plot("twist example gap", "n", "curve distance");
        plot.add_series("gap", xs, ys);
        plot.write(out_dir + "/warning_gap.svg");
    } else if (report.experiment == "stability") {
        const ReportTable& t = report.table("stability");
        std::vector<double> xs, ys;
        for (const auto& r : t.rows) {
            xs.push_back(r[1]);
            ys.push_back(r[3]);
        }
        SvgPlot plot("coupled traces", "|kappa_m - kappa|", "median distance");
        plot.add_series("d_q50", xs, ys);
        plot.write(out_dir + "/stability_distance.svg");
    }
}

} // namespace slelab
