// Command-line front end: domain construction, Loewner evolutions, conformal
// maps, projections, fjords, crossings, harmonic measure, and the experiment
// drivers. Exit codes: 0 success, 2 invalid input, 3 numeric failure.

#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "slelab/harness.hpp"
#include "slelab/io.hpp"
#include "slelab/svg.hpp"

using namespace slelab;

namespace {

Point parse_point(const std::string& s) {
    double x, y;
    char comma;
    std::istringstream in(s);
    if (!(in >> x >> comma >> y) || comma != ',')
        throw invalid_input("expected a point as x,y: " + s);
    return {x, y};
}

std::vector<CellIdx> shape_cells(const std::string& shape, int n, int slot_start) {
    std::vector<CellIdx> cells;
    if (shape == "square") {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) cells.push_back({i, j});
    } else if (shape == "slot") {
        int mid = n / 2;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                bool wall = (j == mid - 1 || j == mid + 1) && i >= slot_start;
                if (!wall) cells.push_back({i, j});
            }
    } else {
        throw invalid_input("unknown shape '" + shape + "'");
    }
    return cells;
}

void write_csv_line(std::ofstream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Loewner evolutions, conformal maps, and "
                 "lattice-domain geometry"};
    app.require_subcommand(1);

    // --- domain ---------------------------------------------------------------
    auto* cmd_domain = app.add_subcommand("domain", "generate a lattice domain file");
    std::string dm_shape = "square", dm_out, dm_u = "", dm_a = "", dm_b = "";
    int dm_n = 16, dm_slot = 8;
    cmd_domain->add_option("--shape", dm_shape, "square | disc | slot");
    cmd_domain->add_option("--n", dm_n, "grid resolution")->required();
    cmd_domain->add_option("--slot-start", dm_slot, "slot start column (shape=slot)");
    cmd_domain->add_option("--u", dm_u, "base point x,y");
    cmd_domain->add_option("--mark-a", dm_a, "point marking prime end a");
    cmd_domain->add_option("--mark-b", dm_b, "point marking prime end b");
    cmd_domain->add_option("--out", dm_out, "output domain file")->required();

    // --- sle ------------------------------------------------------------------
    auto* cmd_sle = app.add_subcommand("sle", "sample a chordal SLE trace");
    double sle_kappa = 3.0, sle_T = 1.0, sle_dt = 1e-4;
    std::uint64_t sle_seed = 1;
    std::string sle_out, sle_driving_out, sle_disc_out;
    cmd_sle->add_option("--kappa", sle_kappa, "diffusivity in [0,8)")->required();
    cmd_sle->add_option("--T", sle_T, "capacity horizon")->required();
    cmd_sle->add_option("--dt", sle_dt, "capacity step")->required();
    cmd_sle->add_option("--seed", sle_seed, "random seed")->required();
    cmd_sle->add_option("--out", sle_out, "trace output (curve v1)")->required();
    cmd_sle->add_option("--driving-out", sle_driving_out, "driving output (driving v1)");
    cmd_sle->add_option("--disc-out", sle_disc_out, "disc trace output (curve v1)");

    // --- extract ----------------------------------------------------------------
    auto* cmd_extract = app.add_subcommand("extract", "driving function of a trace");
    std::string ex_curve, ex_out;
    int ex_npts = 2000;
    cmd_extract->add_option("--curve", ex_curve, "trace file (curve v1)")->required();
    cmd_extract->add_option("--npts", ex_npts, "unzip resolution");
    cmd_extract->add_option("--out", ex_out, "driving output")->required();

    // --- map --------------------------------------------------------------------
    auto* cmd_map = app.add_subcommand("map", "uniformize a domain and evaluate");
    std::string mp_domain, mp_probe, mp_inverse, mp_save, mp_load;
    bool mp_normalized = false;
    cmd_map->add_option("--domain", mp_domain, "domain file")->required();
    cmd_map->add_option("--probe", mp_probe, "evaluate the map at x,y");
    cmd_map->add_option("--inverse-probe", mp_inverse, "evaluate the inverse at x,y");
    cmd_map->add_option("--save", mp_save, "write the map cache (confmap v1)");
    cmd_map->add_option("--load", mp_load, "read a map cache instead of rebuilding");
    cmd_map->add_flag("--normalized", mp_normalized, "use the boundary-normalized map");

    // --- project ----------------------------------------------------------------
    auto* cmd_project = app.add_subcommand("project", "conformal radial projection");
    std::string pj_domain, pj_curve, pj_out;
    double pj_eps = 0.1;
    cmd_project->add_option("--domain", pj_domain)->required();
    cmd_project->add_option("--curve", pj_curve)->required();
    cmd_project->add_option("--eps", pj_eps)->required();
    cmd_project->add_option("--out", pj_out)->required();

    // --- fjords -----------------------------------------------------------------
    auto* cmd_fjords = app.add_subcommand("fjords", "grid fjord decomposition");
    std::string fj_domain, fj_out;
    double fj_delta = 1.0 / 96, fj_C = 16.0;
    cmd_fjords->add_option("--domain", fj_domain)->required();
    cmd_fjords->add_option("--delta", fj_delta)->required();
    cmd_fjords->add_option("--C", fj_C, "fjord constant");
    cmd_fjords->add_option("--out", fj_out, "CSV output")->required();

    // --- crossings --------------------------------------------------------------
    auto* cmd_cross = app.add_subcommand("crossings", "annulus crossing report");
    std::string cr_domain, cr_curve, cr_annulus, cr_out;
    cmd_cross->add_option("--domain", cr_domain)->required();
    cmd_cross->add_option("--curve", cr_curve)->required();
    cmd_cross->add_option("--annulus", cr_annulus, "zx,zy,r,R")->required();
    cmd_cross->add_option("--out", cr_out, "CSV output")->required();

    // --- modulus ----------------------------------------------------------------
    auto* cmd_mod = app.add_subcommand("modulus", "quadrilateral modulus");
    std::string md_domain, md_cells;
    int md_refine = 8;
    cmd_mod->add_option("--domain", md_domain)->required();
    cmd_mod->add_option("--cells", md_cells, "cell rectangle i0,j0,i1,j1 (inclusive)")
        ->required();
    cmd_mod->add_option("--refinement", md_refine);

    // --- hm ---------------------------------------------------------------------
    auto* cmd_hm = app.add_subcommand("hm", "Monte-Carlo harmonic measure");
    std::string hm_domain, hm_z, hm_arc, hm_out;
    long hm_walks = 10000;
    double hm_step = 1e-4;
    std::uint64_t hm_seed = 1;
    cmd_hm->add_option("--domain", hm_domain)->required();
    cmd_hm->add_option("--z", hm_z, "interior start point x,y")->required();
    cmd_hm->add_option("--arc", hm_arc, "boundary edge index range lo,hi")->required();
    cmd_hm->add_option("--walks", hm_walks);
    cmd_hm->add_option("--step", hm_step, "absorption distance");
    cmd_hm->add_option("--seed", hm_seed)->required();
    cmd_hm->add_option("--out", hm_out, "CSV output");

    // --- conditiong -------------------------------------------------------------
    auto* cmd_cg = app.add_subcommand("conditiong", "unforced-crossing probabilities");
    std::string cg_domain, cg_M = "2,4,8", cg_out;
    int cg_samples = 50;
    std::uint64_t cg_seed = 1;
    cmd_cg->add_option("--domain", cg_domain)->required();
    cmd_cg->add_option("--M", cg_M, "comma-separated aspect ratios");
    cmd_cg->add_option("--samples", cg_samples);
    cmd_cg->add_option("--seed", cg_seed)->required();
    cmd_cg->add_option("--out", cg_out, "CSV output")->required();

    // --- experiments --------------------------------------------------------------
    auto* cmd_commute = app.add_subcommand("commute", "projection commutation experiment");
    std::string cm_config, cm_out;
    std::uint64_t cm_seed = 0;
    bool cm_have_seed = false;
    cmd_commute->add_option("--config", cm_config, "key = value config file")->required();
    cmd_commute->add_option("--out", cm_out, "output directory override");
    cmd_commute->add_option("--seed", cm_seed)->each([&](const std::string&) {
        cm_have_seed = true;
    });

    auto* cmd_warning = app.add_subcommand("warning", "twist homeomorphism example");
    double wr_alpha = 1.0;
    std::string wr_nlist = "16,32,64,128,256", wr_out;
    cmd_warning->add_option("--alpha", wr_alpha, "twist angle in [0, pi)")->required();
    cmd_warning->add_option("--n", wr_nlist, "comma-separated n values");
    cmd_warning->add_option("--out", wr_out, "output directory")->required();

    auto* cmd_stab = app.add_subcommand("stability", "coupled-driving stability experiment");
    std::string st_config, st_out;
    cmd_stab->add_option("--config", st_config)->required();
    cmd_stab->add_option("--out", st_out, "output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*cmd_domain) {
            Point u = dm_u.empty() ? Point{0.5, 0.45} : parse_point(dm_u);
            if (dm_shape == "disc") {
                LatticeDomain dom = approximate_domain(circle_polygon({0.5, 0.5}, 0.5, 512),
                                                       dm_u.empty() ? Point{0.5, 0.5} : u,
                                                       dm_n);
                if (!dm_a.empty() && !dm_b.empty())
                    dom = dom.with_marks_near(parse_point(dm_a), parse_point(dm_b));
                write_domain(dom, dm_out);
            } else {
                std::vector<CellIdx> cells = shape_cells(dm_shape, dm_n, dm_slot);
                LatticeDomain dom = LatticeDomain::from_cells(dm_n, cells, u);
                dom = dom.with_marks_near(dm_a.empty() ? Point{0.0, 0.5} : parse_point(dm_a),
                                          dm_b.empty() ? Point{1.0, 0.5} : parse_point(dm_b));
                write_domain(dom, dm_out);
            }
            std::printf("wrote %s\n", dm_out.c_str());
        } else if (*cmd_sle) {
            HullTrace ht = sample_sle(sle_kappa, sle_T, sle_dt, sle_seed);
            write_curve(ht.trace, sle_out);
            if (!sle_driving_out.empty()) write_driving(ht.driving, sle_driving_out);
            if (!sle_disc_out.empty()) write_curve(trace_in_disc(ht), sle_disc_out);
            std::printf("wrote %s (capacity %s)\n", sle_out.c_str(),
                        format_double(ht.capacity).c_str());
        } else if (*cmd_extract) {
            ParamCurve tr = read_curve(ex_curve);
            ExtractionReport rep = extract_driving_report(tr, ex_npts);
            write_driving(rep.driving, ex_out);
            std::printf("wrote %s (horizon %s, roundtrip sup %s)\n", ex_out.c_str(),
                        format_double(rep.driving.horizon()).c_str(),
                        format_double(rep.roundtrip_sup).c_str());
        } else if (*cmd_map) {
            LatticeDomain dom = read_domain(mp_domain);
            ConformalMap phi = mp_load.empty() ? uniformize(dom)
                                               : ConformalMap::load(dom, mp_load);
            if (mp_normalized) phi = boundary_normalized(phi, dom.mark_a(), dom.mark_b());
            if (!mp_save.empty()) phi.save(mp_save);
            if (!mp_probe.empty()) {
                Point z = parse_point(mp_probe);
                Complex w = phi.map(z.cplx());
                std::printf("phi(%s,%s) = %s,%s\n", format_double(z.x).c_str(),
                            format_double(z.y).c_str(), format_double(w.real()).c_str(),
                            format_double(w.imag()).c_str());
            }
            if (!mp_inverse.empty()) {
                Point w = parse_point(mp_inverse);
                Complex z = phi.inverse(w.cplx());
                std::printf("phi_inv(%s,%s) = %s,%s\n", format_double(w.x).c_str(),
                            format_double(w.y).c_str(), format_double(z.real()).c_str(),
                            format_double(z.imag()).c_str());
            }
        } else if (*cmd_project) {
            LatticeDomain dom = read_domain(pj_domain);
            ConformalMap phi = uniformize(dom);
            ParamCurve c = read_curve(pj_curve);
            std::vector<Point> proj;
            proj.reserve(c.size());
            for (const Point& q : c.p) proj.push_back(domain_projection(phi, q, pj_eps));
            write_curve(ParamCurve(c.t, proj), pj_out);
            std::printf("wrote %s\n", pj_out.c_str());
        } else if (*cmd_fjords) {
            LatticeDomain dom = read_domain(fj_domain);
            auto fjords = build_fjords(dom, dom.u(), fj_delta, fj_C);
            std::ofstream csv(fj_out);
            if (!csv) throw io_error("cannot open " + fj_out);
            csv << "fjord,depth,mouth_diameter,cells\n";
            for (std::size_t f = 0; f < fjords.size(); ++f)
                write_csv_line(csv, {static_cast<double>(f), fjords[f].depth,
                                     polyline_diameter(fjords[f].mouth.polyline),
                                     static_cast<double>(fjords[f].cells.size())});
            std::printf("%zu fjords -> %s\n", fjords.size(), fj_out.c_str());
        } else if (*cmd_cross) {
            LatticeDomain dom = read_domain(cr_domain);
            ParamCurve c = read_curve(cr_curve);
            std::istringstream in(cr_annulus);
            double zx, zy, r, R;
            char c1, c2, c3;
            if (!(in >> zx >> c1 >> zy >> c2 >> r >> c3 >> R))
                throw invalid_input("--annulus expects zx,zy,r,R");
            CrossingReport repx =
                detect_unforced_crossings(dom, canonicalize(c), AnnulusQuery{{zx, zy}, r, R});
            std::ofstream csv(cr_out);
            if (!csv) throw io_error("cannot open " + cr_out);
            csv << "event,component,forced,seg_begin,seg_end\n";
            for (std::size_t e = 0; e < repx.events.size(); ++e)
                write_csv_line(csv, {static_cast<double>(e),
                                     static_cast<double>(repx.events[e].component),
                                     repx.events[e].forced ? 1.0 : 0.0,
                                     static_cast<double>(repx.events[e].seg_begin),
                                     static_cast<double>(repx.events[e].seg_end)});
            std::printf("total %d unforced %d -> %s\n", repx.total, repx.unforced,
                        cr_out.c_str());
        } else if (*cmd_mod) {
            LatticeDomain dom = read_domain(md_domain);
            std::istringstream in(md_cells);
            int i0, j0, i1, j1;
            char c1, c2, c3;
            if (!(in >> i0 >> c1 >> j0 >> c2 >> i1 >> c3 >> j1))
                throw invalid_input("--cells expects i0,j0,i1,j1");
            QuadQuery q;
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) q.cells.push_back({i, j});
            double n = dom.n();
            q.s0 = {{i0 / n, j0 / n}, {i0 / n, (j1 + 1) / n}};
            q.s2 = {{(i1 + 1) / n, j0 / n}, {(i1 + 1) / n, (j1 + 1) / n}};
            double m = quad_modulus(dom, q, md_refine);
            std::printf("modulus %s\n", format_double(m).c_str());
        } else if (*cmd_hm) {
            LatticeDomain dom = read_domain(hm_domain);
            Point z = parse_point(hm_z);
            std::istringstream in(hm_arc);
            std::size_t lo, hi;
            char comma;
            if (!(in >> lo >> comma >> hi) || hi > dom.boundary_edges().size() || lo >= hi)
                throw invalid_input("--arc expects an edge index range lo,hi");
            std::vector<GridEdge> arc(dom.boundary_edges().begin() + lo,
                                      dom.boundary_edges().begin() + hi);
            MCEstimate est = harmonic_measure_mc(dom, z, arc, hm_walks, hm_step, hm_seed);
            std::printf("mean %s stderr %s walks %ld seed %llu\n",
                        format_double(est.mean).c_str(), format_double(est.stderr_).c_str(),
                        est.n_samples, static_cast<unsigned long long>(est.seed));
            if (!hm_out.empty()) {
                std::ofstream csv(hm_out);
                if (!csv) throw io_error("cannot open " + hm_out);
                csv << "mean,stderr,walks,seed\n";
                write_csv_line(csv, {est.mean, est.stderr_,
                                     static_cast<double>(est.n_samples),
                                     static_cast<double>(est.seed)});
            }
        } else if (*cmd_cg) {
            LatticeDomain dom = read_domain(cg_domain);
            std::vector<double> Ms;
            std::istringstream in(cg_M);
            std::string item;
            while (std::getline(in, item, ',')) Ms.push_back(std::stod(item));
            CurveSampler model = [&](std::uint64_t s) {
                return sample_lerw(dom, dom.mark_a(), dom.mark_b(), s);
            };
            auto rows = estimate_condition_g(model, dom, Ms, cg_samples, cg_seed);
            std::ofstream csv(cg_out);
            if (!csv) throw io_error("cannot open " + cg_out);
            csv << "M,annuli_tested,crossings,unforced,p_hat,stderr\n";
            for (const auto& r : rows)
                write_csv_line(csv, {r.M, static_cast<double>(r.annuli),
                                     static_cast<double>(r.crossings),
                                     static_cast<double>(r.unforced), r.p_hat, r.stderr_});
            std::printf("%zu rows -> %s\n", rows.size(), cg_out.c_str());
        } else if (*cmd_commute) {
            Config cfg = Config::parse_file(cm_config);
            if (cm_have_seed) cfg.set("seed", std::to_string(cm_seed));
            if (!cm_out.empty()) cfg.set("out", cm_out);
            ExperimentConfig ec = ExperimentConfig::from_config(cfg);
            ExperimentReport rep = run_commutation_experiment(ec);
            std::printf("commute: %zu cells -> %s\n",
                        rep.table("commute_cells").rows.size(), ec.out.c_str());
        } else if (*cmd_warning) {
            std::vector<int> ns;
            std::istringstream in(wr_nlist);
            std::string item;
            while (std::getline(in, item, ',')) ns.push_back(std::stoi(item));
            ExperimentReport rep = run_warning_example(ns, wr_alpha, wr_out);
            const ReportTable& t = rep.table("warning");
            for (const auto& row : t.rows)
                std::printf("n=%d gap=%s disc_gap=%s\n", static_cast<int>(row[0]),
                            format_double(row[2]).c_str(), format_double(row[3]).c_str());
        } else if (*cmd_stab) {
            Config cfg = Config::parse_file(st_config);
            if (!st_out.empty()) cfg.set("out", st_out);
            ExperimentConfig ec = ExperimentConfig::from_config(cfg);
            ExperimentReport rep = run_stability_experiment(ec);
            const ReportTable& t = rep.table("stability_monotone");
            std::printf("stability: frac_monotone %s\n",
                        format_double(t.rows[0][1]).c_str());
        }
    } catch (const numeric_failure& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
