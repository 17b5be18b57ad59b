#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slelab/harness.hpp"

using namespace slelab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing") {
    Config cfg = Config::parse_text("experiment = commute\n# comment\nseed = 7\n"
                                    "eps_list = 0.2, 0.1\nu = 0.5,0.45\n");
    CHECK(cfg.get("experiment") == "commute");
    CHECK(cfg.get_long("seed") == 7);
    CHECK(cfg.get_list("eps_list").size() == 2);
    CHECK(cfg.get_point("u").y == doctest::Approx(0.45));
    CHECK_THROWS_AS(cfg.get("missing"), invalid_input);
    CHECK_THROWS_AS(Config::parse_text("x = abc\n").get_double("x"), invalid_input);
}

TEST_CASE("curve and driving files round trip") {
    ParamCurve c({0, 0.25, 1}, {{0, 0}, {0.5, 0.125}, {1, 1}});
    write_curve(c, "/tmp/slelab_c.curve");
    ParamCurve back = read_curve("/tmp/slelab_c.curve");
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.t[i] == c.t[i]);
        CHECK(back.p[i] == c.p[i]);
    }
    DrivingFunction w({0, 0.5, 2}, {0, -1, 0.25});
    write_driving(w, "/tmp/slelab_w.driving");
    DrivingFunction wb = read_driving("/tmp/slelab_w.driving");
    REQUIRE(wb.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(wb.w[i] == w.w[i]);
    CHECK_THROWS_AS(read_curve("/tmp/definitely_missing_file.curve"), io_error);
}

TEST_CASE("domain file round trip") {
    std::vector<CellIdx> cells;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cells.push_back({i, j});
    LatticeDomain dom = LatticeDomain::from_cells(4, cells, {0.5, 0.45})
                            .with_marks_near({0, 0.5}, {1, 0.5});
    write_domain(dom, "/tmp/slelab_d.domain");
    LatticeDomain back = read_domain("/tmp/slelab_d.domain");
    CHECK(back.n() == 4);
    CHECK(back.cell_count() == 16);
    CHECK(back.mark_a() == dom.mark_a());
    CHECK(back.mark_b() == dom.mark_b());
    CHECK(back.u().x == dom.u().x);
}

TEST_CASE("twist map geometry") {
    // identity inside the band and on the unit circle
    CHECK(dist(twist_map({0.3, 0.2}, 8, 1.0), {0.3, 0.2}) == 0.0);
    Point on_circle{std::cos(0.4), std::sin(0.4)};
    CHECK(dist(twist_map(on_circle, 8, 1.0), on_circle) < 1e-12);
    // mid-band points twist by alpha
    int n = 16;
    double rho = 1.0 - 0.5 / n;
    Point mid{rho, 0};
    Point tw = twist_map(mid, n, 0.7);
    CHECK(std::atan2(tw.y, tw.x) == doctest::Approx(0.7));
    CHECK(norm(tw) == doctest::Approx(rho));
    // alpha = 0 is the identity everywhere
    CHECK(dist(twist_map(mid, n, 0.0), mid) == 0.0);
}

TEST_CASE("warning example produces a non-vanishing gap") {
    ExperimentReport rep = run_warning_example({16, 64}, 1.0, "");
    const ReportTable& t = rep.table("warning");
    REQUIRE(t.rows.size() == 2);
    double g16 = t.rows[0][2], g64 = t.rows[1][2];
    // the twisted curve reaches e^{i alpha} (1 - 1/(2n)); its distance to the
    // segment [-1,1] is about sin(alpha) at this alpha
    CHECK(g16 > 0.5);
    CHECK(g64 > 0.9 * g16);
    CHECK(t.rows[0][3] == 0.0); // disc curves agree identically
    // alpha = 0: gap zero
    ExperimentReport zero = run_warning_example({16}, 0.0, "");
    CHECK(zero.table("warning").rows[0][2] < 1e-6);
}

TEST_CASE("commutation experiment on the disc stays within eps") {
    ExperimentConfig cfg;
    cfg.experiment = "commute";
    cfg.polygon = circle_polygon({0.5, 0.5}, 0.5, 256);
    cfg.u = {0.5, 0.5};
    cfg.mark_a = {0.0, 0.5};
    cfg.mark_b = {1.0, 0.5};
    cfg.model = "sle";
    cfg.kappa = 2.0;
    cfg.T = 2.0;
    cfg.dt = 2e-3;
    cfg.n_list = {24};
    cfg.eps_list = {0.1, 0.05};
    cfg.ell = 0.2;
    cfg.samples = 4;
    cfg.curve_points = 160;
    cfg.seed = 5;
    ExperimentReport rep = run_commutation_experiment(cfg);
    const ReportTable& t = rep.table("commute_cells");
    REQUIRE(t.rows.size() == 2);
    // on the (nearly identity) disc map the projection moves points by about
    // eps: max distance <= eps + discretization slack
    for (const auto& row : t.rows) {
        double eps = row[1], dmax = row[6];
        CHECK(dmax <= eps + 3.0 / 24 + 0.02);
        CHECK(row[7] == 0.0); // no exceedance over ell = 0.2
    }
    // reproducibility: same config, same rows
    ExperimentReport rep2 = run_commutation_experiment(cfg);
    const ReportTable& t2 = rep2.table("commute_cells");
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.rows[r].size(); ++c)
            CHECK(t.rows[r][c] == t2.rows[r][c]);
}

TEST_CASE("commutation experiment with the lerw model") {
    ExperimentConfig cfg;
    cfg.experiment = "commute";
    cfg.polygon = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    cfg.u = {0.5, 0.45};
    cfg.model = "lerw";
    cfg.n_list = {8, 12};
    cfg.eps_list = {0.2, 0.1};
    cfg.ell = 0.3;
    cfg.samples = 3;
    cfg.seed = 3;
    ExperimentReport rep = run_commutation_experiment(cfg);
    CHECK(rep.table("commute_cells").rows.size() == 4);
    // driving metrics exist from the second n on
    CHECK(rep.table("driving_metrics").rows.size() >= 1);
}

TEST_CASE("stability experiment couples through one brownian path") {
    ExperimentConfig cfg;
    cfg.experiment = "stability";
    cfg.kappa = 2.0;
    cfg.kappa_list = {1.6, 1.9, 1.99};
    cfg.T = 1.0;
    cfg.dt = 2e-3;
    cfg.samples = 12;
    cfg.seed = 2;
    ExperimentReport rep = run_stability_experiment(cfg);
    const ReportTable& t = rep.table("stability");
    REQUIRE(t.rows.size() == 3);
    // medians decrease as kappa_m approaches kappa
    CHECK(t.rows[0][3] >= t.rows[1][3]);
    CHECK(t.rows[1][3] >= t.rows[2][3]);
    // identical kappa would give zero distance; close kappa gives small
    CHECK(t.rows[2][3] < 0.1);
    const ReportTable& m = rep.table("stability_monotone");
    CHECK(m.rows[0][1] >= 0.75);
    // per-seed pairing recorded
    CHECK(rep.table("stability_per_seed").rows.size() == 3 * 12);
}

TEST_CASE("report files are written deterministically") {
    ExperimentReport rep = run_warning_example({8, 16}, 0.8, "/tmp/slelab_rep1");
    ExperimentReport rep2 = run_warning_example({8, 16}, 0.8, "/tmp/slelab_rep2");
    (void)rep;
    (void)rep2;
    CHECK(slurp("/tmp/slelab_rep1/warning.csv") == slurp("/tmp/slelab_rep2/warning.csv"));
    CHECK(slurp("/tmp/slelab_rep1/manifest.txt") == slurp("/tmp/slelab_rep2/manifest.txt"));
    CHECK(!slurp("/tmp/slelab_rep1/warning_gap.svg").empty());
    CHECK(slurp("/tmp/slelab_rep1/manifest.txt").find("warning") != std::string::npos);
}
