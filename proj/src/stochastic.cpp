#include "slelab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "slelab/rng.hpp"

namespace slelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Segment set with per-bin conservative distance lower bounds and exact
// candidate lists near the segments. A lower bound is a valid sphere radius
// for walk-on-spheres steps; exact distances are only needed close to the
// boundary where the candidate lists are short.
class SegmentBins {
  public:
    void build(const std::vector<Point>& polyline, bool) {
        segs_.clear();
        for (std::size_t i = 1; i < polyline.size(); ++i)
            segs_.push_back({polyline[i - 1], polyline[i]});
        init();
    }

    // conservative distance: exact in listed bins, a positive lower bound
    // elsewhere; `which` (when requested) is only meaningful in exact mode
    double dist(Point p, std::size_t* which = nullptr) const {
        std::size_t bi = bin_of(p);
        const std::vector<std::size_t>& cand = lists_[bi];
        if (cand.empty() && !which) {
            double lb = lb_[bi];
            if (lb > 0) return lb;
        }
        double best = kInf;
        std::size_t bs = 0;
        const std::vector<std::size_t>& scan = cand.empty() ? all_ : cand;
        for (std::size_t s : scan) {
            double d = dist_point_segment(p, segs_[s].first, segs_[s].second);
            if (d < best) {
                best = d;
                bs = s;
            }
        }
        if (which) *which = bs;
        return best;
    }

  private:
    std::size_t bin_of(Point p) const {
        int a = std::clamp(static_cast<int>((p.x - x0_) / g_), 0, bw_ - 1);
        int b = std::clamp(static_cast<int>((p.y - y0_) / g_), 0, bh_ - 1);
        return static_cast<std::size_t>(b * bw_ + a);
    }
    void init() {
        double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
        for (auto& [p, q] : segs_) {
            xlo = std::min({xlo, p.x, q.x});
            xhi = std::max({xhi, p.x, q.x});
            ylo = std::min({ylo, p.y, q.y});
            yhi = std::max({yhi, p.y, q.y});
        }
        double diam = std::max({xhi - xlo, yhi - ylo, 1e-9});
        g_ = diam / 96.0;
        x0_ = xlo - g_;
        y0_ = ylo - g_;
        bw_ = static_cast<int>((xhi - x0_) / g_) + 2;
        bh_ = static_cast<int>((yhi - y0_) / g_) + 2;
        std::size_t nb = static_cast<std::size_t>(bw_) * bh_;
        lb_.assign(nb, 0.0);
        lists_.assign(nb, {});
        all_.resize(segs_.size());
        for (std::size_t s = 0; s < segs_.size(); ++s) all_[s] = s;
        const double diag = g_ * std::sqrt(0.5); // half bin diagonal
        for (int b = 0; b < bh_; ++b) {
            for (int a = 0; a < bw_; ++a) {
                Point c{x0_ + (a + 0.5) * g_, y0_ + (b + 0.5) * g_};
                double cmin = kInf;
                for (auto& [p, q] : segs_) cmin = std::min(cmin, dist_point_segment(c, p, q));
                std::size_t idx = static_cast<std::size_t>(b * bw_ + a);
                lb_[idx] = std::max(0.0, cmin - diag);
                if (cmin <= 3.0 * g_) {
                    // exact candidates: everything that could be nearest from
                    // inside this bin
                    for (std::size_t s = 0; s < segs_.size(); ++s)
                        if (dist_point_segment(c, segs_[s].first, segs_[s].second) <=
                            cmin + 2.5 * g_)
                            lists_[idx].push_back(s);
                }
            }
        }
    }

    std::vector<std::pair<Point, Point>> segs_;
    std::vector<double> lb_;
    std::vector<std::vector<std::size_t>> lists_;
    std::vector<std::size_t> all_;
    double g_ = 1, x0_ = 0, y0_ = 0;
    int bw_ = 1, bh_ = 1;
};

} // namespace

MCEstimate harmonic_measure_mc(const LatticeDomain& dom, Point z,
                               const std::vector<GridEdge>& target, long walks, double step,
                               std::uint64_t seed) {
    if (walks <= 0) throw invalid_input("harmonic_measure_mc: walks must be positive");
    if (!(step > 0)) throw invalid_input("harmonic_measure_mc: step must be positive");
    if (!dom.is_interior(z)) throw invalid_input("harmonic_measure_mc: z must be interior");

    const std::vector<GridEdge>& edges = dom.boundary_edges();
    std::vector<char> is_target(edges.size(), 0);
    for (const GridEdge& e : target) {
        bool found = false;
        for (std::size_t k = 0; k < edges.size(); ++k)
            if (edges[k] == e) {
                is_target[k] = 1;
                found = true;
            }
        if (!found) throw invalid_input("harmonic_measure_mc: target edge not on boundary");
    }
    // boundary segments in edge order (the loop has one segment per edge)
    const std::vector<Point>& loop = dom.boundary_loop();
    SegmentBins bins;
    bins.build(loop, true);

    long hits = 0;
    for (long w = 0; w < walks; ++w) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w));
        Point p = z;
        for (int it = 0; it < 200000; ++it) {
            double d = bins.dist(p);
            if (d < step) {
                std::size_t which = 0;
                bins.dist(p, &which);
                if (is_target[which]) ++hits;
                break;
            }
            double th = rng.uniform(0, 2 * M_PI);
            p = p + d * Point{std::cos(th), std::sin(th)};
        }
    }
    MCEstimate est;
    est.n_samples = walks;
    est.seed = seed;
    est.mean = static_cast<double>(hits) / static_cast<double>(walks);
    est.stderr_ = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(walks));
    return est;
}

double greens_disc(Complex z, Complex w) {
    if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0)
        throw invalid_input("greens_disc: points must lie in the open disc");
    double d = std::abs(z - w);
    if (d < 1e-300) throw invalid_input("greens_disc: singular at z = w");
    return -std::log(std::abs((1.0 - z * std::conj(w)) / (z - w))) / (2.0 * M_PI);
}

BeurlingReport beurling_check(Point z, const std::vector<Point>& obstacle, double R,
                              long walks, double step, std::uint64_t seed) {
    if (obstacle.size() < 2) throw invalid_input("beurling_check: degenerate obstacle");
    if (walks <= 0) throw invalid_input("beurling_check: walks must be positive");
    double r = dist_point_polyline(z, obstacle);
    if (!(r > 0) || r > R) throw invalid_input("beurling_check: need 0 < dist(z, K) <= R");
    double reach = 0;
    for (const Point& p : obstacle) reach = std::max(reach, dist(p, z));
    if (reach < R * (1.0 - 1e-9))
        throw invalid_input("beurling_check: obstacle does not reach the circle S(z, R)");

    SegmentBins kbins;
    kbins.build(obstacle, false);
    long escaped = 0;
    for (long w = 0; w < walks; ++w) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w));
        Point p = z;
        for (int it = 0; it < 200000; ++it) {
            double dk = kbins.dist(p);
            double dout = R - dist(p, z);
            if (dout < step) {
                ++escaped;
                break;
            }
            if (dk < step) break; // absorbed on the obstacle
            double d = std::min(dk, dout);
            double th = rng.uniform(0, 2 * M_PI);
            p = p + d * Point{std::cos(th), std::sin(th)};
        }
    }
    BeurlingReport rep;
    rep.estimate.n_samples = walks;
    rep.estimate.seed = seed;
    rep.estimate.mean = static_cast<double>(escaped) / static_cast<double>(walks);
    rep.estimate.stderr_ =
        std::sqrt(rep.estimate.mean * (1.0 - rep.estimate.mean) / static_cast<double>(walks));
    rep.r = r;
    rep.R = R;
    rep.bound = (4.0 / M_PI) * std::sqrt(r / R);
    rep.pass = rep.estimate.mean <= rep.bound + 3.0 * rep.estimate.stderr_;
    return rep;
}

CurveClass sample_lerw(const LatticeDomain& dom, GridEdge a, GridEdge b,
                       std::uint64_t seed, long max_attempts) {
    if (a == b) throw invalid_input("sample_lerw: marks must differ");
    dom.validate();
    const int n = dom.n();
    // the walk starts in the cell carrying the mark a
    CellIdx start{a.i, a.j};
    if (!dom.has_cell(start.i, start.j))
        throw invalid_input("sample_lerw: mark a has no carrying cell");

    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    const char exit_dir[4] = {'E', 'W', 'N', 'S'};
    for (long attempt = 0; attempt < max_attempts; ++attempt) {
        CounterRng rng(seed, static_cast<std::uint64_t>(attempt));
        std::vector<CellIdx> path{start};
        GridEdge exit{};
        bool exited = false;
        for (long stepcount = 0; stepcount < 100000000 && !exited; ++stepcount) {
            CellIdx c = path.back();
            int m = static_cast<int>(rng.below(4));
            int ii = c.i + di[m], jj = c.j + dj[m];
            if (dom.has_cell(ii, jj)) {
                path.push_back({ii, jj});
            } else {
                exit = {c.i, c.j, exit_dir[m]};
                exited = true;
            }
        }
        if (!exited || !(exit == b)) continue;
        // loop erasure in path order
        std::map<std::pair<int, int>, std::size_t> pos;
        std::vector<CellIdx> erased;
        for (CellIdx c : path) {
            auto key = std::make_pair(c.i, c.j);
            auto it = pos.find(key);
            if (it != pos.end()) {
                while (erased.size() > it->second + 1) {
                    pos.erase({erased.back().i, erased.back().j});
                    erased.pop_back();
                }
            } else {
                pos[key] = erased.size();
                erased.push_back(c);
            }
        }
        std::vector<Point> verts;
        verts.push_back(a.midpoint(n));
        for (CellIdx c : erased) verts.push_back({(c.i + 0.5) / n, (c.j + 0.5) / n});
        verts.push_back(b.midpoint(n));
        return CurveClass(std::move(verts));
    }
    throw sampling_failure("sample_lerw: resampling budget exhausted");
}

std::vector<ConditionGRow> estimate_condition_g(const CurveSampler& model,
                                                const LatticeDomain& dom,
                                                const std::vector<double>& M_values,
                                                int samples, std::uint64_t seed) {
    if (samples <= 0) throw invalid_input("estimate_condition_g: samples must be positive");
    const std::vector<Point>& loop = dom.boundary_loop();
    double diam = polyline_diameter(loop);

    // deterministic annulus catalog: centers on a subsample of boundary
    // vertices, dyadic radii
    std::vector<Point> centers;
    std::size_t stride = std::max<std::size_t>(1, (loop.size() - 1) / 16);
    for (std::size_t v = 0; v + 1 < loop.size(); v += stride) centers.push_back(loop[v]);

    std::vector<CurveClass> curves;
    curves.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s)
        curves.push_back(model(seed + static_cast<std::uint64_t>(s)));

    std::vector<ConditionGRow> table;
    for (double M : M_values) {
        ConditionGRow row;
        row.M = M;
        std::vector<AnnulusQuery> catalog;
        for (Point c : centers) {
            for (int k = 3; k <= 7; ++k) {
                double r = diam * std::pow(2.0, -k);
                double R = M * r;
                if (R > 0.45 * diam) continue;
                catalog.push_back({c, r, R});
            }
        }
        row.annuli = static_cast<int>(catalog.size());
        if (catalog.empty()) {
            table.push_back(row); // missing row, reported as such
            continue;
        }
        long events = 0, crossings = 0;
        for (const CurveClass& curve : curves) {
            for (const AnnulusQuery& q : catalog) {
                CrossingReport rep = detect_unforced_crossings(dom, curve, q);
                crossings += rep.total;
                if (rep.unforced > 0) ++events;
            }
        }
        long trials = static_cast<long>(curves.size()) * row.annuli;
        row.crossings = crossings;
        row.unforced = events;
        row.p_hat = static_cast<double>(events) / static_cast<double>(trials);
        row.stderr_ =
            std::sqrt(row.p_hat * (1.0 - row.p_hat) / static_cast<double>(trials));
        table.push_back(row);
    }
    return table;
}

} // namespace slelab
