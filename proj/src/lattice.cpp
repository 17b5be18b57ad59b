#include "slelab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace slelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t pack_cell(int i, int j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

int floor_div(int a, int b) {
    int q = a / b, r = a % b;
    return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

int mod_pos(int a, int b) {
    int r = a % b;
    return r < 0 ? r + b : r;
}

// columns/rows of cells whose closed square contains the coordinate v*n
void covering_range(double vn, int& lo, int& hi) {
    double r = std::round(vn);
    if (std::abs(vn - r) <= 1e-9) {
        lo = static_cast<int>(r) - 1;
        hi = static_cast<int>(r);
    } else {
        lo = hi = static_cast<int>(std::floor(vn));
    }
}

struct IntSet {
    std::unordered_set<std::uint64_t> s;
    bool has(int i, int j) const { return s.count(pack_cell(i, j)) != 0; }
    void add(int i, int j) { s.insert(pack_cell(i, j)); }
};

// Trace the boundary of an edge-connected, simply-connected set of unit
// cells: directed edges with the set on the left, chained into one closed
// loop, taking the leftmost turn at pinch vertices.
struct TracedBoundary {
    std::vector<GridEdge> edges;
    std::vector<std::pair<int, int>> verts; // closed: first vertex repeated
};

TracedBoundary trace_cell_boundary(const IntSet& cells, int imin, int imax, int jmin,
                                   int jmax) {
    struct DirEdge {
        int x0, y0, x1, y1;
        GridEdge ge;
    };
    std::vector<DirEdge> all;
    for (int i = imin; i <= imax; ++i) {
        for (int j = jmin; j <= jmax; ++j) {
            if (!cells.has(i, j)) continue;
            if (!cells.has(i, j - 1)) all.push_back({i, j, i + 1, j, {i, j, 'S'}});
            if (!cells.has(i + 1, j)) all.push_back({i + 1, j, i + 1, j + 1, {i, j, 'E'}});
            if (!cells.has(i, j + 1)) all.push_back({i + 1, j + 1, i, j + 1, {i, j, 'N'}});
            if (!cells.has(i - 1, j)) all.push_back({i, j + 1, i, j, {i, j, 'W'}});
        }
    }
    if (all.empty()) throw invalid_input("lattice: no boundary edges");
    std::map<std::pair<int, int>, std::vector<std::size_t>> by_start;
    for (std::size_t e = 0; e < all.size(); ++e)
        by_start[{all[e].x0, all[e].y0}].push_back(e);

    std::vector<char> used(all.size(), 0);
    TracedBoundary tb;
    std::size_t cur = 0;
    tb.verts.push_back({all[0].x0, all[0].y0});
    for (std::size_t guard = 0; guard <= all.size(); ++guard) {
        used[cur] = 1;
        tb.edges.push_back(all[cur].ge);
        tb.verts.push_back({all[cur].x1, all[cur].y1});
        if (all[cur].x1 == all[0].x0 && all[cur].y1 == all[0].y0) break;
        auto it = by_start.find({all[cur].x1, all[cur].y1});
        if (it == by_start.end()) throw invalid_input("lattice: open boundary chain");
        std::size_t next = all.size();
        if (it->second.size() == 1) {
            next = it->second[0];
        } else {
            // pinch vertex: the leftmost turn keeps the loop from crossing
            int dx = all[cur].x1 - all[cur].x0, dy = all[cur].y1 - all[cur].y0;
            int lx = -dy, ly = dx;
            int best = -1;
            for (std::size_t cand : it->second) {
                if (used[cand]) continue;
                int cx = all[cand].x1 - all[cand].x0, cy = all[cand].y1 - all[cand].y0;
                int score = (cx == lx && cy == ly) ? 2 : (cx == dx && cy == dy) ? 1 : 0;
                if (score > best) {
                    best = score;
                    next = cand;
                }
            }
            if (next == all.size()) throw invalid_input("lattice: stuck at pinch vertex");
        }
        if (used[next]) throw invalid_input("lattice: boundary loop revisits an edge");
        cur = next;
    }
    for (char u : used)
        if (!u) throw invalid_input("lattice: boundary is not a single loop");
    return tb;
}

} // namespace

// --- GridEdge ----------------------------------------------------------------

void GridEdge::endpoints(int& x0, int& y0, int& x1, int& y1) const {
    switch (dir) {
        case 'S': x0 = i; y0 = j; x1 = i + 1; y1 = j; return;
        case 'E': x0 = i + 1; y0 = j; x1 = i + 1; y1 = j + 1; return;
        case 'N': x0 = i + 1; y0 = j + 1; x1 = i; y1 = j + 1; return;
        case 'W': x0 = i; y0 = j + 1; x1 = i; y1 = j; return;
        default: throw invalid_input("grid edge: bad direction");
    }
}

Point GridEdge::midpoint(int n) const {
    int x0, y0, x1, y1;
    endpoints(x0, y0, x1, y1);
    return {(x0 + x1) / (2.0 * n), (y0 + y1) / (2.0 * n)};
}

Point GridEdge::inward_normal() const {
    switch (dir) {
        case 'S': return {0, 1};
        case 'E': return {-1, 0};
        case 'N': return {0, -1};
        case 'W': return {1, 0};
        default: throw invalid_input("grid edge: bad direction");
    }
}

bool operator==(const GridEdge& a, const GridEdge& b) {
    return a.i == b.i && a.j == b.j && a.dir == b.dir;
}

// --- RefinedGrid -------------------------------------------------------------

RefinedGrid::RefinedGrid(const LatticeDomain& dom, int k) : k_(k), n_(dom.n()) {
    int imin = 1 << 30, imax = -(1 << 30), jmin = 1 << 30, jmax = -(1 << 30);
    for (CellIdx c : dom.cells()) {
        imin = std::min(imin, c.i);
        imax = std::max(imax, c.i);
        jmin = std::min(jmin, c.j);
        jmax = std::max(jmax, c.j);
    }
    a0_ = imin * k_;
    b0_ = jmin * k_;
    W_ = (imax + 1 - imin) * k_ + 1;
    H_ = (jmax + 1 - jmin) * k_ + 1;
    h_ = 1.0 / (static_cast<double>(n_) * k_);
    interior_.assign(static_cast<std::size_t>(W_) * H_, 0);
    for (int b = b0_; b < b0_ + H_; ++b) {
        int jlo, jhi;
        if (mod_pos(b, k_) == 0) {
            jlo = floor_div(b, k_) - 1;
            jhi = floor_div(b, k_);
        } else {
            jlo = jhi = floor_div(b, k_);
        }
        for (int a = a0_; a < a0_ + W_; ++a) {
            int ilo, ihi;
            if (mod_pos(a, k_) == 0) {
                ilo = floor_div(a, k_) - 1;
                ihi = floor_div(a, k_);
            } else {
                ilo = ihi = floor_div(a, k_);
            }
            bool in = true;
            for (int i = ilo; i <= ihi && in; ++i)
                for (int j = jlo; j <= jhi && in; ++j)
                    if (!dom.has_cell(i, j)) in = false;
            interior_[static_cast<std::size_t>(index(a, b))] = in ? 1 : 0;
        }
    }
    squares_.assign(static_cast<std::size_t>(W_ - 1) * (H_ - 1), 0);
    for (int b = b0_; b < b0_ + H_ - 1; ++b)
        for (int a = a0_; a < a0_ + W_ - 1; ++a)
            squares_[static_cast<std::size_t>((b - b0_) * (W_ - 1) + (a - a0_))] =
                dom.has_cell(floor_div(a, k_), floor_div(b, k_)) ? 1 : 0;
}

bool RefinedGrid::square_in_domain(int a, int b) const {
    if (a < a0_ || a >= a0_ + W_ - 1 || b < b0_ || b >= b0_ + H_ - 1) return false;
    return squares_[static_cast<std::size_t>((b - b0_) * (W_ - 1) + (a - a0_))] != 0;
}

bool RefinedGrid::nearest_interior(Point p, int& a, int& b, int max_ring) const {
    int ac = static_cast<int>(std::lround(p.x / h_));
    int bc = static_cast<int>(std::lround(p.y / h_));
    for (int ring = 0; ring <= max_ring; ++ring) {
        double best = kInf;
        bool found = false;
        for (int da = -ring; da <= ring; ++da) {
            for (int db = -ring; db <= ring; ++db) {
                if (std::max(std::abs(da), std::abs(db)) != ring) continue;
                int aa = ac + da, bb = bc + db;
                if (!interior(aa, bb)) continue;
                double d = dist(p, point(aa, bb));
                if (d < best) {
                    best = d;
                    a = aa;
                    b = bb;
                    found = true;
                }
            }
        }
        if (found) return true;
    }
    return false;
}

RefinedGrid::Walls::Walls(const RefinedGrid& g,
                          const std::vector<std::vector<Point>>& polylines)
    : grid(g), h(g.h()) {
    bin_a0 = g.a0();
    bin_b0 = g.b0();
    bins_w = g.width() - 1;
    bins_h = g.height() - 1;
    bins.assign(static_cast<std::size_t>(bins_w) * bins_h, {});
    for (const auto& poly : polylines) {
        for (std::size_t i = 1; i < poly.size(); ++i) {
            Point p = poly[i - 1], q = poly[i];
            int alo = std::max(bin_a0, static_cast<int>(std::floor((std::min(p.x, q.x) - h) / h)));
            int ahi = std::min(bin_a0 + bins_w - 1,
                               static_cast<int>(std::floor((std::max(p.x, q.x) + h) / h)));
            int blo = std::max(bin_b0, static_cast<int>(std::floor((std::min(p.y, q.y) - h) / h)));
            int bhi = std::min(bin_b0 + bins_h - 1,
                               static_cast<int>(std::floor((std::max(p.y, q.y) + h) / h)));
            for (int a = alo; a <= ahi; ++a)
                for (int b = blo; b <= bhi; ++b)
                    bins[static_cast<std::size_t>((b - bin_b0) * bins_w + (a - bin_a0))]
                        .push_back({p, q});
        }
    }
}

bool RefinedGrid::Walls::blocked(int a0, int b0, int a1, int b1) const {
    int sa = std::min(a0, a1), sb = std::min(b0, b1);
    if (sa < bin_a0 || sa >= bin_a0 + bins_w || sb < bin_b0 || sb >= bin_b0 + bins_h)
        return false;
    const auto& lst = bins[static_cast<std::size_t>((sb - bin_b0) * bins_w + (sa - bin_a0))];
    if (lst.empty()) return false;
    Point p{a0 * h, b0 * h}, q{a1 * h, b1 * h};
    for (const auto& w : lst)
        if (segments_intersect(p, q, w.first, w.second)) return true;
    return false;
}

std::vector<double> RefinedGrid::dijkstra(const std::vector<std::pair<int, double>>& sources,
                                          const Walls* walls) const {
    std::vector<double> dist(interior_.size(), kInf);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    for (auto [idx, c] : sources) {
        if (idx < 0 || idx >= static_cast<int>(dist.size())) continue;
        if (!interior_[static_cast<std::size_t>(idx)]) continue;
        if (c < dist[idx]) {
            dist[idx] = c;
            pq.push({c, idx});
        }
    }
    const double diag = h_ * std::sqrt(2.0);
    static const int da[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int db[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!pq.empty()) {
        auto [d, idx] = pq.top();
        pq.pop();
        if (d > dist[idx]) continue;
        int a = a0_ + idx % W_, b = b0_ + idx / W_;
        for (int m = 0; m < 8; ++m) {
            int aa = a + da[m], bb = b + db[m];
            if (!interior(aa, bb)) continue;
            bool diagonal = m >= 4;
            if (diagonal && !square_in_domain(std::min(a, aa), std::min(b, bb))) continue;
            if (walls && walls->blocked(a, b, aa, bb)) continue;
            double nd = d + (diagonal ? diag : h_);
            int ni = index(aa, bb);
            if (nd < dist[ni]) {
                dist[ni] = nd;
                pq.push({nd, ni});
            }
        }
    }
    return dist;
}

std::vector<char> RefinedGrid::flood(int start_index, const Walls* walls,
                                     const std::vector<char>* blocked_vertices) const {
    std::vector<char> seen(interior_.size(), 0);
    if (start_index < 0 || start_index >= static_cast<int>(seen.size())) return seen;
    if (!interior_[static_cast<std::size_t>(start_index)]) return seen;
    if (blocked_vertices && (*blocked_vertices)[start_index]) return seen;
    std::vector<int> stack{start_index};
    seen[start_index] = 1;
    static const int da[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int db[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        int a = a0_ + idx % W_, b = b0_ + idx / W_;
        for (int m = 0; m < 8; ++m) {
            int aa = a + da[m], bb = b + db[m];
            if (!interior(aa, bb)) continue;
            int ni = index(aa, bb);
            if (seen[ni]) continue;
            if (blocked_vertices && (*blocked_vertices)[ni]) continue;
            bool diagonal = m >= 4;
            if (diagonal && !square_in_domain(std::min(a, aa), std::min(b, bb))) continue;
            if (walls && walls->blocked(a, b, aa, bb)) continue;
            seen[ni] = 1;
            stack.push_back(ni);
        }
    }
    return seen;
}

// --- LatticeDomain -----------------------------------------------------------

std::vector<CellIdx> LatticeDomain::cells() const {
    std::vector<CellIdx> out;
    out.reserve(cells_.size());
    for (std::uint64_t key : cells_)
        out.push_back({static_cast<int>(static_cast<std::int32_t>(key >> 32)),
                       static_cast<int>(static_cast<std::int32_t>(key & 0xffffffffu))});
    std::sort(out.begin(), out.end(),
              [](CellIdx a, CellIdx b) { return a.i < b.i || (a.i == b.i && a.j < b.j); });
    return out;
}

bool LatticeDomain::has_cell(int i, int j) const {
    return cells_.count(pack_cell(i, j)) != 0;
}

bool LatticeDomain::is_interior(Point p) const {
    if (!p.finite()) return false;
    int ilo, ihi, jlo, jhi;
    covering_range(p.x * n_, ilo, ihi);
    covering_range(p.y * n_, jlo, jhi);
    for (int i = ilo; i <= ihi; ++i)
        for (int j = jlo; j <= jhi; ++j)
            if (!has_cell(i, j)) return false;
    return true;
}

double LatticeDomain::dist_to_boundary(Point p) const {
    double best = kInf;
    for (std::size_t i = 1; i < loop_.size(); ++i)
        best = std::min(best, dist2_point_segment(p, loop_[i - 1], loop_[i]));
    return std::sqrt(best);
}

GridEdge LatticeDomain::nearest_boundary_edge(Point p) const {
    double best = kInf;
    GridEdge out = edges_.front();
    for (const GridEdge& e : edges_) {
        double d = dist(p, e.midpoint(n_));
        if (d < best) {
            best = d;
            out = e;
        }
    }
    return out;
}

LatticeDomain LatticeDomain::with_marks_near(Point pa, Point pb) const {
    LatticeDomain out = *this;
    out.a_ = nearest_boundary_edge(pa);
    out.b_ = nearest_boundary_edge(pb);
    if (out.a_ == out.b_) throw invalid_input("lattice: marks coincide");
    return out;
}

LatticeDomain LatticeDomain::from_cells(int n, const std::vector<CellIdx>& cells, Point u) {
    LatticeDomain dom;
    if (n < 1) throw invalid_input("lattice: n must be >= 1");
    if (cells.empty()) throw invalid_input("lattice: empty cell set");
    dom.n_ = n;
    for (CellIdx c : cells) dom.cells_.insert(pack_cell(c.i, c.j));
    dom.u_ = u;
    dom.finalize();
    // default marks: the first traced edge and the one half way along
    dom.a_ = dom.edges_.front();
    dom.b_ = dom.edges_[dom.edges_.size() / 2];
    dom.validate();
    return dom;
}

LatticeDomain LatticeDomain::from_cells(int n, const std::vector<CellIdx>& cells, Point u,
                                        GridEdge a, GridEdge b) {
    LatticeDomain dom = from_cells(n, cells, u);
    dom.a_ = a;
    dom.b_ = b;
    dom.validate();
    return dom;
}

void LatticeDomain::finalize() {
    imin_ = jmin_ = 1 << 30;
    imax_ = jmax_ = -(1 << 30);
    IntSet set;
    set.s = cells_;
    for (CellIdx c : cells()) {
        imin_ = std::min(imin_, c.i);
        imax_ = std::max(imax_, c.i);
        jmin_ = std::min(jmin_, c.j);
        jmax_ = std::max(jmax_, c.j);
    }
    // edge connectivity
    {
        std::vector<CellIdx> cs = cells();
        std::unordered_set<std::uint64_t> seen;
        std::vector<CellIdx> stack{cs.front()};
        seen.insert(pack_cell(cs.front().i, cs.front().j));
        while (!stack.empty()) {
            CellIdx c = stack.back();
            stack.pop_back();
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int m = 0; m < 4; ++m) {
                int ii = c.i + di[m], jj = c.j + dj[m];
                if (!has_cell(ii, jj) || seen.count(pack_cell(ii, jj))) continue;
                seen.insert(pack_cell(ii, jj));
                stack.push_back({ii, jj});
            }
        }
        if (seen.size() != cells_.size())
            throw invalid_input("lattice: cells are not edge-connected");
    }
    // simple connectivity: every complement cell in the padded bounding box
    // reaches the outer face by 4-neighbor steps
    {
        int w = imax_ - imin_ + 3, h = jmax_ - jmin_ + 3;
        auto off = [&](int i, int j) {
            return static_cast<std::size_t>((j - (jmin_ - 1)) * w + (i - (imin_ - 1)));
        };
        std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
        std::vector<std::pair<int, int>> stack{{imin_ - 1, jmin_ - 1}};
        seen[off(imin_ - 1, jmin_ - 1)] = 1;
        while (!stack.empty()) {
            auto [i, j] = stack.back();
            stack.pop_back();
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int m = 0; m < 4; ++m) {
                int ii = i + di[m], jj = j + dj[m];
                if (ii < imin_ - 1 || ii > imax_ + 1 || jj < jmin_ - 1 || jj > jmax_ + 1)
                    continue;
                if (has_cell(ii, jj) || seen[off(ii, jj)]) continue;
                seen[off(ii, jj)] = 1;
                stack.push_back({ii, jj});
            }
        }
        for (int i = imin_; i <= imax_; ++i)
            for (int j = jmin_; j <= jmax_; ++j)
                if (!has_cell(i, j) && !seen[off(i, j)])
                    throw invalid_input("lattice: cell union is not simply connected");
    }
    TracedBoundary tb = trace_cell_boundary(set, imin_, imax_, jmin_, jmax_);
    edges_ = std::move(tb.edges);
    loop_.clear();
    loop_.reserve(tb.verts.size());
    for (auto [x, y] : tb.verts)
        loop_.push_back({static_cast<double>(x) / n_, static_cast<double>(y) / n_});
    refined_ = std::make_shared<RefinedGrid>(*this);
}

void LatticeDomain::validate() const {
    if (cells_.empty()) throw invalid_input("lattice: empty domain");
    if (!u_.finite() || !is_interior(u_))
        throw invalid_input("lattice: base point u is not strictly interior");
    auto on_boundary = [&](const GridEdge& e) {
        for (const GridEdge& f : edges_)
            if (f == e) return true;
        return false;
    };
    if (!on_boundary(a_) || !on_boundary(b_))
        throw invalid_input("lattice: marked edge not on the boundary loop");
    if (a_ == b_) throw invalid_input("lattice: marked edges must differ");
}

// --- approximate_domain ------------------------------------------------------

LatticeDomain approximate_domain(const std::vector<Point>& polygon, Point u, int n) {
    if (polygon.size() < 3) throw invalid_input("approximate_domain: polygon too small");
    if (n < 1) throw invalid_input("approximate_domain: n must be >= 1");
    if (!point_in_polygon(u, polygon, false))
        throw invalid_input("approximate_domain: u must lie strictly inside the polygon");

    double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
    for (Point p : polygon) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    }
    int imin = static_cast<int>(std::floor(xlo * n)) - 1;
    int imax = static_cast<int>(std::ceil(xhi * n)) + 1;
    int jmin = static_cast<int>(std::floor(ylo * n)) - 1;
    int jmax = static_cast<int>(std::ceil(yhi * n)) + 1;
    int W = imax - imin + 2, H = jmax - jmin + 2; // lattice vertices

    // classify lattice vertices against the closed polygon
    auto vidx = [&](int i, int j) {
        return static_cast<std::size_t>((j - jmin) * W + (i - imin));
    };
    std::vector<char> vin(static_cast<std::size_t>(W) * H, 0);
    const double snap = 1e-9;
    const double nudge_x = 3.594e-8, nudge_y = 2.71828e-8; // parity probe off gridlines
    const std::size_t m = polygon.size();
    for (int j = jmin; j <= jmax + 1; ++j) {
        double y = static_cast<double>(j) / n + nudge_y;
        std::vector<double> xs;
        for (std::size_t e = 0; e < m; ++e) {
            Point p = polygon[e], q = polygon[(e + 1) % m];
            if ((p.y > y) != (q.y > y))
                xs.push_back(p.x + (y - p.y) / (q.y - p.y) * (q.x - p.x));
        }
        std::sort(xs.begin(), xs.end());
        for (int i = imin; i <= imax + 1; ++i) {
            double x = static_cast<double>(i) / n + nudge_x;
            std::size_t c = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
            bool inside = (xs.size() - c) % 2 == 1;
            if (!inside) {
                // boundary-touching vertices belong to the closed polygon
                Point v{static_cast<double>(i) / n, static_cast<double>(j) / n};
                for (std::size_t e = 0; e < m && !inside; ++e)
                    if (dist2_point_segment(v, polygon[e], polygon[(e + 1) % m]) <=
                        snap * snap)
                        inside = true;
            }
            vin[vidx(i, j)] = inside ? 1 : 0;
        }
    }

    // cells whose interior a polygon edge might cross
    std::map<std::pair<int, int>, std::vector<std::size_t>> edge_bins;
    for (std::size_t e = 0; e < m; ++e) {
        Point p = polygon[e], q = polygon[(e + 1) % m];
        int alo = static_cast<int>(std::floor(std::min(p.x, q.x) * n)) - 1;
        int ahi = static_cast<int>(std::floor(std::max(p.x, q.x) * n)) + 1;
        int blo = static_cast<int>(std::floor(std::min(p.y, q.y) * n)) - 1;
        int bhi = static_cast<int>(std::floor(std::max(p.y, q.y) * n)) + 1;
        for (int a = alo; a <= ahi; ++a)
            for (int b = blo; b <= bhi; ++b) edge_bins[{a, b}].push_back(e);
    }

    auto cell_admissible = [&](int i, int j) {
        if (i < imin || i > imax || j < jmin || j > jmax) return false;
        if (!vin[vidx(i, j)] || !vin[vidx(i + 1, j)] || !vin[vidx(i, j + 1)] ||
            !vin[vidx(i + 1, j + 1)])
            return false;
        auto it = edge_bins.find({i, j});
        if (it == edge_bins.end()) return true;
        double x0 = static_cast<double>(i) / n, x1 = static_cast<double>(i + 1) / n;
        double y0 = static_cast<double>(j) / n, y1 = static_cast<double>(j + 1) / n;
        for (std::size_t e : it->second) {
            Point p = polygon[e], q = polygon[(e + 1) % m];
            // clip the edge to the cell; penetration iff the clipped midpoint
            // lies strictly inside the open cell
            double t0 = 0, t1 = 1;
            double dx = q.x - p.x, dy = q.y - p.y;
            bool miss = false;
            auto clip = [&](double den, double num) {
                if (std::abs(den) < 1e-300) {
                    if (num < 0) miss = true;
                    return;
                }
                double t = num / den;
                if (den > 0) {
                    if (t < t1) t1 = t;
                } else {
                    if (t > t0) t0 = t;
                }
            };
            clip(-dx, p.x - x0);
            clip(dx, x1 - p.x);
            clip(-dy, p.y - y0);
            clip(dy, y1 - p.y);
            if (miss || t0 >= t1) continue;
            double tm = 0.5 * (t0 + t1);
            Point mid{p.x + tm * dx, p.y + tm * dy};
            double margin = 1e-9 / n;
            if (mid.x > x0 + margin && mid.x < x1 - margin && mid.y > y0 + margin &&
                mid.y < y1 - margin)
                return false;
        }
        return true;
    };

    // component of admissible cells containing u
    int uilo, uihi, ujlo, ujhi;
    covering_range(u.x * n, uilo, uihi);
    covering_range(u.y * n, ujlo, ujhi);
    std::vector<CellIdx> seeds;
    for (int i = uilo; i <= uihi; ++i)
        for (int j = ujlo; j <= ujhi; ++j)
            if (cell_admissible(i, j)) seeds.push_back({i, j});
    if (seeds.size() != static_cast<std::size_t>((uihi - uilo + 1) * (ujhi - ujlo + 1)))
        throw resolution_error(
            "approximate_domain: no admissible cell around u at this resolution");

    IntSet comp;
    std::vector<CellIdx> stack = seeds;
    for (CellIdx c : seeds) comp.add(c.i, c.j);
    while (!stack.empty()) {
        CellIdx c = stack.back();
        stack.pop_back();
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int mdir = 0; mdir < 4; ++mdir) {
            int ii = c.i + di[mdir], jj = c.j + dj[mdir];
            if (comp.has(ii, jj) || !cell_admissible(ii, jj)) continue;
            comp.add(ii, jj);
            stack.push_back({ii, jj});
        }
    }
    std::vector<CellIdx> out;
    for (std::uint64_t key : comp.s)
        out.push_back({static_cast<int>(static_cast<std::int32_t>(key >> 32)),
                       static_cast<int>(static_cast<std::int32_t>(key & 0xffffffffu))});
    return LatticeDomain::from_cells(n, out, u);
}

// --- geometric queries -------------------------------------------------------

namespace {

// refined interior vertices within `radius` of the polyline, with exact distances
std::vector<std::pair<int, double>> vertices_near_polyline(const RefinedGrid& g,
                                                           const std::vector<Point>& poly,
                                                           double radius) {
    std::vector<std::pair<int, double>> out;
    std::unordered_set<int> seen;
    double h = g.h();
    for (std::size_t s = 1; s < poly.size(); ++s) {
        Point p = poly[s - 1], q = poly[s];
        int alo = static_cast<int>(std::floor((std::min(p.x, q.x) - radius) / h)) - 1;
        int ahi = static_cast<int>(std::ceil((std::max(p.x, q.x) + radius) / h)) + 1;
        int blo = static_cast<int>(std::floor((std::min(p.y, q.y) - radius) / h)) - 1;
        int bhi = static_cast<int>(std::ceil((std::max(p.y, q.y) + radius) / h)) + 1;
        for (int a = alo; a <= ahi; ++a) {
            for (int b = blo; b <= bhi; ++b) {
                if (!g.interior(a, b)) continue;
                int idx = g.index(a, b);
                if (seen.count(idx)) continue;
                double d = dist_point_segment(g.point(a, b), p, q);
                if (d <= radius) {
                    seen.insert(idx);
                    out.push_back({idx, d});
                }
            }
        }
    }
    return out;
}

std::vector<std::pair<int, double>> seeds_around(const RefinedGrid& g, Point z) {
    std::vector<std::pair<int, double>> seeds;
    int a = 0, b = 0;
    if (!g.nearest_interior(z, a, b, 2)) return seeds;
    for (int da = -1; da <= 1; ++da)
        for (int db = -1; db <= 1; ++db)
            if (g.interior(a + da, b + db))
                seeds.push_back({g.index(a + da, b + db), dist(z, g.point(a + da, b + db))});
    return seeds;
}

} // namespace

double interior_distance(const LatticeDomain& dom, Point z, const CrossCut& target) {
    if (!dom.is_interior(z)) throw invalid_input("interior_distance: z outside the domain");
    if (target.polyline.size() < 2)
        throw invalid_input("interior_distance: degenerate cross cut");
    const RefinedGrid& g = dom.refined();
    double dz = dist_point_polyline(z, target.polyline);
    if (dz <= 1.5 * g.h()) return dz;

    auto seeds = seeds_around(g, z);
    if (seeds.empty()) throw invalid_input("interior_distance: z has no refined vertex");
    std::vector<double> d = g.dijkstra(seeds);
    double best = kInf;
    for (auto [idx, dcut] : vertices_near_polyline(g, target.polyline, 1.2 * g.h()))
        best = std::min(best, d[idx] + dcut);
    if (!std::isfinite(best)) throw not_found("interior_distance: target unreachable from z");
    return best;
}

std::vector<CrossCut> circle_components(const LatticeDomain& dom, Point z, double r) {
    if (!(r > 0)) throw invalid_input("circle_components: r must be positive");
    const std::vector<Point>& loop = dom.boundary_loop();
    std::vector<double> angles;
    for (std::size_t i = 1; i < loop.size(); ++i) {
        double ts[2];
        int k = circle_segment_intersections(z, r, loop[i - 1], loop[i], ts);
        for (int t = 0; t < k; ++t) {
            Point p = loop[i - 1] + ts[t] * (loop[i] - loop[i - 1]);
            angles.push_back(std::atan2(p.y - z.y, p.x - z.x));
        }
    }
    const RefinedGrid& g = dom.refined();
    double step = std::min(0.2, g.h() / (2.0 * r));
    std::vector<CrossCut> out;
    auto sample_arc = [&](double th0, double th1, bool closed) {
        if (th1 <= th0) th1 += 2 * M_PI;
        int nv = std::max(8, static_cast<int>(std::ceil((th1 - th0) / step)));
        CrossCut cc;
        cc.closed = closed;
        cc.polyline.reserve(nv + 1);
        for (int s = 0; s <= nv; ++s) {
            double th = th0 + (th1 - th0) * s / nv;
            cc.polyline.push_back({z.x + r * std::cos(th), z.y + r * std::sin(th)});
        }
        return cc;
    };
    if (angles.empty()) {
        Point probe{z.x + r, z.y};
        if (dom.is_interior(probe)) out.push_back(sample_arc(0, 2 * M_PI, true));
        return out;
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 angles.end());
    std::size_t na = angles.size();
    for (std::size_t i = 0; i < na; ++i) {
        double th0 = angles[i];
        double th1 = i + 1 < na ? angles[i + 1] : angles[0] + 2 * M_PI;
        if (th1 - th0 < 1e-12) continue;
        double thm = 0.5 * (th0 + th1);
        Point mid{z.x + r * std::cos(thm), z.y + r * std::sin(thm)};
        if (dom.is_interior(mid)) out.push_back(sample_arc(th0, th1, false));
    }
    return out;
}

CrossCut innermost_disconnecting(const LatticeDomain& dom, Point z, double r, Point u) {
    if (!dom.is_interior(z) || !dom.is_interior(u))
        throw invalid_input("innermost_disconnecting: z and u must be interior");
    if (r >= dist(z, u))
        throw invalid_input("innermost_disconnecting: r must be smaller than d(z, u)");
    std::vector<CrossCut> comps = circle_components(dom, z, r);
    if (comps.empty()) throw not_found("innermost_disconnecting: circle misses the domain");

    const RefinedGrid& g = dom.refined();
    int ua = 0, ub = 0, za = 0, zb = 0;
    if (!g.nearest_interior(u, ua, ub) || !g.nearest_interior(z, za, zb))
        throw invalid_input("innermost_disconnecting: endpoints without refined vertices");
    int uidx = g.index(ua, ub), zidx = g.index(za, zb);

    std::vector<std::size_t> separating;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        RefinedGrid::Walls walls(g, {comps[c].polyline});
        std::vector<char> reach = g.flood(uidx, &walls);
        if (!reach[zidx]) separating.push_back(c);
    }
    if (separating.empty())
        throw not_found("innermost_disconnecting: no separating component");
    if (separating.size() == 1) return comps[separating[0]];

    // remove all separating components; the innermost is adjacent to z's region
    std::vector<std::vector<Point>> all;
    for (std::size_t c : separating) all.push_back(comps[c].polyline);
    RefinedGrid::Walls walls(g, all);
    std::vector<char> zreach = g.flood(zidx, &walls);
    double best_dist = kInf;
    std::size_t best = separating[0];
    for (std::size_t c : separating) {
        bool adjacent = false;
        for (auto [idx, d] : vertices_near_polyline(g, comps[c].polyline, 1.2 * g.h()))
            if (zreach[idx]) {
                adjacent = true;
                break;
            }
        if (!adjacent) continue;
        double d = interior_distance(dom, z, comps[c]);
        if (d < best_dist) {
            best_dist = d;
            best = c;
        }
    }
    if (!std::isfinite(best_dist))
        throw not_found("innermost_disconnecting: no component adjacent to z");
    return comps[best];
}

bool is_close_approximation(const LatticeDomain& dom_n, GridEdge a_n,
                            const std::vector<Point>& limit_polygon, Point a, double r,
                            Point w_r) {
    (void)limit_polygon; // preconditions on the limit domain are the caller's
    if (!(r > 0)) throw invalid_input("is_close_approximation: r must be positive");
    if (dist(a_n.midpoint(dom_n.n()), a) > r)
        throw invalid_input("is_close_approximation: a_n not within r of a");
    if (dist(w_r, a) > r) throw invalid_input("is_close_approximation: w_r not in B(a, r)");
    if (!dom_n.is_interior(w_r)) return false;

    const RefinedGrid& g = dom_n.refined();
    Point seed_pt = a_n.midpoint(dom_n.n()) + (0.6 * g.h()) * a_n.inward_normal();
    int sa = 0, sb = 0, wa = 0, wb = 0;
    if (!g.nearest_interior(seed_pt, sa, sb) || !g.nearest_interior(w_r, wa, wb)) return false;

    // BFS restricted to the open ball B(a, r)
    std::vector<char> seen(g.vertex_count(), 0);
    auto inside_ball = [&](int aa, int bb) { return dist(g.point(aa, bb), a) < r; };
    if (!inside_ball(sa, sb)) return false;
    std::vector<std::pair<int, int>> stack{{sa, sb}};
    seen[g.index(sa, sb)] = 1;
    static const int da[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int db[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!stack.empty()) {
        auto [aa, bb] = stack.back();
        stack.pop_back();
        for (int mdir = 0; mdir < 8; ++mdir) {
            int a2 = aa + da[mdir], b2 = bb + db[mdir];
            if (!g.interior(a2, b2) || !inside_ball(a2, b2)) continue;
            if (mdir >= 4 && !g.square_in_domain(std::min(aa, a2), std::min(bb, b2)))
                continue;
            int ni = g.index(a2, b2);
            if (seen[ni]) continue;
            seen[ni] = 1;
            stack.push_back({a2, b2});
        }
    }
    return seen[g.index(wa, wb)] != 0;
}

// --- fjords ------------------------------------------------------------------

namespace {

// Euclidean distance to the boundary loop, resolved only up to maxdist
// (vertices farther away stay at +inf)
std::vector<double> boundary_distance_field(const LatticeDomain& dom, double maxdist) {
    const RefinedGrid& g = dom.refined();
    std::vector<double> field(g.vertex_count(), kInf);
    const std::vector<Point>& loop = dom.boundary_loop();
    std::vector<Point> seg(2);
    for (std::size_t s = 1; s < loop.size(); ++s) {
        seg[0] = loop[s - 1];
        seg[1] = loop[s];
        for (auto [idx, d] : vertices_near_polyline(g, seg, maxdist))
            field[idx] = std::min(field[idx], d);
    }
    return field;
}

Point nearest_boundary_point(const LatticeDomain& dom, Point p) {
    const std::vector<Point>& loop = dom.boundary_loop();
    double best = kInf;
    Point out = loop.front();
    for (std::size_t i = 1; i < loop.size(); ++i) {
        Point c = closest_point_segment(p, loop[i - 1], loop[i]);
        double d2 = norm2(p - c);
        if (d2 < best) {
            best = d2;
            out = c;
        }
    }
    return out;
}

} // namespace

std::vector<Fjord> build_fjords(const LatticeDomain& dom, Point u, double delta, double C) {
    if (!(delta > 0) || !(C > 0))
        throw invalid_input("build_fjords: delta and C must be positive");
    if (!dom.is_interior(u)) throw invalid_input("build_fjords: u must be interior");
    const RefinedGrid& g = dom.refined();
    const double thr = (C + 1.0) * delta;
    const double s = C * delta;
    if (s < 2.0 * g.h())
        throw resolution_error("build_fjords: C*delta below the refined resolution");

    std::vector<double> bdist = boundary_distance_field(dom, thr + 4 * g.h());
    int ua = 0, ub = 0;
    if (!g.nearest_interior(u, ua, ub)) throw invalid_input("build_fjords: u not resolvable");
    int uidx = g.index(ua, ub);
    if (bdist[uidx] < thr)
        throw resolution_error("build_fjords: delta too large, u is outside the interior region");

    // component G of the (C+1)delta-interior containing u
    std::vector<char> gmask(g.vertex_count(), 0);
    {
        std::vector<int> stack{uidx};
        gmask[uidx] = 1;
        static const int da[8] = {1, -1, 0, 0, 1, 1, -1, -1};
        static const int db[8] = {0, 0, 1, -1, 1, -1, 1, -1};
        while (!stack.empty()) {
            int idx = stack.back();
            stack.pop_back();
            int a = g.a0() + idx % g.width(), b = g.b0() + idx / g.width();
            for (int mdir = 0; mdir < 8; ++mdir) {
                int aa = a + da[mdir], bb = b + db[mdir];
                if (!g.interior(aa, bb)) continue;
                if (mdir >= 4 && !g.square_in_domain(std::min(a, aa), std::min(b, bb)))
                    continue;
                int ni = g.index(aa, bb);
                if (gmask[ni] || bdist[ni] < thr) continue;
                gmask[ni] = 1;
                stack.push_back(ni);
            }
        }
    }

    // admissible squares of the (C delta) grid: fully inside G
    auto square_admissible = [&](int I, int J) {
        int alo = static_cast<int>(std::ceil(I * s / g.h() - 1e-9));
        int ahi = static_cast<int>(std::floor((I + 1) * s / g.h() + 1e-9));
        int blo = static_cast<int>(std::ceil(J * s / g.h() - 1e-9));
        int bhi = static_cast<int>(std::floor((J + 1) * s / g.h() + 1e-9));
        if (alo > ahi || blo > bhi) return false;
        for (int a = alo; a <= ahi; ++a)
            for (int b = blo; b <= bhi; ++b)
                if (!g.interior(a, b) || !gmask[g.index(a, b)]) return false;
        return true;
    };

    int uI = static_cast<int>(std::floor(u.x / s));
    int uJ = static_cast<int>(std::floor(u.y / s));
    if (!square_admissible(uI, uJ))
        throw resolution_error("build_fjords: delta too large, no grid square around u");

    IntSet sq;
    std::vector<CellIdx> stack{{uI, uJ}};
    sq.add(uI, uJ);
    int sImin = uI, sImax = uI, sJmin = uJ, sJmax = uJ;
    while (!stack.empty()) {
        CellIdx c = stack.back();
        stack.pop_back();
        sImin = std::min(sImin, c.i);
        sImax = std::max(sImax, c.i);
        sJmin = std::min(sJmin, c.j);
        sJmax = std::max(sJmax, c.j);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int mdir = 0; mdir < 4; ++mdir) {
            int ii = c.i + di[mdir], jj = c.j + dj[mdir];
            if (sq.has(ii, jj) || !square_admissible(ii, jj)) continue;
            sq.add(ii, jj);
            stack.push_back({ii, jj});
        }
    }
    // fill holes of the square component
    {
        int w = sImax - sImin + 3, h = sJmax - sJmin + 3;
        auto off = [&](int i, int j) {
            return static_cast<std::size_t>((j - (sJmin - 1)) * w + (i - (sImin - 1)));
        };
        std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
        std::vector<std::pair<int, int>> st{{sImin - 1, sJmin - 1}};
        seen[off(sImin - 1, sJmin - 1)] = 1;
        while (!st.empty()) {
            auto [i, j] = st.back();
            st.pop_back();
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int mdir = 0; mdir < 4; ++mdir) {
                int ii = i + di[mdir], jj = j + dj[mdir];
                if (ii < sImin - 1 || ii > sImax + 1 || jj < sJmin - 1 || jj > sJmax + 1)
                    continue;
                if (sq.has(ii, jj) || seen[off(ii, jj)]) continue;
                seen[off(ii, jj)] = 1;
                st.push_back({ii, jj});
            }
        }
        for (int i = sImin; i <= sImax; ++i)
            for (int j = sJmin; j <= sJmax; ++j)
                if (!sq.has(i, j) && !seen[off(i, j)]) sq.add(i, j);
    }

    // the loop eta on the (C delta) grid, then the red cuts: walk each
    // adjacent outside square's boundary away from eta until the interior
    // region is left, and connect the exit to the nearest boundary point
    TracedBoundary eta = trace_cell_boundary(sq, sImin, sImax, sJmin, sJmax);
    std::vector<std::vector<Point>> red;
    auto sp = [&](int x, int y) { return Point{x * s, y * s}; };
    for (std::size_t e = 0; e + 1 < eta.verts.size(); ++e)
        red.push_back({sp(eta.verts[e].first, eta.verts[e].second),
                       sp(eta.verts[e + 1].first, eta.verts[e + 1].second)});

    IntSet done;
    for (const GridEdge& ge : eta.edges) {
        int qi = ge.i, qj = ge.j;
        switch (ge.dir) { // the square on the far side of this eta edge
            case 'S': qj -= 1; break;
            case 'E': qi += 1; break;
            case 'N': qj += 1; break;
            case 'W': qi -= 1; break;
            default: break;
        }
        if (sq.has(qi, qj) || done.has(qi, qj)) continue;
        done.add(qi, qj);
        Point corner[4] = {sp(qi, qj), sp(qi + 1, qj), sp(qi + 1, qj + 1), sp(qi, qj + 1)};
        GridEdge shared{qi, qj,
                        ge.dir == 'S' ? 'N' : ge.dir == 'E' ? 'W' : ge.dir == 'N' ? 'S' : 'E'};
        int ex0, ey0, ex1, ey1;
        shared.endpoints(ex0, ey0, ex1, ey1);
        Point pa = sp(ex0, ey0), pb = sp(ex1, ey1);
        int start = -1;
        for (int c = 0; c < 4; ++c)
            if (dist(corner[c], pa) < 1e-12) start = c;
        if (start < 0) continue;
        bool forward = dist(corner[(start + 1) % 4], pb) > 1e-12;
        std::vector<Point> cyc(4);
        for (int c = 0; c < 4; ++c) cyc[c] = corner[mod_pos(start + (forward ? c : -c), 4)];
        // cyc starts at pa and walks away from pb around the square
        auto walk_until_exit = [&](const std::vector<Point>& path) {
            std::vector<Point> piece{path[0]};
            double step = g.h() / 2;
            for (std::size_t v = 1; v < path.size(); ++v) {
                Point p0 = path[v - 1], p1 = path[v];
                int mm = std::max(1, static_cast<int>(std::ceil(dist(p0, p1) / step)));
                for (int t = 1; t <= mm; ++t) {
                    Point p = p0 + (static_cast<double>(t) / mm) * (p1 - p0);
                    piece.push_back(p);
                    if (dom.dist_to_boundary(p) < thr) return std::pair{piece, true};
                }
            }
            return std::pair{piece, false};
        };
        std::vector<Point> path_a(cyc.begin(), cyc.end());
        path_a.push_back(pb);
        auto [w1, hit1] = walk_until_exit(path_a);
        std::vector<Point> path_b{pb};
        for (int c = 3; c >= 0; --c) path_b.push_back(cyc[c]);
        auto [w2, hit2] = walk_until_exit(path_b);
        if (hit1) {
            w1.push_back(nearest_boundary_point(dom, w1.back()));
            red.push_back(std::move(w1));
        }
        if (hit2) {
            w2.push_back(nearest_boundary_point(dom, w2.back()));
            red.push_back(std::move(w2));
        }
    }

    // components of the domain minus the red set
    RefinedGrid::Walls walls(g, red);
    std::vector<int> comp(g.vertex_count(), -1);
    std::vector<char> ureach = g.flood(uidx, &walls);
    for (std::size_t i = 0; i < ureach.size(); ++i)
        if (ureach[i]) comp[i] = 0;
    int ncomp = 1;
    const std::vector<char>& mask = g.interior_mask();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i] || comp[i] >= 0) continue;
        std::vector<char> reach = g.flood(static_cast<int>(i), &walls);
        bool any = false;
        for (std::size_t v = 0; v < reach.size(); ++v)
            if (reach[v]) {
                comp[v] = ncomp;
                any = true;
            }
        if (any) ++ncomp;
    }

    std::vector<Fjord> fjords(static_cast<std::size_t>(ncomp - 1));
    for (auto& f : fjords) f.reference = Fjord::Reference::u;
    for (CellIdx c : dom.cells()) {
        Point center{(c.i + 0.5) / dom.n(), (c.j + 0.5) / dom.n()};
        int a = 0, b = 0;
        if (!g.nearest_interior(center, a, b, 1)) continue;
        int cc = comp[g.index(a, b)];
        if (cc > 0) fjords[static_cast<std::size_t>(cc - 1)].cells.push_back(c);
    }
    std::vector<std::vector<std::pair<int, double>>> mouth_seeds(
        static_cast<std::size_t>(ncomp - 1));
    for (const auto& piece : red) {
        std::vector<char> touches(static_cast<std::size_t>(ncomp - 1), 0);
        for (auto [idx, d] : vertices_near_polyline(g, piece, 1.5 * g.h())) {
            int cc = comp[idx];
            if (cc > 0) {
                touches[static_cast<std::size_t>(cc - 1)] = 1;
                mouth_seeds[static_cast<std::size_t>(cc - 1)].push_back({idx, d});
            }
        }
        for (int f = 0; f < ncomp - 1; ++f)
            if (touches[static_cast<std::size_t>(f)])
                for (const Point& p : piece)
                    fjords[static_cast<std::size_t>(f)].mouth.polyline.push_back(p);
    }
    for (int f = 0; f < ncomp - 1; ++f) {
        std::vector<double> d = g.dijkstra(mouth_seeds[static_cast<std::size_t>(f)], &walls);
        double depth = 0;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (comp[i] == f + 1 && std::isfinite(d[i])) depth = std::max(depth, d[i]);
        fjords[static_cast<std::size_t>(f)].depth = depth;
    }
    std::vector<Fjord> out;
    for (auto& f : fjords)
        if (!f.mouth.polyline.empty()) out.push_back(std::move(f));
    return out;
}

// --- crossings ---------------------------------------------------------------

namespace {

std::pair<int, int> mark_seed(const LatticeDomain& dom, const GridEdge& e) {
    const RefinedGrid& g = dom.refined();
    Point p = e.midpoint(dom.n()) + (0.6 * g.h()) * e.inward_normal();
    int a = 0, b = 0;
    if (!g.nearest_interior(p, a, b))
        throw invalid_input("crossings: marked edge has no interior neighborhood");
    return {a, b};
}

// does removing `blocked` separate the marked edges (or the tip of the
// initial segment from b)?
bool region_disconnects(const LatticeDomain& dom, const std::vector<char>& blocked,
                        const std::vector<Point>* initial_segment) {
    const RefinedGrid& g = dom.refined();
    auto [ba, bb] = mark_seed(dom, dom.mark_b());
    int bidx = g.index(ba, bb);
    int aidx;
    std::unique_ptr<RefinedGrid::Walls> walls;
    if (initial_segment && initial_segment->size() >= 2) {
        walls = std::make_unique<RefinedGrid::Walls>(
            g, std::vector<std::vector<Point>>{*initial_segment});
        int ta = 0, tb = 0;
        if (!g.nearest_interior(initial_segment->back(), ta, tb))
            throw invalid_input("crossings: initial segment tip not resolvable");
        aidx = g.index(ta, tb);
    } else {
        auto [aa, ab] = mark_seed(dom, dom.mark_a());
        aidx = g.index(aa, ab);
    }
    if (blocked[static_cast<std::size_t>(aidx)] || blocked[static_cast<std::size_t>(bidx)])
        return true;
    std::vector<char> reach = g.flood(aidx, walls.get(), &blocked);
    return !reach[static_cast<std::size_t>(bidx)];
}

} // namespace

CrossingReport detect_unforced_crossings(const LatticeDomain& dom, const CurveClass& curve,
                                         const AnnulusQuery& query,
                                         const std::vector<Point>* initial_segment) {
    curve.validate();
    if (!(0 < query.r && query.r < query.R))
        throw invalid_input("crossings: need 0 < r < R");
    if (dom.dist_to_boundary(query.z) >= query.r)
        throw invalid_input("crossings: annulus not on the boundary");
    const RefinedGrid& g = dom.refined();

    // label components of the annulus intersected with the domain
    std::vector<int> label(g.vertex_count(), -1);
    std::unique_ptr<RefinedGrid::Walls> seg_walls;
    if (initial_segment && initial_segment->size() >= 2)
        seg_walls = std::make_unique<RefinedGrid::Walls>(
            g, std::vector<std::vector<Point>>{*initial_segment});
    auto in_annulus = [&](int a, int b) {
        double rho = dist(g.point(a, b), query.z);
        return rho > query.r && rho < query.R;
    };
    int ncomp = 0;
    const std::vector<char>& mask = g.interior_mask();
    static const int da[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int db[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i] || label[i] >= 0) continue;
        int a = g.a0() + static_cast<int>(i) % g.width();
        int b = g.b0() + static_cast<int>(i) / g.width();
        if (!in_annulus(a, b)) continue;
        std::vector<std::pair<int, int>> stack{{a, b}};
        label[i] = ncomp;
        while (!stack.empty()) {
            auto [aa, bb] = stack.back();
            stack.pop_back();
            for (int mdir = 0; mdir < 8; ++mdir) {
                int a2 = aa + da[mdir], b2 = bb + db[mdir];
                if (!g.interior(a2, b2) || !in_annulus(a2, b2)) continue;
                if (mdir >= 4 && !g.square_in_domain(std::min(aa, a2), std::min(bb, b2)))
                    continue;
                if (seg_walls && seg_walls->blocked(aa, bb, a2, b2)) continue;
                int ni = g.index(a2, b2);
                if (label[ni] >= 0) continue;
                label[ni] = ncomp;
                stack.push_back({a2, b2});
            }
        }
        ++ncomp;
    }

    std::vector<char> disconnects(static_cast<std::size_t>(std::max(ncomp, 1)), 0);
    for (int c = 0; c < ncomp; ++c) {
        std::vector<char> blocked(g.vertex_count(), 0);
        for (std::size_t i = 0; i < label.size(); ++i)
            if (label[i] == c) blocked[i] = 1;
        disconnects[static_cast<std::size_t>(c)] =
            region_disconnects(dom, blocked, initial_segment) ? 1 : 0;
    }

    // scan the curve: split the polyline at both circles, then track maximal
    // runs through the annulus
    struct Node {
        Point p;
        int region; // 0 inner, 1 annulus, 2 outer
        std::size_t seg;
    };
    auto region_of = [&](Point p) {
        double rho = dist(p, query.z);
        if (rho <= query.r) return 0;
        if (rho >= query.R) return 2;
        return 1;
    };
    std::vector<Node> nodes;
    const std::vector<Point>& v = curve.vertices;
    nodes.push_back({v[0], region_of(v[0]), 0});
    for (std::size_t i = 1; i < v.size(); ++i) {
        double cuts[4];
        int nc = 0;
        double ts[2];
        for (double rad : {query.r, query.R}) {
            int kk = circle_segment_intersections(query.z, rad, v[i - 1], v[i], ts);
            for (int t = 0; t < kk; ++t) cuts[nc++] = ts[t];
        }
        std::sort(cuts, cuts + nc);
        for (int c = 0; c < nc; ++c) {
            if (cuts[c] <= 1e-12 || cuts[c] >= 1 - 1e-12) continue;
            Point p = v[i - 1] + cuts[c] * (v[i] - v[i - 1]);
            double tnext = c + 1 < nc ? cuts[c + 1] : 1.0;
            Point probe = v[i - 1] + (0.5 * (cuts[c] + tnext)) * (v[i] - v[i - 1]);
            nodes.push_back({p, region_of(probe), i - 1});
        }
        nodes.push_back({v[i], region_of(v[i]), i - 1});
    }

    CrossingReport report;
    std::size_t run_start = 0;
    bool in_run = false;
    int enter_region = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        int reg = nodes[i].region;
        if (!in_run) {
            if (reg == 1) {
                in_run = true;
                run_start = i;
                enter_region = i > 0 ? nodes[i - 1].region : -1;
                if (enter_region == 1) enter_region = -1;
            }
        } else if (reg != 1) {
            if (enter_region >= 0 && reg != enter_region) {
                // identify the component from points strictly inside the run
                // (nodes themselves may sit exactly on the circles)
                int va = 0, vb = 0, compid = -1;
                for (std::size_t t = run_start; t < i && compid < 0; ++t) {
                    Point probe = 0.5 * (nodes[t].p + nodes[t + 1].p);
                    if (g.nearest_interior(probe, va, vb))
                        compid = label[static_cast<std::size_t>(g.index(va, vb))];
                }
                for (std::size_t t = run_start; t <= i && compid < 0; ++t)
                    if (g.nearest_interior(nodes[t].p, va, vb))
                        compid = label[static_cast<std::size_t>(g.index(va, vb))];
                CrossingEvent ev;
                ev.component = compid;
                ev.forced = compid >= 0 && disconnects[static_cast<std::size_t>(compid)];
                ev.seg_begin = nodes[run_start].seg;
                ev.seg_end = nodes[i].seg;
                report.events.push_back(ev);
                report.total += 1;
                if (!ev.forced) report.unforced += 1;
            }
            in_run = false;
        }
    }
    return report;
}

CrossingReport detect_unforced_crossings(const LatticeDomain& dom, const CurveClass& curve,
                                         const QuadQuery& query,
                                         const std::vector<Point>* initial_segment) {
    curve.validate();
    if (query.cells.empty() || query.s0.size() < 2 || query.s2.size() < 2)
        throw invalid_input("crossings: degenerate quadrilateral");
    for (CellIdx c : query.cells)
        if (!dom.has_cell(c.i, c.j))
            throw invalid_input("crossings: quadrilateral cell outside the domain");
    const RefinedGrid& g = dom.refined();
    for (const Point& p :
         {query.s0.front(), query.s0.back(), query.s2.front(), query.s2.back()})
        if (dom.dist_to_boundary(p) > 2.0 * g.h())
            throw invalid_input("crossings: quadrilateral sides must end on the boundary");

    IntSet qset;
    for (CellIdx c : query.cells) qset.add(c.i, c.j);
    auto in_quad = [&](Point p) {
        int ilo, ihi, jlo, jhi;
        covering_range(p.x * dom.n(), ilo, ihi);
        covering_range(p.y * dom.n(), jlo, jhi);
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j)
                if (qset.has(i, j)) return true;
        return false;
    };

    std::vector<char> blocked(g.vertex_count(), 0);
    const std::vector<char>& mask = g.interior_mask();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        int a = g.a0() + static_cast<int>(i) % g.width();
        int b = g.b0() + static_cast<int>(i) / g.width();
        if (in_quad(g.point(a, b))) blocked[i] = 1;
    }
    bool forced_side = region_disconnects(dom, blocked, initial_segment);

    // walk the curve densely so that quad entry/exit is seen regardless of
    // where the polyline vertices fall
    const double step = 0.45 * g.h();
    const double tol = 1.01 * g.h();
    std::vector<Point> pts;
    std::vector<std::size_t> segidx;
    const std::vector<Point>& v = curve.vertices;
    pts.push_back(v[0]);
    segidx.push_back(0);
    for (std::size_t i = 1; i < v.size(); ++i) {
        int mm = std::max(1, static_cast<int>(std::ceil(dist(v[i - 1], v[i]) / step)));
        for (int t = 1; t <= mm; ++t) {
            pts.push_back(v[i - 1] + (static_cast<double>(t) / mm) * (v[i] - v[i - 1]));
            segidx.push_back(i - 1);
        }
    }

    CrossingReport report;
    bool in_run = false;
    bool touched0 = false, touched2 = false;
    std::size_t run_start = 0;
    auto near_cut = [&](Point p, const std::vector<Point>& cut) {
        return dist_point_polyline(p, cut) <= tol;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool inside = in_quad(pts[i]);
        if (inside) {
            if (!in_run) {
                in_run = true;
                run_start = i;
                touched0 = touched2 = false;
            }
            if (near_cut(pts[i], query.s0)) touched0 = true;
            if (near_cut(pts[i], query.s2)) touched2 = true;
        }
        if ((!inside || i + 1 == pts.size()) && in_run) {
            if (touched0 && touched2) {
                CrossingEvent ev;
                ev.component = 0;
                ev.forced = forced_side;
                ev.seg_begin = segidx[run_start];
                ev.seg_end = segidx[i];
                report.events.push_back(ev);
                report.total += 1;
                if (!ev.forced) report.unforced += 1;
            }
            in_run = false;
        }
    }
    return report;
}

// --- quadrilateral modulus ---------------------------------------------------

double quad_modulus(const LatticeDomain& dom, const QuadQuery& quad, int refinement) {
    if (refinement < 1) throw invalid_input("quad_modulus: refinement must be >= 1");
    if (quad.cells.empty() || quad.s0.size() < 2 || quad.s2.size() < 2)
        throw invalid_input("quad_modulus: degenerate quadrilateral");
    for (CellIdx c : quad.cells)
        if (!dom.has_cell(c.i, c.j))
            throw invalid_input("quad_modulus: cell outside the domain");

    const int r = refinement;
    const double hs = 1.0 / (static_cast<double>(dom.n()) * r);
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> subs;
    for (CellIdx c : quad.cells)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                std::pair<int, int> key{c.i * r + a, c.j * r + b};
                id[key] = static_cast<int>(subs.size());
                subs.push_back(key);
            }
    const int N = static_cast<int>(subs.size());
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(N));
    std::vector<double> diag(static_cast<std::size_t>(N), 0),
        rhs(static_cast<std::size_t>(N), 0), ground(static_cast<std::size_t>(N), 0);
    auto face_mid = [&](int sa, int sb, int mdir) {
        double x = (sa + 0.5) * hs, y = (sb + 0.5) * hs;
        switch (mdir) {
            case 0: return Point{x + 0.5 * hs, y};
            case 1: return Point{x - 0.5 * hs, y};
            case 2: return Point{x, y + 0.5 * hs};
            default: return Point{x, y - 0.5 * hs};
        }
    };
    const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
    for (int c = 0; c < N; ++c) {
        auto [sa, sb] = subs[static_cast<std::size_t>(c)];
        for (int mdir = 0; mdir < 4; ++mdir) {
            auto it = id.find({sa + da[mdir], sb + db[mdir]});
            if (it != id.end()) {
                nbr[static_cast<std::size_t>(c)].push_back(it->second);
                diag[static_cast<std::size_t>(c)] += 1.0;
            } else {
                // boundary face of the region: contact if it sits on S0 or S2
                Point fm = face_mid(sa, sb, mdir);
                if (dist_point_polyline(fm, quad.s0) <= 0.26 * hs) {
                    diag[static_cast<std::size_t>(c)] += 2.0;
                    ground[static_cast<std::size_t>(c)] += 2.0;
                } else if (dist_point_polyline(fm, quad.s2) <= 0.26 * hs) {
                    diag[static_cast<std::size_t>(c)] += 2.0;
                    rhs[static_cast<std::size_t>(c)] += 2.0; // potential 1 on S2
                }
            }
        }
    }
    bool has0 = false, has2 = false;
    for (int c = 0; c < N; ++c) {
        if (ground[static_cast<std::size_t>(c)] > 0) has0 = true;
        if (rhs[static_cast<std::size_t>(c)] > 0) has2 = true;
    }
    if (!has0 || !has2) throw invalid_input("quad_modulus: S0 or S2 has no contact faces");

    // conjugate gradient on the grounded network Laplacian
    std::vector<double> x(static_cast<std::size_t>(N), 0.5), res(static_cast<std::size_t>(N)),
        p(static_cast<std::size_t>(N)), Ap(static_cast<std::size_t>(N));
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int c = 0; c < N; ++c) {
            double acc = diag[static_cast<std::size_t>(c)] * in[static_cast<std::size_t>(c)];
            for (int w : nbr[static_cast<std::size_t>(c)])
                acc -= in[static_cast<std::size_t>(w)];
            out[static_cast<std::size_t>(c)] = acc;
        }
    };
    apply(x, res);
    double rhs_norm = 0;
    for (int c = 0; c < N; ++c) {
        res[static_cast<std::size_t>(c)] =
            rhs[static_cast<std::size_t>(c)] - res[static_cast<std::size_t>(c)];
        rhs_norm += rhs[static_cast<std::size_t>(c)] * rhs[static_cast<std::size_t>(c)];
    }
    rhs_norm = std::sqrt(rhs_norm);
    p = res;
    double rr = 0;
    for (int c = 0; c < N; ++c)
        rr += res[static_cast<std::size_t>(c)] * res[static_cast<std::size_t>(c)];
    const double target = 1e-10 * std::max(1.0, rhs_norm);
    for (int it = 0; it < 40 * N + 200 && std::sqrt(rr) > target; ++it) {
        apply(p, Ap);
        double pAp = 0;
        for (int c = 0; c < N; ++c)
            pAp += p[static_cast<std::size_t>(c)] * Ap[static_cast<std::size_t>(c)];
        if (pAp <= 0) break;
        double alpha = rr / pAp;
        for (int c = 0; c < N; ++c) {
            x[static_cast<std::size_t>(c)] += alpha * p[static_cast<std::size_t>(c)];
            res[static_cast<std::size_t>(c)] -= alpha * Ap[static_cast<std::size_t>(c)];
        }
        double rr2 = 0;
        for (int c = 0; c < N; ++c)
            rr2 += res[static_cast<std::size_t>(c)] * res[static_cast<std::size_t>(c)];
        double beta = rr2 / rr;
        rr = rr2;
        for (int c = 0; c < N; ++c)
            p[static_cast<std::size_t>(c)] =
                res[static_cast<std::size_t>(c)] + beta * p[static_cast<std::size_t>(c)];
    }
    if (std::sqrt(rr) > 1e-6 * std::max(1.0, rhs_norm))
        throw numeric_failure("quad_modulus: conjugate gradient stalled");

    double current = 0;
    for (int c = 0; c < N; ++c)
        current += ground[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
    if (!(current > 0)) throw numeric_failure("quad_modulus: no current between the sides");
    return 1.0 / current;
}

} // namespace slelab
