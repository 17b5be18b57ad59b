#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/geometry.hpp"

namespace slelab {

struct CellIdx {
    int i = 0;
    int j = 0;
};
inline bool operator==(CellIdx a, CellIdx b) { return a.i == b.i && a.j == b.j; }

// Directed boundary edge of cell (i, j) on side dir (N/E/S/W), oriented so
// that the domain lies on its left. Serves as the prime-end proxy.
struct GridEdge {
    int i = 0;
    int j = 0;
    char dir = 'S';

    // endpoints in lattice units (divide by n for plane coordinates)
    void endpoints(int& x0, int& y0, int& x1, int& y1) const;
    Point midpoint(int n) const;
    Point inward_normal() const;
};
bool operator==(const GridEdge& a, const GridEdge& b);

// Open Jordan arc inside the domain with endpoints on the boundary. Grid
// fjord mouths may consist of several contiguous pieces; `polyline` then
// stores the pieces back to back.
struct CrossCut {
    std::vector<Point> polyline;
    bool closed = false; // a full circle that misses the boundary
};

struct Fjord {
    enum class Reference { u, ab };
    CrossCut mouth;
    std::vector<CellIdx> cells;
    Reference reference = Reference::u;
    double depth = 0.0; // max interior distance from a fjord point to the mouth
};

struct AnnulusQuery {
    Point z;
    double r = 0;
    double R = 0;
};

struct QuadQuery {
    std::vector<CellIdx> cells;   // the quadrilateral region
    std::vector<Point> s0;        // one pair of opposite sides; the other
    std::vector<Point> s2;        // pair lies on the domain boundary
};

struct CrossingEvent {
    int component = 0;  // annulus component id (0 for quads)
    bool forced = false;
    std::size_t seg_begin = 0; // polyline segment span of the excursion
    std::size_t seg_end = 0;
};

struct CrossingReport {
    int total = 0;
    int unforced = 0;
    std::vector<CrossingEvent> events;
};

class RefinedGrid;

// Simply-connected union of closed grid cells at resolution 1/n with an
// interior base point and two marked boundary edges.
class LatticeDomain {
  public:
    LatticeDomain() = default;

    static LatticeDomain from_cells(int n, const std::vector<CellIdx>& cells, Point u);
    static LatticeDomain from_cells(int n, const std::vector<CellIdx>& cells, Point u,
                                    GridEdge a, GridEdge b);

    int n() const { return n_; }
    Point u() const { return u_; }
    GridEdge mark_a() const { return a_; }
    GridEdge mark_b() const { return b_; }
    std::size_t cell_count() const { return cells_.size(); }
    std::vector<CellIdx> cells() const;

    bool has_cell(int i, int j) const;
    // strict membership in the open domain
    bool is_interior(Point p) const;
    // boundary loop as a closed polyline (last vertex = first)
    const std::vector<Point>& boundary_loop() const { return loop_; }
    // boundary edges in loop order
    const std::vector<GridEdge>& boundary_edges() const { return edges_; }
    double dist_to_boundary(Point p) const;

    // re-mark using the boundary edges nearest to the given points
    LatticeDomain with_marks_near(Point pa, Point pb) const;
    GridEdge nearest_boundary_edge(Point p) const;

    const RefinedGrid& refined() const { return *refined_; }

    void validate() const;

  private:
    friend LatticeDomain approximate_domain(const std::vector<Point>&, Point, int);
    void finalize();

    int n_ = 1;
    std::unordered_set<std::uint64_t> cells_;
    Point u_;
    GridEdge a_, b_;
    std::vector<Point> loop_;
    std::vector<GridEdge> edges_;
    int imin_ = 0, imax_ = -1, jmin_ = 0, jmax_ = -1;
    std::shared_ptr<RefinedGrid> refined_;
};

// The domain bounded by the simple grid loop inside the polygon that encloses
// u with a maximal number of cells (equivalently: the connected component,
// containing u, of the cells entirely inside the closed polygon).
LatticeDomain approximate_domain(const std::vector<Point>& polygon, Point u, int n);

// Shortest-path length inside the open domain from z to the cross cut,
// computed on the refined 8-neighbor grid graph.
double interior_distance(const LatticeDomain& dom, Point z, const CrossCut& target);

// Connected components of the circle S(z, r) intersected with the open
// domain, as polyline cross cuts.
std::vector<CrossCut> circle_components(const LatticeDomain& dom, Point z, double r);

// The component of S(z, r) in the domain that separates z from u and is
// innermost (disconnects every other separating component from z).
CrossCut innermost_disconnecting(const LatticeDomain& dom, Point z, double r, Point u);

// Grid fjord construction: loop on the (C delta)-grid inside the (C+1)delta
// interior around u; everything outside the loop interior is cut into
// disjoint fjords with mouths of diameter at most 6 C delta.
std::vector<Fjord> build_fjords(const LatticeDomain& dom, Point u, double delta, double C);

// True iff the marked edge a_n is connected to w_r inside dom_n intersected
// with the ball B(a, r).
bool is_close_approximation(const LatticeDomain& dom_n, GridEdge a_n,
                            const std::vector<Point>& limit_polygon, Point a, double r,
                            Point w_r);

// Count maximal excursions of the curve across the annulus (or from S0 to S2
// through the quadrilateral), each classified forced/unforced by whether the
// component it crosses disconnects the marked edges. The optional initial
// segment is removed from the domain; the disconnection test then runs from
// its tip.
CrossingReport detect_unforced_crossings(const LatticeDomain& dom, const CurveClass& curve,
                                         const AnnulusQuery& query,
                                         const std::vector<Point>* initial_segment = nullptr);
CrossingReport detect_unforced_crossings(const LatticeDomain& dom, const CurveClass& curve,
                                         const QuadQuery& query,
                                         const std::vector<Point>* initial_segment = nullptr);

// Modulus m(Q) via discrete extremal length: effective resistance of the
// refined unit-conductance cell network between S0 and S2 with the other two
// sides insulated. refinement = subcells per lattice cell side.
double quad_modulus(const LatticeDomain& dom, const QuadQuery& quad, int refinement);

// --- refined grid graph -----------------------------------------------------

// Vertex graph at spacing 1/(n k) over the domain bounding box; vertices are
// marked interior when they lie in the open domain. Supports Dijkstra and
// flood fill with polyline walls. All query scratch is caller-owned.
class RefinedGrid {
  public:
    static constexpr int kFactor = 4;

    RefinedGrid(const LatticeDomain& dom, int k = kFactor);

    double h() const { return h_; }
    int width() const { return W_; }
    int height() const { return H_; }
    std::size_t vertex_count() const { return interior_.size(); }

    int index(int a, int b) const { return (b - b0_) * W_ + (a - a0_); }
    bool in_bounds(int a, int b) const {
        return a >= a0_ && a < a0_ + W_ && b >= b0_ && b < b0_ + H_;
    }
    bool interior(int a, int b) const {
        return in_bounds(a, b) && interior_[static_cast<std::size_t>(index(a, b))];
    }
    Point point(int a, int b) const { return {a * h_, b * h_}; }

    // nearest interior vertex to p (searching outward); -1,-1 if none nearby
    bool nearest_interior(Point p, int& a, int& b, int max_ring = 4) const;

    // refined square [a,a+1]x[b,b+1] lies inside a domain cell (diagonal moves)
    bool square_in_domain(int a, int b) const;

    // Walls: polylines whose crossing edges are blocked.
    struct Walls {
        Walls(const RefinedGrid& g, const std::vector<std::vector<Point>>& polylines);
        bool blocked(int a0, int b0, int a1, int b1) const;
        const RefinedGrid& grid;
        double h;
        int bins_w, bins_h, bin_a0, bin_b0;
        std::vector<std::vector<std::pair<Point, Point>>> bins;
    };

    // Multi-source Dijkstra; sources given as (vertex index, initial cost).
    // Returns dist array (infinity where unreached).
    std::vector<double> dijkstra(const std::vector<std::pair<int, double>>& sources,
                                 const Walls* walls = nullptr) const;

    // BFS flood fill; returns component mask (true = reached).
    std::vector<char> flood(int start_index, const Walls* walls = nullptr,
                            const std::vector<char>* blocked_vertices = nullptr) const;

    // The cell of the lattice domain a vertex belongs to is implicit; expose
    // the raw interior mask for component labeling.
    const std::vector<char>& interior_mask() const { return interior_; }
    int a0() const { return a0_; }
    int b0() const { return b0_; }
    int k() const { return k_; }

  private:
    int k_;
    int n_;
    int a0_, b0_, W_, H_;
    double h_;
    std::vector<char> interior_;
    std::vector<char> squares_;
};

} // namespace slelab
