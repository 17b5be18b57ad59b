#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/geometry.hpp"
#include "slelab/lattice.hpp"

namespace slelab {

// Mobius map z -> (az + b)/(cz + d).
struct Mobius {
    Complex a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

    Complex operator()(Complex z) const;
    Mobius inverse() const;
    static Mobius compose(const Mobius& f, const Mobius& g); // f after g
    // disc automorphism z -> rot * (z - p)/(1 - conj(p) z)
    static Mobius disc_automorphism(Complex p, Complex rot);
};

struct BoundaryEntry {
    GridEdge edge;
    Point point;  // edge midpoint on the boundary
    double angle; // angle of its image on the unit circle
};

// One step of the geodesic zipper: a Mobius z -> z/(1 - z/c) followed by the
// vertical-slit opening sqrt(w^2 + d^2).
struct GeodesicStep {
    double c = 0;
    double d = 0;
    bool has_mobius = true;
};

// Numerically represented Riemann map from a lattice domain onto the unit
// disc: a composition of elementary slit maps from the boundary vertex list,
// a final Mobius normalization, and a monotone boundary table.
class ConformalMap {
  public:
    enum class Normalization { at_u, boundary };

    Complex map(Complex z) const;     // domain -> disc
    Complex inverse(Complex w) const; // disc -> domain, |w| < 1
    Point map_point(Point z) const { return Point(map(z.cplx())); }
    Point inverse_point(Point w) const { return Point(inverse(w.cplx())); }

    const LatticeDomain& domain() const { return dom_; }
    Normalization normalization() const { return norm_; }
    const std::vector<BoundaryEntry>& boundary_table() const { return table_; }
    // angle of a marked boundary edge (throws not_found if absent)
    double boundary_angle(const GridEdge& e) const;

    void save(const std::string& path) const;
    static ConformalMap load(const LatticeDomain& dom, const std::string& path);

  private:
    friend ConformalMap uniformize(const LatticeDomain&, double);
    friend ConformalMap boundary_normalized(const ConformalMap&, GridEdge, GridEdge);

    struct Core;
    std::shared_ptr<const Core> core_;
    Mobius post_; // disc automorphism applied after the core map
    Normalization norm_ = Normalization::at_u;
    std::vector<BoundaryEntry> table_;
    LatticeDomain dom_;
};

// Riemann uniformization of the domain onto the disc with phi(u) = 0 and
// arg phi'(u) = 0 (within tol), built by unzipping the boundary vertex and
// midpoint list with geodesic slit maps.
ConformalMap uniformize(const LatticeDomain& dom, double tol = 1e-6);

// Compose with the disc automorphism sending a -> -1 and b -> 1; the third
// degree of freedom maps the closest-to-center point of the hyperbolic
// geodesic between the marks to 0.
ConformalMap boundary_normalized(const ConformalMap& map, GridEdge a, GridEdge b);

// P_eps(z) = z/|z| * min(1 - eps, |z|).
Complex radial_projection(Complex z, double eps);

// phi^{-1}(P_eps(phi(z))); boundary points are resolved through the boundary
// table (or by radial-limit extrapolation along the interpolated angle).
Point domain_projection(const ConformalMap& map, Point z, double eps);

// Image of the radial segment {t e^{i theta} : t in [p, q]} under phi^{-1}.
ParamCurve conformal_ray(const ConformalMap& map, double theta, double p, double q,
                         int npts);

// sup over a grid x grid sample of B(0, radius) of |inv_n - inv_limit|.
double caratheodory_sup_error(const ConformalMap& map_n, const ConformalMap& map_limit,
                              double radius, int grid);
double caratheodory_sup_error(const std::function<Complex(Complex)>& inv_n,
                              const std::function<Complex(Complex)>& inv_limit,
                              double radius, int grid);

// Check that the innermost disconnecting arc of S(z, C delta) at the ray
// point z = phi^{-1}((1-eps)e^{i theta}) separates the whole ray tail from u.
// Returns false (not an error) when the separation fails, e.g. for C chosen
// below the working constant.
bool verify_ray_in_fjord(const ConformalMap& map, const LatticeDomain& dom, double theta,
                         double eps, double delta, double C);

} // namespace slelab
