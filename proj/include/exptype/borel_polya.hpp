#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "exptype/convex_geom.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/types.hpp"

namespace exptype {

// Principal part sum_k principal[k] / (xi - alpha)^{k+1}.
struct BorelPole {
    cplx alpha;
    std::vector<cplx> principal;
};

struct RationalBorel {
    std::vector<BorelPole> poles;
    bool is_zero() const noexcept { return poles.empty(); }
    std::vector<cplx> pole_locations() const;
};

RationalBorel borel_of_expsum(const ExpSum& f);

inline constexpr double default_pole_proximity = 1e-9;
// Throws domain error "borel_polya.near_pole" within `proximity` of a pole.
cplx borel_eval(const RationalBorel& B, cplx xi, double proximity = default_pole_proximity);

struct BorelSeriesValue {
    cplx value;
    double error_estimate;
    std::size_t terms_used;
};

// Partial sum of sum_n n! c_n / xi^{n+1}; requires |xi| > type_bound (1 + margin).
BorelSeriesValue borel_series_eval(const TaylorJet& jet, cplx xi, double margin = 0.2);

struct ContourNode {
    cplx point;
    // Quadrature weight for (1 / 2 pi i) * integral g(xi) d xi, so the integral
    // is approximated by sum weight * g(point).
    cplx weight;
};

// Closed integration path. Circles use the periodic trapezoid rule; polylines
// use composite Gauss-Legendre panels, at least `nodes` in total.
class Contour {
public:
    enum class Shape { circle, polyline };

    static Contour circle(cplx center, double radius, int nodes);
    static Contour polyline(std::vector<cplx> vertices, int nodes);

    Shape shape() const noexcept { return shape_; }
    cplx center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    const std::vector<cplx>& vertices() const noexcept { return vertices_; }
    int requested_nodes() const noexcept { return nodes_; }
    const std::vector<ContourNode>& nodes() const noexcept { return quad_; }

    // Discrete argument principle over the quadrature points and vertices.
    int winding_number(cplx p) const;
    double distance_to(cplx p) const;
    // Same contour with a different node budget.
    Contour with_nodes(int nodes) const;

private:
    Contour() = default;
    void build();

    Shape shape_ = Shape::circle;
    cplx center_ = 0.0;
    double radius_ = 0.0;
    std::vector<cplx> vertices_;
    int nodes_ = 0;
    std::vector<ContourNode> quad_;
    std::vector<cplx> trace_;
};

inline constexpr double default_clearance = 0.5;
inline constexpr int default_contour_nodes = 512;
// Coarser arcs than the geometric default keep the panel count proportional
// to the node budget.
inline constexpr double cycle_arc_step = 2.0 * pi / 32.0;

// Boundary of K inflated by `clearance`; a circle when K is a point or empty.
Contour make_cauchy_cycle(const ConvexPolygon& K, double clearance = default_clearance,
                          int nodes = default_contour_nodes);

// True when the contour winds once around every vertex of K.
bool encloses(const Contour& gamma, const ConvexPolygon& K);

// A Borel-side function with the hull of its singularities.
struct BorelFunction {
    std::function<cplx(cplx)> eval;
    ConvexPolygon singular_hull;

    static BorelFunction from_rational(RationalBorel B);
};

struct PolyaValue {
    cplx value;
    std::size_t nodes_used;
};

// f(z) = (1 / 2 pi i) contour integral of B(xi) e^{xi z}. Throws domain error
// "borel_polya.contour_winding" when gamma does not enclose B's singularities.
PolyaValue polya_reconstruct(const BorelFunction& B, const Contour& gamma, cplx z);

// Batch variant: B is sampled once on the contour and reused for every z.
std::vector<cplx> polya_reconstruct_many(const BorelFunction& B, const Contour& gamma,
                                         std::span<const cplx> zs, int jobs = 1);

// (1 / 2 pi i) contour integral of g, summed with compensation in node order.
cplx contour_integral(const Contour& gamma, const std::function<cplx(cplx)>& g);

}  // namespace exptype
