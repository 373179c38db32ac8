#pragma once

#include <span>
#include <utility>
#include <vector>

#include "exptype/types.hpp"

namespace exptype {

// Compact convex set in the plane, stored as a counter-clockwise vertex list
// with no three consecutive collinear vertices. Zero vertices is the empty
// set, one vertex a point, two vertices a segment.
class ConvexPolygon {
public:
    ConvexPolygon() = default;

    // Builds the hull of arbitrary points; this is the only way to obtain a
    // polygon, so the vertex invariants always hold.
    static ConvexPolygon hull(std::span<const cplx> points);
    static ConvexPolygon point(cplx p) { return hull(std::span<const cplx>(&p, 1)); }
    static ConvexPolygon segment(cplx a, cplx b);

    const std::vector<cplx>& vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    bool empty() const noexcept { return vertices_.empty(); }
    bool is_point() const noexcept { return vertices_.size() == 1; }
    bool is_segment() const noexcept { return vertices_.size() == 2; }
    bool has_area() const noexcept { return vertices_.size() >= 3; }

    double signed_area() const;
    double perimeter() const;
    // Vertex average for degenerate sets, area centroid otherwise.
    cplx centroid() const;
    double max_modulus() const;

    ConvexPolygon translated(cplx offset) const;
    // Euclidean distance from p to the set; 0 inside.
    double distance_to(cplx p) const;
    bool contains(cplx p, double tol = 1e-12) const { return distance_to(p) <= tol; }

    friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;

private:
    explicit ConvexPolygon(std::vector<cplx> v) : vertices_(std::move(v)) {}
    std::vector<cplx> vertices_;
};

ConvexPolygon convex_hull(std::span<const cplx> points);

// H_K(z) = max over u in K of Re(z u). Throws domain error for the empty set.
double support_function(const ConvexPolygon& K, cplx z);

// Polygonal approximation of K + r * closed unit disk. Corner arcs are sampled
// with vertices on the exact arcs and angular step at most max_arc_step, so
// H_K + r|z| * cos(max_arc_step / 2) <= H_result <= H_K + r|z|.
inline constexpr double default_arc_step = 2.0 * pi / 256.0;
ConvexPolygon minkowski_inflate(const ConvexPolygon& K, double r,
                                double max_arc_step = default_arc_step);

// Support-function sup metric over a uniform theta grid; equals the Hausdorff
// distance for convex bodies up to grid resolution.
double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b,
                          int theta_nodes = 1024);

struct SupportSample {
    double theta;
    double h;
};

struct SupportReconstruction {
    ConvexPolygon polygon;
    bool feasible = true;
};

// Intersection of the half-planes {u : Re(e^{i theta} u) <= h(theta)}.
// Infeasible systems (empty intersection) return feasible = false.
SupportReconstruction polygon_from_support_samples(std::span<const SupportSample> samples,
                                                   double tol = 1e-10);

using Polyline = std::vector<cplx>;

struct OriginDistance {
    double value;
    cplx nearest;
    bool empty = false;  // value is +inf when set
};

OriginDistance dist_origin(std::span<const cplx> points);
// Points are projected onto every polyline segment, not just vertices.
OriginDistance dist_origin(std::span<const Polyline> polylines);

// Closest point to p on the segment [a, b].
cplx project_to_segment(cplx p, cplx a, cplx b);

}  // namespace exptype
