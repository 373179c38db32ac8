#include "exptype/convex_geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exptype/error.hpp"

namespace exptype {

namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Orientation of (o, a, b) with near-collinear triples snapped to zero.
double turn(cplx o, cplx a, cplx b) {
    const cplx u = a - o;
    const cplx v = b - o;
    const double c = cross(u, v);
    if (std::abs(c) <= 1e-12 * std::abs(u) * std::abs(v)) return 0.0;
    return c;
}

bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

}  // namespace

ConvexPolygon ConvexPolygon::hull(std::span<const cplx> points) {
    std::vector<cplx> pts;
    pts.reserve(points.size());
    double scale = 0.0;
    for (cplx p : points) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw_domain("convex_geom.non_finite", "hull input contains a non-finite point");
        pts.push_back(p);
        scale = std::max(scale, std::abs(p));
    }
    if (pts.empty()) return ConvexPolygon{};

    std::sort(pts.begin(), pts.end(), lex_less);
    const double dup_eps = 1e-12 * (1.0 + scale);
    std::vector<cplx> uniq;
    uniq.reserve(pts.size());
    for (cplx p : pts) {
        if (uniq.empty() || std::abs(p - uniq.back()) > dup_eps) uniq.push_back(p);
    }
    if (uniq.size() == 1) return ConvexPolygon{std::move(uniq)};

    std::vector<cplx> h;
    h.reserve(2 * uniq.size());
    for (cplx p : uniq) {
        while (h.size() >= 2 && turn(h[h.size() - 2], h.back(), p) <= 0.0) h.pop_back();
        h.push_back(p);
    }
    const std::size_t lower = h.size() + 1;
    for (auto it = uniq.rbegin() + 1; it != uniq.rend(); ++it) {
        while (h.size() >= lower && turn(h[h.size() - 2], h.back(), *it) <= 0.0) h.pop_back();
        h.push_back(*it);
    }
    h.pop_back();
    // Coincident-but-not-merged endpoints can survive the chain; drop them.
    std::vector<cplx> out;
    out.reserve(h.size());
    for (cplx p : h) {
        if (out.empty() || std::abs(p - out.back()) > dup_eps) out.push_back(p);
    }
    while (out.size() > 1 && std::abs(out.front() - out.back()) <= dup_eps) out.pop_back();
    return ConvexPolygon{std::move(out)};
}

ConvexPolygon ConvexPolygon::segment(cplx a, cplx b) {
    const cplx pts[2] = {a, b};
    return hull(pts);
}

double ConvexPolygon::signed_area() const {
    if (vertices_.size() < 3) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        s += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    return 0.5 * s;
}

double ConvexPolygon::perimeter() const {
    if (vertices_.size() < 2) return 0.0;
    if (vertices_.size() == 2) return 2.0 * std::abs(vertices_[1] - vertices_[0]);
    double s = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        s += std::abs(vertices_[(i + 1) % vertices_.size()] - vertices_[i]);
    return s;
}

cplx ConvexPolygon::centroid() const {
    if (vertices_.empty()) throw_domain("convex_geom.empty_set", "centroid of the empty set");
    const double area = signed_area();
    if (vertices_.size() < 3 || area <= 0.0) {
        cplx s = 0.0;
        for (cplx v : vertices_) s += v;
        return s / static_cast<double>(vertices_.size());
    }
    // Shift to the first vertex for conditioning.
    const cplx o = vertices_[0];
    cplx acc = 0.0;
    for (std::size_t i = 1; i + 1 < vertices_.size(); ++i) {
        const cplx a = vertices_[i] - o;
        const cplx b = vertices_[i + 1] - o;
        acc += cross(a, b) * (a + b);
    }
    return o + acc / (6.0 * area);
}

double ConvexPolygon::max_modulus() const {
    double m = 0.0;
    for (cplx v : vertices_) m = std::max(m, std::abs(v));
    return m;
}

ConvexPolygon ConvexPolygon::translated(cplx offset) const {
    std::vector<cplx> v = vertices_;
    for (cplx& p : v) p += offset;
    return ConvexPolygon{std::move(v)};
}

cplx project_to_segment(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return a;
    const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return a + t * d;
}

double ConvexPolygon::distance_to(cplx p) const {
    if (vertices_.empty()) return std::numeric_limits<double>::infinity();
    if (vertices_.size() == 1) return std::abs(p - vertices_[0]);
    if (vertices_.size() == 2) return std::abs(p - project_to_segment(p, vertices_[0], vertices_[1]));
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = vertices_[i];
        const cplx b = vertices_[(i + 1) % n];
        if (cross(b - a, p - a) < 0.0) inside = false;
        best = std::min(best, std::abs(p - project_to_segment(p, a, b)));
    }
    return inside ? 0.0 : best;
}

ConvexPolygon convex_hull(std::span<const cplx> points) { return ConvexPolygon::hull(points); }

double support_function(const ConvexPolygon& K, cplx z) {
    if (K.empty()) throw_domain("convex_geom.empty_set", "support function of the empty set");
    double best = -std::numeric_limits<double>::infinity();
    for (cplx u : K.vertices()) best = std::max(best, (z * u).real());
    return best;
}

ConvexPolygon minkowski_inflate(const ConvexPolygon& K, double r, double max_arc_step) {
    if (!(r >= 0.0)) throw_domain("convex_geom.negative_radius", "inflation radius must be >= 0");
    if (!(max_arc_step > 0.0)) throw_config("convex_geom.arc_step", "arc step must be positive");
    if (K.empty() || r == 0.0) return K;

    const auto& v = K.vertices();
    std::vector<cplx> out;
    if (v.size() == 1) {
        const int m = std::max(3, static_cast<int>(std::ceil(2.0 * pi / max_arc_step)));
        out.reserve(m);
        for (int k = 0; k < m; ++k) out.push_back(v[0] + std::polar(r, 2.0 * pi * k / m));
        return ConvexPolygon::hull(out);
    }

    // A segment is traversed as the degenerate polygon a -> b -> a.
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx prev = v[(i + n - 1) % n];
        const cplx cur = v[i];
        const cplx next = v[(i + 1) % n];
        const cplx n_in = -I * (cur - prev) / std::abs(cur - prev);
        const cplx n_out = -I * (next - cur) / std::abs(next - cur);
        double sweep = std::arg(n_out / n_in);
        if (sweep <= 0.0) sweep += 2.0 * pi;
        const double start = std::arg(n_in);
        const int m = std::max(1, static_cast<int>(std::ceil(sweep / max_arc_step)));
        for (int k = 0; k <= m; ++k) out.push_back(cur + std::polar(r, start + sweep * k / m));
    }
    return ConvexPolygon::hull(out);
}

double hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b, int theta_nodes) {
    if (a.empty() || b.empty())
        throw_domain("convex_geom.empty_set", "Hausdorff distance needs non-empty sets");
    double best = 0.0;
    for (int k = 0; k < theta_nodes; ++k) {
        const cplx z = std::polar(1.0, -pi + 2.0 * pi * k / theta_nodes);
        best = std::max(best, std::abs(support_function(a, z) - support_function(b, z)));
    }
    return best;
}

SupportReconstruction polygon_from_support_samples(std::span<const SupportSample> samples,
                                                   double tol) {
    if (samples.size() < 3)
        throw_domain("convex_geom.too_few_samples", "need at least 3 support samples");

    // Half-plane {u : Re(e^{i theta} u) <= h} has outward normal conj(e^{i theta}).
    struct HalfPlane {
        cplx normal;
        double offset;
        double angle;
    };
    std::vector<HalfPlane> planes;
    planes.reserve(samples.size());
    double hmax = 0.0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.h) || !std::isfinite(s.theta))
            throw_domain("convex_geom.non_finite", "support sample is not finite");
        const cplx nrm = std::polar(1.0, -s.theta);
        planes.push_back({nrm, s.h, std::arg(nrm)});
        hmax = std::max(hmax, std::abs(s.h));
    }
    std::sort(planes.begin(), planes.end(),
              [](const HalfPlane& x, const HalfPlane& y) { return x.angle < y.angle; });

    double max_gap = 0.0;
    for (std::size_t i = 0; i < planes.size(); ++i) {
        const double a0 = planes[i].angle;
        const double a1 = (i + 1 < planes.size()) ? planes[i + 1].angle : planes[0].angle + 2.0 * pi;
        max_gap = std::max(max_gap, a1 - a0);
    }
    if (max_gap >= pi - 1e-12)
        throw_domain("convex_geom.uncovered_directions",
                     "support samples leave an angular gap >= pi; intersection is unbounded");

    const double R = 2.0 * (1.0 + hmax) / std::cos(0.5 * max_gap);
    std::vector<cplx> poly = {cplx(-R, -R), cplx(R, -R), cplx(R, R), cplx(-R, R)};
    std::vector<cplx> next;
    for (const auto& hp : planes) {
        const auto dist = [&](cplx p) { return (std::conj(hp.normal) * p).real() - hp.offset; };
        next.clear();
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const cplx p = poly[i];
            const cplx q = poly[(i + 1) % n];
            const double dp = dist(p);
            const double dq = dist(q);
            const bool in_p = dp <= tol;
            const bool in_q = dq <= tol;
            if (in_p) next.push_back(p);
            if (in_p != in_q) {
                const double t = dp / (dp - dq);
                if (std::isfinite(t)) next.push_back(p + std::clamp(t, 0.0, 1.0) * (q - p));
            }
        }
        if (next.empty()) return {ConvexPolygon{}, false};
        poly.swap(next);
    }
    return {ConvexPolygon::hull(poly), true};
}

OriginDistance dist_origin(std::span<const cplx> points) {
    if (points.empty()) return {std::numeric_limits<double>::infinity(), 0.0, true};
    OriginDistance best{std::numeric_limits<double>::infinity(), 0.0, false};
    for (cplx p : points) {
        if (std::abs(p) < best.value) best = {std::abs(p), p, false};
    }
    return best;
}

OriginDistance dist_origin(std::span<const Polyline> polylines) {
    OriginDistance best{std::numeric_limits<double>::infinity(), 0.0, true};
    for (const auto& line : polylines) {
        if (line.empty()) continue;
        if (line.size() == 1) {
            if (std::abs(line[0]) < best.value) best = {std::abs(line[0]), line[0], false};
            continue;
        }
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            const cplx q = project_to_segment(0.0, line[i], line[i + 1]);
            if (std::abs(q) < best.value) best = {std::abs(q), q, false};
        }
    }
    return best;
}

}  // namespace exptype
