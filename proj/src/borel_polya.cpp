#include "exptype/borel_polya.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exptype/error.hpp"
#include "exptype/parallel.hpp"
#include "exptype/quadrature.hpp"

namespace exptype {

namespace {

constexpr int panel_order = 16;

std::string fmt(cplx z) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

}  // namespace

std::vector<cplx> RationalBorel::pole_locations() const {
    std::vector<cplx> out;
    out.reserve(poles.size());
    for (const auto& p : poles) out.push_back(p.alpha);
    return out;
}

RationalBorel borel_of_expsum(const ExpSum& f) {
    RationalBorel B;
    for (const auto& t : f.terms()) {
        BorelPole pole{t.alpha, {}};
        pole.principal.resize(t.poly.size());
        double fact = 1.0;
        for (std::size_t k = 0; k < t.poly.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            pole.principal[k] = t.poly[k] * fact;
        }
        B.poles.push_back(std::move(pole));
    }
    return B;
}

cplx borel_eval(const RationalBorel& B, cplx xi, double proximity) {
    cplx s = 0.0;
    for (const auto& p : B.poles) {
        const cplx d = xi - p.alpha;
        if (std::abs(d) <= proximity)
            throw_domain("borel_polya.near_pole", "evaluation point " + fmt(xi) + " is within " +
                                                       std::to_string(proximity) + " of pole " +
                                                       fmt(p.alpha));
        const cplx inv = 1.0 / d;
        // Horner in 1/d.
        cplx acc = 0.0;
        for (auto it = p.principal.rbegin(); it != p.principal.rend(); ++it) acc = acc * inv + *it;
        s += acc * inv;
    }
    return s;
}

BorelSeriesValue borel_series_eval(const TaylorJet& jet, cplx xi, double margin) {
    const double radius = jet.type_bound * (1.0 + margin);
    const double ax = std::abs(xi);
    if (!(ax > radius) || ax == 0.0)
        throw_domain("borel_polya.divergence_disk",
                     "|xi| = " + std::to_string(ax) + " is inside the divergence disk of radius " +
                         std::to_string(radius));
    CompensatedSum sum;
    const double log_ax = std::log(ax);
    const cplx unit = xi / ax;
    double last = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < jet.coeffs.size(); ++n) {
        const cplx c = jet.coeffs[n];
        used = n + 1;
        if (c == 0.0) {
            last = 0.0;
            continue;
        }
        // n! c_n / xi^{n+1} in log form so large n cannot overflow.
        const double lg = std::lgamma(static_cast<double>(n) + 1.0) + std::log(std::abs(c)) -
                          (static_cast<double>(n) + 1.0) * log_ax;
        const double mag = std::exp(lg);
        const cplx term = mag * (c / std::abs(c)) * std::pow(unit, -static_cast<double>(n + 1));
        sum.add(term);
        last = mag;
    }
    // Terms are dominated by a geometric series with ratio type_bound/|xi|.
    const double ratio = jet.type_bound / ax;
    const double tail = ratio < 1.0 ? last * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    return {sum.value(), tail, used};
}

Contour Contour::circle(cplx center, double radius, int nodes) {
    if (nodes < 16) throw_config("borel_polya.nodes", "contour needs at least 16 nodes");
    if (!(radius > 0.0)) throw_domain("borel_polya.radius", "circle radius must be positive");
    Contour c;
    c.shape_ = Shape::circle;
    c.center_ = center;
    c.radius_ = radius;
    c.nodes_ = nodes;
    c.build();
    return c;
}

Contour Contour::polyline(std::vector<cplx> vertices, int nodes) {
    if (nodes < 16) throw_config("borel_polya.nodes", "contour needs at least 16 nodes");
    if (vertices.size() < 3) throw_domain("borel_polya.polyline", "polyline contour needs >= 3 vertices");
    Contour c;
    c.shape_ = Shape::polyline;
    c.vertices_ = std::move(vertices);
    c.nodes_ = nodes;
    c.build();
    return c;
}

Contour Contour::with_nodes(int nodes) const {
    return shape_ == Shape::circle ? circle(center_, radius_, nodes) : polyline(vertices_, nodes);
}

void Contour::build() {
    quad_.clear();
    trace_.clear();
    if (shape_ == Shape::circle) {
        quad_.reserve(nodes_);
        for (int k = 0; k < nodes_; ++k) {
            const cplx offset = std::polar(radius_, 2.0 * pi * k / nodes_);
            // d xi = i (xi - c) d theta; the 1/(2 pi i) cancels to 1/N.
            quad_.push_back({center_ + offset, offset / static_cast<double>(nodes_)});
            trace_.push_back(center_ + offset);
        }
        return;
    }
    const std::size_t n = vertices_.size();
    double perimeter = 0.0;
    for (std::size_t i = 0; i < n; ++i) perimeter += std::abs(vertices_[(i + 1) % n] - vertices_[i]);
    const auto& rule = gauss_legendre(panel_order);
    const double max_panel = perimeter * panel_order / nodes_;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = vertices_[i];
        const cplx b = vertices_[(i + 1) % n];
        const double len = std::abs(b - a);
        trace_.push_back(a);
        if (len == 0.0) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil(len / max_panel - 1e-9)));
        for (int p = 0; p < panels; ++p) {
            const cplx pa = a + (b - a) * (static_cast<double>(p) / panels);
            const cplx pb = a + (b - a) * (static_cast<double>(p + 1) / panels);
            const cplx mid = 0.5 * (pa + pb);
            const cplx half = 0.5 * (pb - pa);
            for (int j = 0; j < panel_order; ++j) {
                const cplx x = mid + half * rule.nodes[j];
                quad_.push_back({x, half * rule.weights[j] / (2.0 * pi * I)});
            }
            trace_.push_back(pb);
        }
    }
}

int Contour::winding_number(cplx p) const {
    double total = 0.0;
    const std::size_t n = trace_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = trace_[i] - p;
        const cplx b = trace_[(i + 1) % n] - p;
        if (a == 0.0 || b == 0.0) return std::numeric_limits<int>::min();
        total += std::arg(b / a);
    }
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

double Contour::distance_to(cplx p) const {
    if (shape_ == Shape::circle) return std::abs(std::abs(p - center_) - radius_);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, std::abs(p - project_to_segment(p, vertices_[i], vertices_[(i + 1) % n])));
    return best;
}

Contour make_cauchy_cycle(const ConvexPolygon& K, double clearance, int nodes) {
    if (nodes < 16) throw_config("borel_polya.nodes", "contour needs at least 16 nodes");
    if (!(clearance > 0.0)) throw_domain("borel_polya.clearance", "clearance must be positive");
    Contour gamma = [&] {
        if (K.empty()) return Contour::circle(0.0, clearance, nodes);
        if (K.is_point()) return Contour::circle(K.vertices()[0], clearance, nodes);
        const auto inflated = minkowski_inflate(K, clearance, cycle_arc_step);
        return Contour::polyline(inflated.vertices(), nodes);
    }();
    if (!encloses(gamma, K))
        throw_numeric("borel_polya.contour_winding", "constructed cycle fails the winding check");
    return gamma;
}

bool encloses(const Contour& gamma, const ConvexPolygon& K) {
    for (cplx v : K.vertices())
        if (gamma.winding_number(v) != 1) return false;
    return true;
}

BorelFunction BorelFunction::from_rational(RationalBorel B) {
    const auto poles = B.pole_locations();
    ConvexPolygon hull = convex_hull(poles);
    return {[B = std::move(B)](cplx xi) { return borel_eval(B, xi); }, std::move(hull)};
}

namespace {

void check_winding(const BorelFunction& B, const Contour& gamma) {
    if (!encloses(gamma, B.singular_hull))
        throw_domain("borel_polya.contour_winding",
                     "contour does not wind once around every singularity of the Borel data");
}

}  // namespace

cplx contour_integral(const Contour& gamma, const std::function<cplx(cplx)>& g) {
    CompensatedSum sum;
    for (const auto& node : gamma.nodes()) sum.add(node.weight * g(node.point));
    return sum.value();
}

PolyaValue polya_reconstruct(const BorelFunction& B, const Contour& gamma, cplx z) {
    check_winding(B, gamma);
    const cplx v = contour_integral(gamma, [&](cplx xi) { return B.eval(xi) * std::exp(xi * z); });
    return {v, gamma.nodes().size()};
}

std::vector<cplx> polya_reconstruct_many(const BorelFunction& B, const Contour& gamma,
                                         std::span<const cplx> zs, int jobs) {
    check_winding(B, gamma);
    const auto& nodes = gamma.nodes();
    std::vector<cplx> wb(nodes.size());
    parallel_for(nodes.size(), jobs, [&](std::size_t k) { wb[k] = nodes[k].weight * B.eval(nodes[k].point); });
    std::vector<cplx> out(zs.size());
    parallel_for(zs.size(), jobs, [&](std::size_t i) {
        CompensatedSum sum;
        for (std::size_t k = 0; k < nodes.size(); ++k) sum.add(wb[k] * std::exp(nodes[k].point * zs[i]));
        out[i] = sum.value();
    });
    return out;
}

}  // namespace exptype
