#include "exptype/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exptype/error.hpp"
#include "exptype/series.hpp"

namespace exptype {

struct SymbolGerm::Node {
    Kind kind = Kind::entire;
    ExpSum f;
    std::vector<SymbolGerm> children;
    std::optional<Region> region;
    unsigned n = 0;
    cplx offset = 0.0;
    Branch branch{0.0, 0.0};
};

namespace {

std::string fmt(cplx z) {
    std::ostringstream os;
    os.precision(12);
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

Series exp_series(cplx beta, std::size_t n) {
    Series s(n);
    s[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] * beta / static_cast<double>(k);
    return s;
}

// Taylor coefficients at alpha of an exponential polynomial, exact.
std::vector<cplx> expsum_taylor(const ExpSum& f, cplx alpha, int m) {
    const std::size_t n = static_cast<std::size_t>(m) + 1;
    Series out(n, 0.0);
    for (const auto& t : f.terms()) {
        Series p = poly_taylor_shift(t.poly, alpha);
        const cplx factor = std::exp(t.alpha * alpha);
        for (cplx& c : p) c *= factor;
        const Series prod = series_mul(p, exp_series(t.alpha, n), n);
        for (std::size_t k = 0; k < n; ++k) out[k] += prod[k];
    }
    return out;
}

std::vector<cplx> loop_points(const ConvexPolygon& outline, int samples) {
    const auto& v = outline.vertices();
    std::vector<cplx> pts;
    if (v.size() < 2) return {v.begin(), v.end()};
    const double per = outline.perimeter();
    const std::size_t n = v.size();
    const std::size_t edges = v.size() == 2 ? 2 : n;
    for (std::size_t i = 0; i < edges; ++i) {
        const cplx a = v[i % n];
        const cplx b = v[(i + 1) % n];
        const int k = std::max(1, static_cast<int>(std::ceil(samples * std::abs(b - a) / per)));
        for (int j = 0; j < k; ++j) pts.push_back(a + (b - a) * (static_cast<double>(j) / k));
    }
    return pts;
}

// Argument increment of phi along [a, b], subdividing by four on large jumps
// or near-zero passes.
double arg_increment(const SymbolGerm& phi, cplx a, cplx fa, cplx b, cplx fb, double scale, int depth) {
    const double d = std::arg(fb / fa);
    const bool near_zero = std::min(std::abs(fa), std::abs(fb)) < 1e-3 * scale;
    if ((std::abs(d) <= pi / 2 && !near_zero) || depth >= 4) {
        if (std::abs(d) > pi / 2)
            throw_numeric("operators.winding_unresolved",
                          "argument principle could not resolve the winding near " + fmt(a));
        return d;
    }
    double total = 0.0;
    cplx pa = a;
    cplx fpa = fa;
    for (int j = 1; j <= 4; ++j) {
        const cplx pb = (j == 4) ? b : a + (b - a) * (j / 4.0);
        const cplx fpb = (j == 4) ? fb : phi.value(pb);
        if (fpb == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(pb));
        total += arg_increment(phi, pa, fpa, pb, fpb, scale, depth + 1);
        pa = pb;
        fpa = fpb;
    }
    return total;
}

// Certifies that phi has no zero in the region: every sample is nonzero and
// the winding of phi along the boundary is 0.
void certify_zero_free(const SymbolGerm& phi, const Region& region) {
    const ConvexPolygon outline = region.outline();
    if (outline.empty()) throw_domain("operators.empty_region", "validity region is empty");
    for (cplx v : outline.vertices())
        if (!phi.valid_at(v))
            throw_domain("operators.outside_validity",
                         "region point " + fmt(v) + " lies outside the base symbol's validity");
    const auto pts = loop_points(outline, 512);
    std::vector<cplx> vals(pts.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = phi.value(pts[i]);
        if (vals[i] == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(pts[i]));
        scale = std::max(scale, std::abs(vals[i]));
    }
    if (!outline.has_area()) return;
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t j = (i + 1) % pts.size();
        total += arg_increment(phi, pts[i], vals[i], pts[j], vals[j], scale, 0);
    }
    const long winding = std::lround(total / (2.0 * pi));
    if (winding != 0)
        throw_domain("operators.zero_in_region",
                     "symbol has " + std::to_string(winding) + " zero(s) inside the validity region");
}

// Continues the argument of phi from a (known arg) to b along the segment.
double continue_arg(const SymbolGerm& phi, cplx a, cplx fa, cplx b, cplx fb, int depth) {
    const double d = std::arg(fb / fa);
    if (std::abs(d) <= pi / 4) return d;
    if (depth > 40) throw_numeric("operators.branch_continuation", "logarithm continuation did not settle");
    const cplx m = 0.5 * (a + b);
    const cplx fm = phi.value(m);
    if (fm == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(m));
    return continue_arg(phi, a, fa, m, fm, depth + 1) + continue_arg(phi, m, fm, b, fb, depth + 1);
}

cplx log_value(const SymbolGerm& base, const SymbolGerm::Branch& br, cplx z) {
    const cplx fb = base.value(br.base_point);
    const cplx fz = base.value(z);
    if (fz == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(z));
    const double darg = continue_arg(base, br.base_point, fb, z, fz, 0);
    return {std::log(std::abs(fz)), br.value.imag() + darg};
}

// Solves base(z) = w by Newton continuation from (base(center), center).
cplx invert_point(const SymbolGerm& base, cplx center, cplx w) {
    const cplx w0 = base.value(center);
    cplx z = center;
    double t = 0.0;
    double dt = 0.125;
    const auto newton = [&](cplx start, cplx target, cplx& out) {
        cplx x = start;
        for (int it = 0; it < 60; ++it) {
            const auto T = base.taylor(x, 1);
            if (std::abs(T[1]) <= 1e-14) return false;
            const cplx dx = (T[0] - target) / T[1];
            x -= dx;
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
            if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) {
                out = x;
                return true;
            }
        }
        const cplx r = base.value(x) - target;
        if (std::abs(r) <= 1e-12 * (1.0 + std::abs(target))) {
            out = x;
            return true;
        }
        return false;
    };
    while (t < 1.0) {
        const double tn = std::min(1.0, t + dt);
        cplx next;
        // Reject Newton solutions that jump far beyond the predicted step;
        // they usually landed on another sheet of the inverse.
        const double predicted = std::abs(w - w0) * (tn - t) / std::max(1e-300, std::abs(base.derivative(z)));
        if (newton(z, w0 + (w - w0) * tn, next) && std::abs(next - z) <= 3.0 * predicted + 1e-12) {
            z = next;
            t = tn;
            dt = std::min(0.25, dt * 2.0);
        } else {
            dt *= 0.5;
            if (dt < 1e-7)
                throw_numeric("operators.inverse_continuation",
                              "local inverse continuation failed towards " + fmt(w));
        }
    }
    return z;
}

}  // namespace

ConvexPolygon Region::outline() const {
    if (clearance <= 0.0) return polygon;
    return minkowski_inflate(polygon, clearance, 2.0 * pi / 128.0);
}

const char* kind_name(SymbolGerm::Kind k) {
    switch (k) {
        case SymbolGerm::Kind::entire: return "entire";
        case SymbolGerm::Kind::reciprocal: return "reciprocal";
        case SymbolGerm::Kind::logarithm: return "logarithm";
        case SymbolGerm::Kind::local_inverse: return "local_inverse";
        case SymbolGerm::Kind::product: return "product";
        case SymbolGerm::Kind::power: return "power";
        case SymbolGerm::Kind::shift: return "shift";
        case SymbolGerm::Kind::compose: return "compose";
    }
    return "unknown";
}

SymbolGerm SymbolGerm::entire(ExpSum f) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::entire;
    n->f = std::move(f);
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::reciprocal(const SymbolGerm& base, Region validity) {
    certify_zero_free(base, validity);
    auto n = std::make_shared<Node>();
    n->kind = Kind::reciprocal;
    n->children = {base};
    n->region = std::move(validity);
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::logarithm(const SymbolGerm& base, Region validity, std::optional<Branch> branch) {
    certify_zero_free(base, validity);
    Branch br;
    if (branch) {
        if (!validity.contains(branch->base_point))
            throw_domain("operators.branch_point", "branch base point lies outside the validity region");
        br = *branch;
        const cplx v = base.value(br.base_point);
        if (std::abs(std::exp(br.value) - v) > 1e-9 * std::max(1.0, std::abs(v)))
            throw_domain("operators.branch_value", "declared branch value is not a logarithm of the symbol");
    } else {
        const cplx c = validity.polygon.centroid();
        br = {c, std::log(base.value(c))};
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::logarithm;
    n->children = {base};
    n->region = std::move(validity);
    n->branch = br;
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::local_inverse(const SymbolGerm& base, cplx center, Region validity) {
    if (!base.valid_at(center)) throw_domain("operators.outside_validity", "inverse center outside base validity");
    const auto T = base.taylor(center, 1);
    if (std::abs(T[1]) <= 1e-9)
        throw_domain("operators.critical_point",
                     "base derivative vanishes at the inverse center " + fmt(center));
    if (!validity.contains(T[0]))
        throw_domain("operators.outside_validity", "inverse validity region must contain base(center)");
    auto n = std::make_shared<Node>();
    n->kind = Kind::local_inverse;
    n->children = {base};
    n->region = std::move(validity);
    n->offset = center;
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::product(const SymbolGerm& a, const SymbolGerm& b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::product;
    n->children = {a, b};
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::power(const SymbolGerm& base, unsigned k) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::power;
    n->children = {base};
    n->n = k;
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::shift(const SymbolGerm& base, cplx offset) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::shift;
    n->children = {base};
    n->offset = offset;
    return SymbolGerm(std::move(n));
}

SymbolGerm SymbolGerm::compose(const SymbolGerm& outer, const SymbolGerm& inner) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::compose;
    n->children = {outer, inner};
    return SymbolGerm(std::move(n));
}

SymbolGerm::Kind SymbolGerm::kind() const noexcept { return node_->kind; }
const std::optional<Region>& SymbolGerm::region() const noexcept { return node_->region; }
const SymbolGerm* SymbolGerm::first() const noexcept {
    return node_->children.empty() ? nullptr : &node_->children[0];
}
const SymbolGerm* SymbolGerm::second() const noexcept {
    return node_->children.size() < 2 ? nullptr : &node_->children[1];
}
const ExpSum* SymbolGerm::expsum() const noexcept { return node_->kind == Kind::entire ? &node_->f : nullptr; }
unsigned SymbolGerm::exponent() const noexcept { return node_->n; }
cplx SymbolGerm::offset_or_center() const noexcept { return node_->offset; }
std::optional<SymbolGerm::Branch> SymbolGerm::branch() const noexcept {
    if (node_->kind != Kind::logarithm) return std::nullopt;
    return node_->branch;
}

bool SymbolGerm::valid_at(cplx z) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::entire: return true;
        case Kind::reciprocal:
        case Kind::logarithm: return n.region->contains(z) && n.children[0].valid_at(z);
        case Kind::local_inverse: return n.region->contains(z);
        case Kind::product: return n.children[0].valid_at(z) && n.children[1].valid_at(z);
        case Kind::power: return n.children[0].valid_at(z);
        case Kind::shift: return n.children[0].valid_at(z + n.offset);
        case Kind::compose:
            return n.children[1].valid_at(z) && n.children[0].valid_at(n.children[1].value(z));
    }
    return false;
}

std::vector<cplx> SymbolGerm::taylor(cplx alpha, int m) const {
    if (m < 0) throw_domain("operators.negative_order", "derivative order must be >= 0");
    const Node& n = *node_;
    const std::size_t len = static_cast<std::size_t>(m) + 1;
    if (n.kind != Kind::entire && n.kind != Kind::product && n.kind != Kind::power && !valid_at(alpha))
        throw_domain("operators.outside_validity", "point " + fmt(alpha) + " is outside the symbol's validity");
    switch (n.kind) {
        case Kind::entire: return expsum_taylor(n.f, alpha, m);
        case Kind::reciprocal: {
            const auto T = n.children[0].taylor(alpha, m);
            if (T[0] == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(alpha));
            return series_reciprocal(T, len);
        }
        case Kind::logarithm: {
            const auto T = n.children[0].taylor(alpha, m);
            if (T[0] == 0.0) throw_domain("operators.zero_in_region", "symbol vanishes at " + fmt(alpha));
            return series_log(T, len, log_value(n.children[0], n.branch, alpha));
        }
        case Kind::local_inverse: {
            const SymbolGerm& base = n.children[0];
            const cplx z = invert_point(base, n.offset, alpha);
            Series T = base.taylor(z, std::max(m, 1));
            if (std::abs(T[1]) <= 1e-9)
                throw_domain("operators.critical_point", "base derivative vanishes at " + fmt(z));
            T[0] = 0.0;
            Series b = series_reversion(T, std::max<std::size_t>(len, 2));
            b.resize(len);
            b[0] = z;
            return b;
        }
        case Kind::product:
            return series_mul(n.children[0].taylor(alpha, m), n.children[1].taylor(alpha, m), len);
        case Kind::power: return series_pow(n.children[0].taylor(alpha, m), n.n, len);
        case Kind::shift: return n.children[0].taylor(alpha + n.offset, m);
        case Kind::compose: {
            Series inner = n.children[1].taylor(alpha, m);
            const cplx w = inner[0];
            inner[0] = 0.0;
            return series_compose(n.children[0].taylor(w, m), inner, len);
        }
    }
    return {};
}

std::string SymbolGerm::describe() const {
    const Node& n = *node_;
    std::ostringstream os;
    os << kind_name(n.kind);
    switch (n.kind) {
        case Kind::entire: os << "[" << n.f.size() << " term(s)]"; break;
        case Kind::power: os << "^" << n.n << "(" << n.children[0].describe() << ")"; break;
        case Kind::shift: os << fmt(n.offset) << "(" << n.children[0].describe() << ")"; break;
        case Kind::local_inverse: os << "@" << fmt(n.offset) << "(" << n.children[0].describe() << ")"; break;
        default: {
            os << "(";
            for (std::size_t i = 0; i < n.children.size(); ++i)
                os << (i ? ", " : "") << n.children[i].describe();
            os << ")";
        }
    }
    return os.str();
}

std::vector<cplx> symbol_derivatives(const SymbolGerm& phi, cplx alpha, int m) {
    auto t = phi.taylor(alpha, m);
    double fact = 1.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        fact *= static_cast<double>(k);
        t[k] *= fact;
    }
    return t;
}

namespace {

// q_j = sum_n T[n] p_{j+n} (j+n)! / j!
std::vector<cplx> apply_taylor_to_poly(const std::vector<cplx>& T, const std::vector<cplx>& p) {
    const std::size_t d = p.size();
    std::vector<cplx> q(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double ratio = 1.0;
        for (std::size_t n = 0; j + n < d && n < T.size(); ++n) {
            if (n > 0) ratio *= static_cast<double>(j + n);
            q[j] += T[n] * p[j + n] * ratio;
        }
    }
    return q;
}

void require_valid(const SymbolGerm& phi, const ExpSum& f) {
    for (const auto& t : f.terms())
        if (!phi.valid_at(t.alpha))
            throw_domain("operators.outside_validity",
                         "frequency " + fmt(t.alpha) + " is outside the symbol's validity");
}

}  // namespace

ExpSum apply_operator_exact(const SymbolGerm& phi, const ExpSum& f) {
    require_valid(phi, f);
    std::vector<ExpMonomial> out;
    out.reserve(f.size());
    for (const auto& t : f.terms()) {
        const auto T = phi.taylor(t.alpha, static_cast<int>(t.degree()));
        out.push_back({t.alpha, apply_taylor_to_poly(T, t.poly)});
    }
    return ExpSum(std::move(out));
}

SeriesApplication apply_operator_series(const std::vector<cplx>& coeffs, const TaylorJet& jet, int guard) {
    if (jet.coeffs.empty()) throw_domain("operators.empty_jet", "jet has no coefficients");
    const int N = static_cast<int>(jet.coeffs.size()) - 1;
    const int L = static_cast<int>(coeffs.size());
    if (L == 0) return {TaylorJet{std::vector<cplx>(N + 1, 0.0), jet.type_bound, jet.hull_bound}, 0.0};
    if (guard < 0) guard = std::min(L - 1, N / 2);
    const int M = N - guard;
    if (M < 0) throw_domain("operators.guard", "truncation guard exceeds jet length");
    SeriesApplication res;
    res.jet.type_bound = jet.type_bound;
    res.jet.coeffs.assign(M + 1, 0.0);
    for (int k = 0; k <= M; ++k) {
        const int last = std::min(L - 1, N - k);
        cplx sum = 0.0;
        double prev_mag = 0.0;
        double last_mag = 0.0;
        double ratio = 1.0;  // (n + k)! / k!
        for (int n = 0; n <= last; ++n) {
            if (n > 0) ratio *= static_cast<double>(n + k);
            const cplx term = coeffs[n] * jet.coeffs[n + k] * ratio;
            sum += term;
            prev_mag = last_mag;
            last_mag = std::abs(term);
        }
        res.jet.coeffs[k] = sum;
        if (last < L - 1) {
            // The symbol's series is cut by the jet; estimate the tail.
            const double scale = std::max(std::abs(sum), 1e-300);
            double tail;
            if (prev_mag > 0.0 && last_mag < prev_mag) {
                const double q = last_mag / prev_mag;
                tail = last_mag * q / (1.0 - q);
            } else {
                tail = last_mag;
            }
            if (tail > 1e-6 * scale && tail > 1e-300)
                throw_numeric("operators.series_divergence",
                              "partial sums for coefficient " + std::to_string(k) +
                                  " are not settled within the guard");
            res.truncation_error = std::max(res.truncation_error, tail);
        }
    }
    return res;
}

cplx apply_operator_contour(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx z) {
    if (!encloses(gamma, B.singular_hull))
        throw_domain("borel_polya.contour_winding",
                     "contour does not wind once around every singularity of the Borel data");
    for (const auto& node : gamma.nodes())
        if (!phi.valid_at(node.point))
            throw_domain("operators.contour_outside_validity",
                         "contour node " + fmt(node.point) + " leaves the symbol's validity region");
    return contour_integral(gamma, [&](cplx xi) { return B.eval(xi) * phi.value(xi) * std::exp(xi * z); });
}

std::pair<ExpSum, ExpSum> compose_apply(const SymbolGerm& phi, const SymbolGerm& psi, const ExpSum& f) {
    ExpSum nested = apply_operator_exact(phi, apply_operator_exact(psi, f));
    ExpSum product = apply_operator_exact(SymbolGerm::product(phi, psi), f);
    return {std::move(nested), std::move(product)};
}

ExpSum invert_operator(const SymbolGerm& phi, const ExpSum& f, std::optional<Region> region) {
    if (f.is_zero()) return f;
    Region r = region ? *region : Region{exact_cid(f), 0.25};
    const SymbolGerm inv = SymbolGerm::reciprocal(phi, std::move(r));
    return apply_operator_exact(inv, f);
}

namespace {

struct TermState {
    cplx alpha;
    std::vector<cplx> poly;
};

ScaledExpSum assemble(std::vector<TermState>& terms, std::int64_t exp2) {
    std::vector<ExpMonomial> m;
    m.reserve(terms.size());
    for (auto& t : terms) m.push_back({t.alpha, std::move(t.poly)});
    ScaledExpSum s{ExpSum(std::move(m)), exp2};
    s.renormalize();
    return s;
}

}  // namespace

ScaledExpSum iterate_operator_scaled(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n) {
    require_valid(phi, f);
    std::vector<TermState> terms;
    std::vector<std::vector<cplx>> taylors;
    for (const auto& t : f.terms()) {
        terms.push_back({t.alpha, t.poly});
        taylors.push_back(phi.taylor(t.alpha, static_cast<int>(t.degree())));
    }
    std::int64_t exp2 = 0;
    for (std::uint64_t step = 0; step < n; ++step) {
        double mx = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            terms[i].poly = apply_taylor_to_poly(taylors[i], terms[i].poly);
            for (cplx c : terms[i].poly) mx = std::max(mx, std::abs(c));
        }
        if (!std::isfinite(mx)) throw_numeric("operators.non_finite", "iterate produced non-finite coefficients");
        if (mx == 0.0) return ScaledExpSum{};
        if (mx > 0x1p64 || mx < 0x1p-64) {
            int e = 0;
            std::frexp(mx, &e);
            for (auto& t : terms)
                for (cplx& c : t.poly) c = {std::ldexp(c.real(), -e), std::ldexp(c.imag(), -e)};
            exp2 += e;
        }
    }
    return assemble(terms, exp2);
}

ExpSum iterate_operator(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n) {
    return iterate_operator_scaled(phi, f, n).to_expsum();
}

ScaledExpSum apply_power_scaled(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n) {
    require_valid(phi, f);
    if (n > std::numeric_limits<unsigned>::max()) throw_domain("operators.power", "power exponent too large");
    std::vector<TermState> terms;
    std::vector<double> log2_scale;
    for (const auto& t : f.terms()) {
        auto T = phi.taylor(t.alpha, static_cast<int>(t.degree()));
        double s = std::abs(T[0]);
        if (s == 0.0)
            for (cplx c : T) s = std::max(s, std::abs(c));
        if (s == 0.0) continue;
        for (cplx& c : T) c /= s;
        const Series P = series_pow(T, static_cast<unsigned>(n), T.size());
        terms.push_back({t.alpha, apply_taylor_to_poly(P, t.poly)});
        log2_scale.push_back(static_cast<double>(n) * std::log2(s));
    }
    if (terms.empty()) return ScaledExpSum{};
    const double top = *std::max_element(log2_scale.begin(), log2_scale.end());
    const auto E = static_cast<std::int64_t>(std::floor(top));
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double rel = log2_scale[i] - static_cast<double>(E);
        const double factor = rel < -1100.0 ? 0.0 : std::exp2(rel);
        for (cplx& c : terms[i].poly) c *= factor;
    }
    return assemble(terms, E);
}

double scaled_relative_difference(const ScaledExpSum& a, const ScaledExpSum& b) {
    const std::int64_t E = std::max(a.exp2, b.exp2);
    const auto scaled = [&](const ScaledExpSum& s, const ExpMonomial& t, std::size_t k) {
        const std::int64_t shift = s.exp2 - E;
        if (k >= t.poly.size() || shift < -2000) return cplx(0.0);
        const int e = static_cast<int>(shift);
        return cplx(std::ldexp(t.poly[k].real(), e), std::ldexp(t.poly[k].imag(), e));
    };
    double norm = 0.0;
    double diff = 0.0;
    std::vector<bool> matched(b.mantissa.size(), false);
    for (const auto& ta : a.mantissa.terms()) {
        const ExpMonomial* tb = b.mantissa.find(ta.alpha);
        if (tb) matched[static_cast<std::size_t>(tb - b.mantissa.terms().data())] = true;
        const std::size_t len = std::max(ta.poly.size(), tb ? tb->poly.size() : 0);
        for (std::size_t k = 0; k < len; ++k) {
            const cplx x = scaled(a, ta, k);
            const cplx y = tb ? scaled(b, *tb, k) : cplx(0.0);
            norm = std::max({norm, std::abs(x), std::abs(y)});
            diff = std::max(diff, std::abs(x - y));
        }
    }
    for (std::size_t i = 0; i < matched.size(); ++i) {
        if (matched[i]) continue;
        const auto& tb = b.mantissa.terms()[i];
        for (std::size_t k = 0; k < tb.poly.size(); ++k) {
            const cplx y = scaled(b, tb, k);
            norm = std::max(norm, std::abs(y));
            diff = std::max(diff, std::abs(y));
        }
    }
    if (norm == 0.0) return 0.0;
    return diff / norm;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        case Verdict::undetermined: return "undetermined";
    }
    return "undetermined";
}

namespace {

struct Sample {
    cplx z;
    double g;  // |phi(z)| - 1
};

// Bisection for |phi| = 1 on [a, b] with g(a), g(b) of opposite signs.
Sample polish_root(const SymbolGerm& phi, Sample a, Sample b, double tol) {
    for (int it = 0; it < 200; ++it) {
        if (std::abs(a.g) <= tol) return a;
        if (std::abs(b.g) <= tol) return b;
        const cplx m = 0.5 * (a.z + b.z);
        const Sample s{m, std::abs(phi.value(m)) - 1.0};
        if ((s.g < 0.0) == (a.g < 0.0))
            a = s;
        else
            b = s;
    }
    return std::abs(a.g) < std::abs(b.g) ? a : b;
}

}  // namespace

PredicateResult hypercyclicity_predicate(const SymbolGerm& phi, const ConvexPolygon& K, const PredicateOptions& opts) {
    PredicateResult res;
    if (K.empty()) {
        res.reason = "empty set";
        return res;
    }
    for (cplx v : K.vertices())
        if (!phi.valid_at(v))
            throw_domain("operators.outside_validity", "K vertex " + fmt(v) + " lies outside the symbol's validity");

    const auto eval = [&](cplx z) { return Sample{z, std::abs(phi.value(z)) - 1.0}; };
    const auto& V = K.vertices();

    if (K.is_point()) {
        const Sample s = eval(V[0]);
        res.min_modulus = res.max_modulus = s.g + 1.0;
        if (std::abs(s.g) <= opts.tol) {
            res.verdict = Verdict::yes;
            res.witness = s.z;
            res.witness_residual = std::abs(s.g);
            res.reason = "point on the unit circle";
        } else {
            res.verdict = Verdict::no;
            res.reason = s.g > 0.0 ? "expanding" : "contracting";
        }
        return res;
    }

    for (int level = 0; level <= opts.max_refinements; ++level) {
        const int s = opts.initial_subdivisions << level;
        res.refinements = level;
        std::vector<Sample> samples;
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        double mesh = 0.0;
        if (K.is_segment()) {
            for (int k = 0; k <= s; ++k) {
                samples.push_back(eval(V[0] + (V[1] - V[0]) * (static_cast<double>(k) / s)));
                if (k > 0) edges.push_back({static_cast<std::size_t>(k - 1), static_cast<std::size_t>(k)});
            }
            mesh = 0.5 * std::abs(V[1] - V[0]) / s;
        } else {
            for (std::size_t tri = 1; tri + 1 < V.size(); ++tri) {
                const cplx a = V[0];
                const cplx u = (V[tri] - a) / static_cast<double>(s);
                const cplx w = (V[tri + 1] - a) / static_cast<double>(s);
                mesh = std::max({mesh, std::abs(u), std::abs(w), std::abs(u - w)});
                std::vector<std::vector<std::size_t>> idx(s + 1);
                for (int i = 0; i <= s; ++i)
                    for (int j = 0; i + j <= s; ++j) {
                        idx[i].push_back(samples.size());
                        samples.push_back(eval(a + static_cast<double>(i) * u + static_cast<double>(j) * w));
                    }
                for (int i = 0; i <= s; ++i)
                    for (int j = 0; i + j <= s; ++j) {
                        if (i + j + 1 <= s) {
                            edges.push_back({idx[i][j], idx[i + 1][j]});
                            edges.push_back({idx[i][j], idx[i][j + 1]});
                            edges.push_back({idx[i + 1][j], idx[i][j + 1]});
                        }
                    }
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        double gmax = -std::numeric_limits<double>::infinity();
        double closest = std::numeric_limits<double>::infinity();
        for (const auto& smp : samples) {
            gmin = std::min(gmin, smp.g);
            gmax = std::max(gmax, smp.g);
            closest = std::min(closest, std::abs(smp.g));
            if (std::abs(smp.g) <= opts.tol) {
                res.verdict = Verdict::yes;
                res.witness = smp.z;
                res.witness_residual = std::abs(smp.g);
            }
        }
        res.min_modulus = gmin + 1.0;
        res.max_modulus = gmax + 1.0;
        if (res.verdict == Verdict::yes) {
            res.reason = "sample on the unit circle";
            return res;
        }
        for (const auto& [i, j] : edges) {
            const Sample& a = samples[i];
            const Sample& b = samples[j];
            if ((a.g < 0.0) != (b.g < 0.0)) {
                const Sample w = polish_root(phi, a, b, opts.tol);
                res.verdict = Verdict::yes;
                res.witness = w.z;
                res.witness_residual = std::abs(w.g);
                res.reason = "sign change of |phi| - 1";
                return res;
            }
        }
        double lip = 0.0;
        for (const auto& smp : samples) lip = std::max(lip, std::abs(phi.derivative(smp.z)));
        lip *= opts.lipschitz_safety;
        if (closest > lip * mesh + opts.tol) {
            res.verdict = Verdict::no;
            res.reason = gmin > 0.0 ? "expanding" : "contracting";
            return res;
        }
    }
    res.reason = "grid could not separate |phi| from 1";
    return res;
}

}  // namespace exptype
