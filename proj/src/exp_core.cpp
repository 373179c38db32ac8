#include "exptype/exp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exptype/error.hpp"

namespace exptype {

namespace {

bool freq_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

void trim_poly(std::vector<cplx>& p, double trim) {
    double mx = 0.0;
    for (cplx c : p) mx = std::max(mx, std::abs(c));
    while (!p.empty() && (p.back() == 0.0 || std::abs(p.back()) <= trim * mx)) p.pop_back();
}

cplx cancel_add(cplx a, cplx b, double trim) {
    const cplx s = a + b;
    if (std::abs(s) <= trim * std::max(std::abs(a), std::abs(b))) return 0.0;
    return s;
}

void check_finite(cplx v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw_numeric("exp_core.non_finite", std::string("non-finite ") + what);
}

}  // namespace

ExpSum::ExpSum(std::vector<ExpMonomial> terms, const CoreTolerances& tol) {
    std::vector<ExpMonomial> merged;
    merged.reserve(terms.size());
    for (auto& t : terms) {
        check_finite(t.alpha, "frequency");
        for (cplx c : t.poly) check_finite(c, "coefficient");
        auto it = std::find_if(merged.begin(), merged.end(), [&](const ExpMonomial& m) {
            return std::abs(m.alpha - t.alpha) <= tol.dedup;
        });
        if (it == merged.end()) {
            merged.push_back(std::move(t));
            continue;
        }
        if (it->poly.size() < t.poly.size()) it->poly.resize(t.poly.size(), 0.0);
        for (std::size_t k = 0; k < t.poly.size(); ++k)
            it->poly[k] = cancel_add(it->poly[k], t.poly[k], tol.trim);
    }
    for (auto& m : merged) trim_poly(m.poly, tol.trim);
    std::erase_if(merged, [](const ExpMonomial& m) { return m.poly.empty(); });
    std::sort(merged.begin(), merged.end(),
              [](const ExpMonomial& a, const ExpMonomial& b) { return freq_less(a.alpha, b.alpha); });
    terms_ = std::move(merged);
}

ExpSum ExpSum::exponential(cplx alpha, cplx coeff) { return monomial(alpha, {coeff}); }

ExpSum ExpSum::monomial(cplx alpha, std::vector<cplx> poly) {
    return ExpSum({ExpMonomial{alpha, std::move(poly)}});
}

std::vector<cplx> ExpSum::frequencies() const {
    std::vector<cplx> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back(t.alpha);
    return out;
}

std::size_t ExpSum::max_degree() const noexcept {
    std::size_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.degree());
    return d;
}

double ExpSum::max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (const auto& t : terms_)
        for (cplx c : t.poly) m = std::max(m, std::abs(c));
    return m;
}

const ExpMonomial* ExpSum::find(cplx alpha, double tol) const {
    for (const auto& t : terms_)
        if (std::abs(t.alpha - alpha) <= tol) return &t;
    return nullptr;
}

cplx horner(const std::vector<cplx>& poly, cplx z) {
    cplx acc = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::vector<cplx> poly_derivative(const std::vector<cplx>& poly) {
    if (poly.size() <= 1) return {};
    std::vector<cplx> d(poly.size() - 1);
    for (std::size_t k = 1; k < poly.size(); ++k) d[k - 1] = static_cast<double>(k) * poly[k];
    return d;
}

std::vector<cplx> poly_taylor_shift(const std::vector<cplx>& poly, cplx a) {
    // Repeated synthetic division; exact for the degrees used here.
    std::vector<cplx> q = poly;
    const std::size_t n = q.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = n - 1; j > i; --j) q[j - 1] += a * q[j];
    return q;
}

cplx evaluate(const ExpSum& f, cplx z) {
    cplx s = 0.0;
    for (const auto& t : f.terms()) s += horner(t.poly, z) * std::exp(t.alpha * z);
    return s;
}

double log_abs_evaluate(const ExpSum& f, cplx z) {
    if (f.is_zero()) return -std::numeric_limits<double>::infinity();
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& t : f.terms()) m = std::max(m, (t.alpha * z).real());
    cplx s = 0.0;
    for (const auto& t : f.terms()) s += horner(t.poly, z) * std::exp(t.alpha * z - m);
    const double a = std::abs(s);
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    return m + std::log(a);
}

ExpSum differentiate(const ExpSum& f) {
    std::vector<ExpMonomial> out;
    out.reserve(f.size());
    for (const auto& t : f.terms()) {
        std::vector<cplx> p(t.poly.size());
        for (std::size_t k = 0; k < t.poly.size(); ++k) p[k] = t.alpha * t.poly[k];
        const auto d = poly_derivative(t.poly);
        for (std::size_t k = 0; k < d.size(); ++k) p[k] += d[k];
        out.push_back({t.alpha, std::move(p)});
    }
    return ExpSum(std::move(out));
}

ExpSum multiply_by_exponential(const ExpSum& f, cplx beta) {
    std::vector<ExpMonomial> out = f.terms();
    for (auto& t : out) t.alpha += beta;
    return ExpSum(std::move(out));
}

ExpSum add(const ExpSum& f, const ExpSum& g, const CoreTolerances& tol) {
    std::vector<ExpMonomial> all = f.terms();
    all.insert(all.end(), g.terms().begin(), g.terms().end());
    return ExpSum(std::move(all), tol);
}

ExpSum subtract(const ExpSum& f, const ExpSum& g, const CoreTolerances& tol) {
    return add(f, scale(g, -1.0), tol);
}

ExpSum scale(const ExpSum& f, cplx c) {
    if (c == 0.0) return ExpSum{};
    std::vector<ExpMonomial> out = f.terms();
    for (auto& t : out)
        for (cplx& x : t.poly) x *= c;
    return ExpSum(std::move(out));
}

ExpSum translate(const ExpSum& f, cplx a) {
    std::vector<ExpMonomial> out;
    out.reserve(f.size());
    for (const auto& t : f.terms()) {
        auto p = poly_taylor_shift(t.poly, a);
        const cplx factor = std::exp(t.alpha * a);
        for (cplx& c : p) c *= factor;
        out.push_back({t.alpha, std::move(p)});
    }
    return ExpSum(std::move(out));
}

TaylorJet taylor_jet_of(const ExpSum& f, int N) {
    if (N < 0) throw_domain("exp_core.negative_order", "jet order must be >= 0");
    TaylorJet jet;
    jet.coeffs.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (const auto& t : f.terms()) {
        // e^{alpha z} = sum_m alpha^m/m! z^m, convolved with the polynomial.
        std::vector<cplx> ex(jet.coeffs.size());
        ex[0] = 1.0;
        for (std::size_t m = 1; m < ex.size(); ++m) ex[m] = ex[m - 1] * t.alpha / static_cast<double>(m);
        for (std::size_t k = 0; k < t.poly.size() && k < ex.size(); ++k)
            for (std::size_t n = k; n < ex.size(); ++n) jet.coeffs[n] += t.poly[k] * ex[n - k];
        jet.type_bound = std::max(jet.type_bound, std::abs(t.alpha));
    }
    jet.hull_bound = exact_cid(f);
    return jet;
}

std::optional<std::size_t> jet_decay_onset(const TaylorJet& jet, double slack) {
    const double bound = jet.type_bound * (1.0 + slack);
    std::optional<std::size_t> onset;
    for (std::size_t n = jet.coeffs.size(); n-- > 1;) {
        const double a = std::abs(jet.coeffs[n]);
        if (a == 0.0) {
            onset = n;
            continue;
        }
        const double lhs = std::exp(std::log(a) / static_cast<double>(n)) * static_cast<double>(n) / std::numbers::e;
        if (lhs > bound) break;
        onset = n;
    }
    return onset;
}

ConvexPolygon exact_cid(const ExpSum& f) {
    const auto freqs = f.frequencies();
    return convex_hull(freqs);
}

void ScaledExpSum::renormalize() {
    const double m = mantissa.max_abs_coefficient();
    if (m == 0.0 || !std::isfinite(m)) return;
    int e = 0;
    std::frexp(m, &e);
    if (e == 0) return;
    std::vector<ExpMonomial> terms = mantissa.terms();
    for (auto& t : terms)
        for (cplx& c : t.poly) c = cplx(std::ldexp(c.real(), -e), std::ldexp(c.imag(), -e));
    // Power-of-two scaling is exact; rebuild without re-merging.
    mantissa = ExpSum(std::move(terms), CoreTolerances{0.0, 0.0});
    exp2 += e;
}

cplx ScaledExpSum::evaluate(cplx z) const {
    const cplx v = exptype::evaluate(mantissa, z);
    if (exp2 > std::numeric_limits<int>::max() || exp2 < std::numeric_limits<int>::min()) {
        if (v == 0.0) return 0.0;
        const double inf = std::numeric_limits<double>::infinity();
        return exp2 > 0 ? cplx(inf, inf) : cplx(0.0, 0.0);
    }
    const int e = static_cast<int>(exp2);
    return {std::ldexp(v.real(), e), std::ldexp(v.imag(), e)};
}

ExpSum ScaledExpSum::to_expsum() const {
    if (exp2 > 1000 || exp2 < -1000) {
        if (mantissa.is_zero()) return ExpSum{};
        if (exp2 > 1000) throw_numeric("exp_core.overflow", "scaled sum exceeds double range");
    }
    std::vector<ExpMonomial> terms = mantissa.terms();
    const int e = static_cast<int>(std::clamp<std::int64_t>(exp2, -2000, 2000));
    for (auto& t : terms)
        for (cplx& c : t.poly) {
            c = cplx(std::ldexp(c.real(), e), std::ldexp(c.imag(), e));
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw_numeric("exp_core.overflow", "scaled sum exceeds double range");
        }
    return ExpSum(std::move(terms));
}

bool ScaledExpSum::finite() const {
    for (const auto& t : mantissa.terms())
        for (cplx c : t.poly)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

}  // namespace exptype
