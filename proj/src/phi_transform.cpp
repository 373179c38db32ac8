#include "exptype/phi_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exptype/error.hpp"
#include "exptype/parallel.hpp"
#include "exptype/quadrature.hpp"
#include "exptype/series.hpp"

namespace exptype {

namespace {

std::string fmt(cplx z) {
    std::ostringstream os;
    os.precision(12);
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

void require_valid(const SymbolGerm& phi, const ExpSum& f) {
    for (const auto& t : f.terms())
        if (!phi.valid_at(t.alpha))
            throw_domain("phi_transform.outside_validity",
                         "frequency " + fmt(t.alpha) + " is outside the symbol's validity");
}

void require_nodes_valid(const SymbolGerm& phi, const Contour& gamma) {
    for (const auto& node : gamma.nodes())
        if (!phi.valid_at(node.point))
            throw_domain("phi_transform.contour_outside_validity",
                         "contour node " + fmt(node.point) + " leaves the symbol's validity region");
}

void require_winding(const BorelFunction& B, const Contour& gamma) {
    if (!encloses(gamma, B.singular_hull))
        throw_domain("borel_polya.contour_winding",
                     "contour does not wind once around every singularity of the Borel data");
}

}  // namespace

ExpSum phi_transform_exact(const SymbolGerm& phi, const ExpSum& f, std::vector<FrequencyCollision>* collisions) {
    require_valid(phi, f);
    std::vector<ExpMonomial> out;
    std::vector<cplx> sources;
    out.reserve(f.size());
    for (const auto& t : f.terms()) {
        const int m = static_cast<int>(t.degree());
        const std::size_t len = static_cast<std::size_t>(m) + 1;
        Series u = phi.taylor(t.alpha, m);
        const cplx image = u[0];
        u[0] = 0.0;
        // q = sum_k k! p_k E_k with E_k[j] = [t^k] u^j / j!.
        std::vector<cplx> q(len, 0.0);
        Series uj(len, 0.0);
        uj[0] = 1.0;
        double jfact = 1.0;
        for (std::size_t j = 0; j < len; ++j) {
            if (j > 0) {
                uj = series_mul(uj, u, len);
                jfact *= static_cast<double>(j);
            }
            double kfact = 1.0;
            for (std::size_t k = 0; k < len; ++k) {
                if (k > 0) kfact *= static_cast<double>(k);
                if (k >= j) q[j] += kfact * t.poly[k] * uj[k] / jfact;
            }
        }
        if (collisions) {
            const CoreTolerances tol;
            for (std::size_t i = 0; i < out.size(); ++i)
                if (std::abs(out[i].alpha - image) <= tol.dedup) collisions->push_back({sources[i], t.alpha, image});
        }
        out.push_back({image, std::move(q)});
        sources.push_back(t.alpha);
    }
    return ExpSum(std::move(out));
}

cplx phi_transform_contour(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx z) {
    require_winding(B, gamma);
    require_nodes_valid(phi, gamma);
    return contour_integral(gamma, [&](cplx xi) { return B.eval(xi) * std::exp(phi.value(xi) * z); });
}

TaylorJet phi_transform_taylor(const SymbolGerm& phi, const ExpSum& f, int N) {
    if (N < 0) throw_domain("phi_transform.negative_order", "jet order must be >= 0");
    require_valid(phi, f);
    TaylorJet jet;
    jet.coeffs.assign(static_cast<std::size_t>(N) + 1, 0.0);
    ExpSum g = f;  // phi(D)^n f / n!
    for (int n = 0; n <= N; ++n) {
        if (n > 0) g = scale(apply_operator_exact(phi, g), 1.0 / static_cast<double>(n));
        jet.coeffs[n] = evaluate(g, 0.0);
        if (!std::isfinite(jet.coeffs[n].real()) || !std::isfinite(jet.coeffs[n].imag()))
            throw_numeric("phi_transform.non_finite", "Taylor coefficient " + std::to_string(n) + " overflowed");
    }
    for (const auto& t : f.terms()) jet.type_bound = std::max(jet.type_bound, std::abs(phi.value(t.alpha)));
    return jet;
}

cplx borel_continuation_H(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx w,
                          double clearance) {
    require_winding(B, gamma);
    require_nodes_valid(phi, gamma);
    std::vector<cplx> images;
    images.reserve(gamma.nodes().size());
    for (const auto& node : gamma.nodes()) images.push_back(phi.value(node.point));
    const ConvexPolygon hull = convex_hull(images);
    const double d = hull.distance_to(w);
    if (d < clearance)
        throw_domain("phi_transform.inside_image_hull",
                     "w = " + fmt(w) + " is within " + std::to_string(clearance) +
                         " of the hull of the contour image (distance " + std::to_string(d) + ")");
    std::size_t k = 0;
    CompensatedSum sum;
    for (const auto& node : gamma.nodes()) sum.add(node.weight * B.eval(node.point) / (w - images[k++]));
    return sum.value();
}

const char* conjugacy_case_name(ConjugacyCase c) {
    switch (c) {
        case ConjugacyCase::derivative: return "derivative";
        case ConjugacyCase::translation: return "translation";
        case ConjugacyCase::psi: return "psi";
    }
    return "unknown";
}

namespace {

SymbolGerm log_germ(const SymbolGerm& phi, const ExpSum& f, const std::optional<Region>& region,
                    const std::optional<SymbolGerm::Branch>& branch) {
    Region r = region ? *region : Region{exact_cid(f), 0.25};
    if (r.polygon.empty()) r.polygon = ConvexPolygon::point(0.0);
    return SymbolGerm::logarithm(phi, std::move(r), branch);
}

cplx newton_solve(const SymbolGerm& psi, cplx target, cplx start) {
    cplx z = start;
    for (int it = 0; it < 100; ++it) {
        const auto T = psi.taylor(z, 1);
        if (std::abs(T[1]) <= 1e-14) break;
        const cplx dz = (T[0] - target) / T[1];
        // Damped step keeps the iteration near the start point's branch.
        const double lim = 0.5 * (1.0 + std::abs(z));
        z -= std::abs(dz) > lim ? dz * (lim / std::abs(dz)) : dz;
        if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) return z;
    }
    if (std::abs(psi.value(z) - target) <= 1e-10 * (1.0 + std::abs(target))) return z;
    throw_numeric("phi_transform.inverse_center", "could not locate a preimage under psi of " + fmt(target));
}

}  // namespace

ConjugacyResidual conjugacy_residual(ConjugacyCase which, const SymbolGerm& phi, const std::optional<SymbolGerm>& psi,
                                     const ExpSum& f, std::span<const cplx> grid, const ConjugacyOptions& opts) {
    ConjugacyResidual res;
    const ExpSum phiDf = apply_operator_exact(phi, f);
    switch (which) {
        case ConjugacyCase::derivative:
            res.left = phi_transform_exact(phi, phiDf);
            res.right = differentiate(phi_transform_exact(phi, f));
            break;
        case ConjugacyCase::translation: {
            const SymbolGerm lphi = log_germ(phi, f, opts.log_region, opts.log_branch);
            res.left = phi_transform_exact(lphi, phiDf);
            res.right = translate(phi_transform_exact(lphi, f), 1.0);
            break;
        }
        case ConjugacyCase::psi: {
            if (!psi) throw_domain("phi_transform.missing_psi", "psi-case needs a psi symbol");
            const ConvexPolygon K = exact_cid(f);
            std::vector<cplx> images;
            for (const auto& t : f.terms()) images.push_back(phi.value(t.alpha));
            const cplx center = opts.inverse_center
                                    ? *opts.inverse_center
                                    : newton_solve(*psi, phi.value(K.empty() ? cplx(0.0) : K.centroid()),
                                                   K.empty() ? cplx(0.0) : K.centroid());
            Region wr = opts.inverse_region ? *opts.inverse_region : Region{convex_hull(images), 0.25};
            if (wr.polygon.empty()) wr.polygon = ConvexPolygon::point(psi->value(center));
            const SymbolGerm inv = SymbolGerm::local_inverse(*psi, center, std::move(wr));
            const SymbolGerm chi = SymbolGerm::compose(inv, phi);
            res.left = phi_transform_exact(chi, phiDf);
            res.right = apply_operator_exact(*psi, phi_transform_exact(chi, f));
            break;
        }
    }
    std::vector<double> diffs(grid.size());
    std::vector<double> scales(grid.size());
    parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
        const cplx r = evaluate(res.right, grid[i]);
        diffs[i] = std::abs(evaluate(res.left, grid[i]) - r);
        scales[i] = std::abs(r);
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        res.max_abs = std::max(res.max_abs, diffs[i]);
        res.scale = std::max(res.scale, scales[i]);
    }
    return res;
}

InterpolationReport verify_interpolation(const SymbolGerm& phi, const ExpSum& f, int n_max,
                                         std::optional<Region> region, std::optional<SymbolGerm::Branch> branch) {
    if (n_max < 0) throw_domain("phi_transform.negative_order", "n_max must be >= 0");
    InterpolationReport rep;
    if (f.is_zero()) {
        rep.errors.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
        return rep;
    }
    const SymbolGerm lphi = log_germ(phi, f, region, branch);
    const ExpSum interp = phi_transform_exact(lphi, f);
    // Orbit of each term separately so the error can be scaled by the sum of
    // term magnitudes (cancellation between terms would otherwise inflate it).
    std::vector<ExpSum> orbit;
    for (const auto& t : f.terms()) orbit.push_back(ExpSum({t}));
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0)
            for (auto& g : orbit) g = apply_operator_exact(phi, g);
        cplx direct = 0.0;
        double scale = 0.0;
        for (const auto& g : orbit) {
            const cplx v = evaluate(g, 0.0);
            direct += v;
            scale += std::abs(v);
        }
        const cplx via = evaluate(interp, static_cast<double>(n));
        if (!std::isfinite(std::abs(via)) || !std::isfinite(scale))
            throw_numeric("phi_transform.non_finite", "orbit value overflowed at n = " + std::to_string(n));
        const double err = std::abs(via - direct) / std::max(scale, 1e-300);
        rep.errors.push_back(err);
        if (err > rep.max_relative_error) {
            rep.max_relative_error = err;
            rep.worst_n = n;
        }
    }
    return rep;
}

TransformReport transform_report(const SymbolGerm& phi, const ExpSum& f, std::span<const cplx> residual_grid,
                                 double inflation) {
    TransformReport rep;
    rep.output = phi_transform_exact(phi, f, &rep.collisions);
    rep.source_hull = exact_cid(f);
    if (rep.source_hull.empty()) return rep;

    // Sample the source hull: vertices, edge points and a barycentric grid.
    std::vector<cplx> pts = rep.source_hull.vertices();
    const auto& V = rep.source_hull.vertices();
    const int s = 16;
    if (V.size() >= 2) {
        for (std::size_t i = 0; i < V.size(); ++i) {
            const cplx a = V[i];
            const cplx b = V[(i + 1) % V.size()];
            for (int k = 1; k < s; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / s));
        }
        for (std::size_t tri = 1; tri + 1 < V.size(); ++tri)
            for (int i = 1; i < s; ++i)
                for (int j = 1; i + j < s; ++j)
                    pts.push_back(V[0] + (V[tri] - V[0]) * (static_cast<double>(i) / s) +
                                  (V[tri + 1] - V[0]) * (static_cast<double>(j) / s));
    }
    std::vector<cplx> images;
    for (cplx p : pts)
        if (phi.valid_at(p)) images.push_back(phi.value(p));
    rep.image_hull = convex_hull(images);
    const ConvexPolygon inflated = minkowski_inflate(rep.image_hull, inflation);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& t : rep.output.terms()) {
        for (int k = 0; k < 1024; ++k) {
            const cplx z = std::polar(1.0, -pi + 2.0 * pi * k / 1024);
            margin = std::min(margin, support_function(inflated, z) - (z * t.alpha).real());
        }
    }
    rep.containment_margin = rep.output.is_zero() ? 0.0 : margin;
    if (!residual_grid.empty())
        rep.derivative_residual =
            conjugacy_residual(ConjugacyCase::derivative, phi, std::nullopt, f, residual_grid).max_abs;
    return rep;
}

}  // namespace exptype
