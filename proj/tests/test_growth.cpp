#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "exptype/error.hpp"
#include "exptype/growth.hpp"
#include "test_support.hpp"

using namespace exptype;
using testing_support::Gen;

namespace {

Evaluator eval_of(const ExpSum& f) {
    return [f](cplx z) { return evaluate(f, z); };
}

ExpSum e(cplx alpha, cplx c = 1.0) { return ExpSum::exponential(alpha, c); }

}  // namespace

TEST_CASE("max modulus and Lp averages") {
    CHECK(max_modulus(eval_of(e(1.0)), 1.0).value == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    for (int n : {0, 1, 3, 7}) {
        const auto zn = [n](cplx z) { return std::pow(z, n); };
        for (double r : {0.5, 1.0, 2.5}) {
            CHECK(max_modulus(zn, r).value == doctest::Approx(std::pow(r, n)).epsilon(1e-13));
            CHECK(lp_average(zn, r, 2.0) == doctest::Approx(std::pow(r, n)).epsilon(1e-13));
        }
    }
    // Dense-sampling oracle at 1e5 angles: 2 cosh 2.
    const ExpSum f = add(e(1.0), e(-1.0));
    CHECK(max_modulus(eval_of(f), 2.0).value == doctest::Approx(7.52439138216726291912).epsilon(1e-12));
    CHECK_THROWS_AS(max_modulus(eval_of(f), 2.0, 32), Error);
    CHECK_THROWS_AS(lp_average(eval_of(f), 1.0, 0.5), Error);
}

TEST_CASE("Lp averages are ordered by p and bounded by the max") {
    Gen g(11);
    for (int trial = 0; trial < 40; ++trial) {
        const ExpSum f = g.expsum(4, 1.5, 2);
        const double r = g.uniform(0.1, 4.0);
        const double m = max_modulus(eval_of(f), r).value;
        const double l1 = lp_average(eval_of(f), r, 1.0);
        const double l2 = lp_average(eval_of(f), r, 2.0);
        const double l5 = lp_average(eval_of(f), r, 5.0);
        CHECK(l1 <= l2 * (1 + 1e-12));
        CHECK(l2 <= l5 * (1 + 1e-12));
        CHECK(l5 <= m * (1 + 1e-12));
    }
}

TEST_CASE("exponential type") {
    const auto ladder = uniform_ladder(50.0, 40);
    const auto t2 = exp_type_estimate(e(2.0), ladder);
    CHECK(*t2.exact == doctest::Approx(2.0));
    CHECK(std::abs(t2.regression - 2.0) <= 1e-3);

    const auto tp = exp_type_estimate(ExpSum::polynomial({1.0, 2.0, 0.5}), ladder);
    CHECK(*tp.exact == 0.0);
    CHECK(std::abs(tp.regression) < 0.1);

    const auto t1i = exp_type_estimate(add(e(1.0), e(I)), uniform_ladder(200.0, 80));
    CHECK(*t1i.exact == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(t1i.regression - 1.0) <= 2e-2);

    // Large radii stay finite through the log path.
    const auto big = exp_type_estimate(e(3.0), uniform_ladder(1000.0, 8));
    CHECK(std::abs(big.regression - 3.0) <= 1e-9);

    const double bad[] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(exp_type_estimate(e(1.0), bad), Error);
}

TEST_CASE("exact indicator, exact type and max vertex modulus agree") {
    Gen g(12);
    const auto thetas = theta_grid(512);
    for (int trial = 0; trial < 100; ++trial) {
        const ExpSum f = g.expsum(5, 2.0, 2);
        const auto prof = indicator_exact(f, thetas);
        const double hmax = *std::max_element(prof.h_values.begin(), prof.h_values.end());
        const double vmax = exact_cid(f).max_modulus();
        const double exact = *exp_type_estimate(f, uniform_ladder(10.0, 4)).exact;
        CHECK(exact == doctest::Approx(vmax).epsilon(1e-12));
        // The maximum of h is attained at a grid angle only up to grid resolution.
        CHECK(hmax <= vmax + 1e-12);
        CHECK(hmax >= vmax * std::cos(pi / 512) - 1e-12);
    }
}

TEST_CASE("indicator examples") {
    const auto thetas = theta_grid(64);
    const double tau = 1.3, psi = 0.7;
    const auto p = indicator_exact(e(std::polar(tau, psi)), thetas);
    for (std::size_t k = 0; k < thetas.size(); ++k)
        CHECK(p.h_values[k] == doctest::Approx(tau * std::cos(thetas[k] + psi)).epsilon(1e-13));

    const auto one = indicator_exact(ExpSum::constant(1.0), thetas);
    for (double h : one.h_values) CHECK(h == 0.0);

    const auto seg = indicator_exact(add(e(1.0), e(-1.0)), thetas);
    for (std::size_t k = 0; k < thetas.size(); ++k)
        CHECK(seg.h_values[k] == doctest::Approx(std::abs(std::cos(thetas[k]))).epsilon(1e-13));

    const auto ladder = uniform_ladder(200.0, 800);
    const auto reg = indicator_regression(log_modulus_of(add(e(1.0), e(-1.0))), thetas, ladder);
    CHECK(reg.method == IndicatorMethod::radial_regression);
    for (std::size_t k = 0; k < thetas.size(); ++k)
        if (!reg.low_confidence[k]) CHECK(std::abs(reg.h_values[k] - std::abs(std::cos(thetas[k]))) <= 2e-2);
}

TEST_CASE("regression indicator tracks the exact one on random exponential polynomials") {
    Gen g(13);
    const auto thetas = theta_grid(128);
    const auto ladder = uniform_ladder(200.0, 800);
    int flagged = 0, total = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const ExpSum f = g.expsum(5, 1.0, 2);
        const auto ex = indicator_exact(f, thetas);
        const auto rg = indicator_regression(log_modulus_of(f), thetas, ladder);
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            ++total;
            if (rg.low_confidence[k]) {
                ++flagged;
                continue;
            }
            CHECK(std::abs(rg.h_values[k] - ex.h_values[k]) <= 2e-2);
        }
    }
    CHECK(flagged < total / 4);
}

TEST_CASE("diagram reconstruction from profiles") {
    const auto thetas = theta_grid(256);
    const cplx alpha(0.4, -0.9);
    const auto pt = cid_estimate(indicator_exact(e(alpha), thetas));
    CHECK(pt.feasible);
    CHECK(hausdorff_distance(pt.polygon, ConvexPolygon::point(alpha)) <= 1e-6);

    IndicatorProfile zero;
    zero.thetas = thetas;
    zero.h_values.assign(thetas.size(), 0.0);
    const auto z = cid_estimate(zero);
    CHECK(z.polygon.max_modulus() <= 1e-9);

    const ExpSum tri = add(add(e(1.0), e(-1.0)), e(I));
    const std::vector<cplx> v{1.0, -1.0, I};
    const ConvexPolygon want = convex_hull(v);
    CHECK(hausdorff_distance(cid_estimate(indicator_exact(tri, thetas)).polygon, want) <= 1e-6);
    const auto reg = indicator_regression(log_modulus_of(tri), thetas, uniform_ladder(200.0, 800));
    const auto est = cid_estimate(reg);
    CHECK(est.feasible);
    CHECK(hausdorff_distance(est.polygon, want) <= 0.05);
}

TEST_CASE("diagram reconstruction on random exponential polynomials") {
    Gen g(16);
    const auto thetas = theta_grid(256);
    const auto ladder = uniform_ladder(200.0, 800);
    for (int trial = 0; trial < 15; ++trial) {
        const ExpSum f = g.expsum(5, 1.0, 2);
        const ConvexPolygon want = exact_cid(f);
        // Exact profile: only the 256-angle grid error remains.
        CHECK(hausdorff_distance(cid_estimate(indicator_estimate(f, thetas)).polygon, want) <= 1e-2);
        const auto est = cid_estimate(indicator_estimate(log_modulus_of(f), thetas, ladder));
        REQUIRE_FALSE(est.polygon.empty());
        CHECK(hausdorff_distance(est.polygon, want) <= 0.05);
    }
}

TEST_CASE("seminorm examples") {
    for (int n : {1, 2, 5}) {
        const cplx alpha(0.3, -0.7);
        const auto s = seminorm(e(alpha), ConvexPolygon::point(alpha), n);
        CHECK(s.finite);
        CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(seminorm(ExpSum::constant(1.0), ConvexPolygon::point(0.0), n).value ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto inf = seminorm(e(2.0), ConvexPolygon::point(0.0), 1);
    CHECK_FALSE(inf.finite);
    CHECK(std::isinf(inf.value));
    // On the boundary a pure exponential stays bounded, a polynomial factor does not.
    CHECK(seminorm(e(0.5), ConvexPolygon::point(0.0), 2).finite);
    CHECK_FALSE(seminorm(ExpSum::monomial(0.5, {0.0, 1.0}), ConvexPolygon::point(0.0), 2).finite);
    // z e^{0}: sup_r r e^{-r/n} = n/e.
    const auto lin = seminorm(ExpSum::polynomial({0.0, 1.0}), ConvexPolygon::point(0.0), 3);
    CHECK(lin.value == doctest::Approx(3.0 / std::exp(1.0)).epsilon(1e-10));
    CHECK(lin.tail_bound < 1e-12);
}

TEST_CASE("seminorm scaling, triangle inequality and monotonicity") {
    Gen g(14);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<cplx> pts{g.in_disk(1.0), g.in_disk(1.0), g.in_disk(1.0)};
        const ConvexPolygon K = convex_hull(pts);
        auto inside = [&] {
            const double a = g.uniform(0, 1), b = g.uniform(0, 1 - a);
            return pts[0] * a + pts[1] * b + pts[2] * (1 - a - b);
        };
        auto sample = [&] {
            std::vector<ExpMonomial> t;
            for (int k = 0; k < 3; ++k) t.push_back({inside(), {g.coeff(), g.coeff() * 0.3}});
            return ExpSum(t);
        };
        const ExpSum f = sample(), h = sample();
        const int n = g.integer(1, 5);
        const cplx c = g.coeff();
        const double nf = seminorm(f, K, n).value;
        const double nh = seminorm(h, K, n).value;
        CHECK(seminorm(scale(f, c), K, n).value == doctest::Approx(std::abs(c) * nf).epsilon(1e-10));
        CHECK(seminorm(add(f, h), K, n).value <= nf + nh + 1e-10);
        CHECK(seminorm(f, K, n + 1).value >= nf * (1 - 1e-10));
        const double bigger = seminorm(f, minkowski_inflate(K, 0.3), n).value;
        CHECK(bigger <= nf * (1 + 1e-10));
    }
}

TEST_CASE("seminorm is invariant under frequency translation") {
    Gen g(15);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<cplx> pts{g.in_disk(1.0), g.in_disk(1.0)};
        const ConvexPolygon K = convex_hull(pts);
        const cplx alpha = pts[0];
        std::vector<ExpMonomial> t;
        for (int k = 0; k < 2; ++k) {
            const double s = g.uniform(0, 1);
            t.push_back({pts[0] * s + pts[1] * (1 - s), {g.coeff(), g.coeff()}});
        }
        const ExpSum f(t);
        const int n = g.integer(1, 5);
        const double a = seminorm(f, K, n).value;
        const double b = seminorm(multiply_by_exponential(f, -alpha), K.translated(-alpha), n).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("E2 norms and admissibility") {
    ComparisonFunction fact;
    double fa = 1.0;
    for (int n = 0; n <= 60; ++n) {
        if (n > 0) fa /= n;
        fact.a.push_back(fa);
    }
    TaylorJet c;
    c.coeffs = {cplx(3.0, 4.0)};
    CHECK(e2_norm(c, fact).value == doctest::Approx(5.0));
    TaylorJet zero;
    zero.coeffs.assign(10, 0.0);
    CHECK(e2_norm(zero, fact).value == 0.0);
    const TaylorJet half = taylor_jet_of(e(0.5), 40);
    const auto nh = e2_norm(half, fact);
    CHECK(nh.value == doctest::Approx(1.154700538379251529).epsilon(1e-14));
    CHECK_FALSE(nh.tail_significant);
    const TaylorJet two = taylor_jet_of(e(2.0), 5);
    CHECK(e2_norm(two, fact).tail_significant);

    CHECK(admissibility_check(fact).admissible);
    ComparisonFunction ones{std::vector<double>(20, 1.0)};
    const auto r1 = admissibility_check(ones);
    CHECK_FALSE(r1.admissible);
    CHECK(*r1.first_violation == 1);
    ComparisonFunction nn;
    for (int n = 0; n <= 30; ++n) nn.a.push_back(n == 0 ? 1.0 : std::pow(static_cast<double>(n), -n));
    CHECK(admissibility_check(nn).admissible);
    ComparisonFunction neg{{1.0, 0.5, -0.1}};
    CHECK(*admissibility_check(neg).first_violation == 2);
    // a_n = 1/(n!)^(1/2): ratio decreases but (n+1) * ratio grows.
    ComparisonFunction sq;
    for (double v : fact.a) sq.a.push_back(std::sqrt(v));
    CHECK_FALSE(admissibility_check(sq).admissible);
}

TEST_CASE("level sets of |phi| = 1") {
    const auto z = level_set_trace(SymbolGerm::identity(), default_level_window(SymbolGerm::identity()));
    REQUIRE(z.tau);
    CHECK(std::abs(*z.tau - 1.0) <= 1e-6);
    for (const auto& line : z.polylines)
        for (cplx p : line) CHECK(std::abs(std::abs(p) - 1.0) <= 1e-7);

    const SymbolGerm e1 = SymbolGerm::entire(e(1.0));
    const auto t1 = level_set_trace(e1, default_level_window(e1));
    REQUIRE(t1.tau);
    CHECK(*t1.tau <= 1e-6);

    const SymbolGerm e2 = SymbolGerm::entire(e(1.0, 2.0));
    const auto t2 = level_set_trace(e2, default_level_window(e2));
    REQUIRE(t2.tau);
    CHECK(*t2.tau == doctest::Approx(0.693147180559945309417).epsilon(1e-6));

    const auto none = level_set_trace(SymbolGerm::constant(3.0), {-1, 1, -1, 1}, 32);
    CHECK(none.polylines.empty());
    CHECK_FALSE(none.tau);
}

TEST_CASE("level sets of phi and 1/phi coincide") {
    const SymbolGerm phi = SymbolGerm::entire(add(e(1.0), ExpSum::polynomial({0.0, 0.1})));
    const Window w{-1.0, 1.0, -1.0, 1.0};
    const auto a = level_set_trace(phi, w, 128);
    // 1/phi on a region away from the zeros of phi.
    Region region{convex_hull(std::vector<cplx>{cplx(-1, -1), cplx(1, -1), cplx(1, 1), cplx(-1, 1)}), 0.05};
    const auto b = level_set_trace(SymbolGerm::reciprocal(phi, region), w, 128);
    REQUIRE_FALSE(a.polylines.empty());
    auto worst = [](const LevelSetTrace& x, const LevelSetTrace& y) {
        double d = 0;
        for (const auto& line : x.polylines)
            for (cplx p : line) {
                double best = 1e300;
                for (const auto& other : y.polylines)
                    for (std::size_t k = 0; k + 1 < other.size(); ++k)
                        best = std::min(best, std::abs(p - project_to_segment(p, other[k], other[k + 1])));
                d = std::max(d, best);
            }
        return d;
    };
    CHECK(worst(a, b) <= 1e-6);
    CHECK(worst(b, a) <= 1e-6);
    REQUIRE(a.tau);
    REQUIRE(b.tau);
    CHECK(*a.tau == doctest::Approx(*b.tau).epsilon(1e-9));
}

TEST_CASE("level set tracing is independent of the thread count") {
    const SymbolGerm phi = SymbolGerm::polynomial({0.5, 0.0, 1.0});
    const auto a = level_set_trace(phi, {-2, 2, -2, 2}, 64, 1);
    const auto b = level_set_trace(phi, {-2, 2, -2, 2}, 64, 3);
    REQUIRE(a.polylines.size() == b.polylines.size());
    for (std::size_t i = 0; i < a.polylines.size(); ++i) CHECK(a.polylines[i] == b.polylines[i]);
    CHECK(*a.tau == *b.tau);
}
