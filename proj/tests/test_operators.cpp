#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exptype/error.hpp"
#include "exptype/operators.hpp"
#include "test_support.hpp"

using namespace exptype;
using testing_support::Gen;
using testing_support::rel_err;

namespace {

const SymbolGerm e1 = SymbolGerm::entire(ExpSum::exponential(1.0));
const SymbolGerm zsym = SymbolGerm::identity();

// Largest coefficient mismatch relative to the largest coefficient.
double coeff_rel_diff(const ExpSum& a, const ExpSum& b) {
    return scaled_relative_difference({a, 0}, {b, 0});
}

SymbolGerm random_entire_symbol(Gen& gen) {
    std::vector<ExpMonomial> terms;
    const int n = gen.integer(1, 2);
    for (int i = 0; i < n; ++i) terms.push_back({gen.in_disk(1.0), {gen.coeff(), gen.uniform(0, 1) < 0.5 ? cplx(0.0) : gen.coeff()}});
    return SymbolGerm::entire(ExpSum(terms));
}

}  // namespace

TEST_CASE("symbol_derivatives") {
    const auto d = symbol_derivatives(e1, 0.0, 3);
    for (cplx c : d) CHECK(std::abs(c - 1.0) < 1e-15);

    const Region small{ConvexPolygon::point(0.0), 0.5};
    const auto r = symbol_derivatives(SymbolGerm::reciprocal(e1, small), 0.0, 2);
    CHECK(std::abs(r[0] - 1.0) < 1e-15);
    CHECK(std::abs(r[1] + 1.0) < 1e-15);
    CHECK(std::abs(r[2] - 1.0) < 1e-15);

    const Region around_one{ConvexPolygon::point(1.0), 1.2};
    const auto lg = SymbolGerm::logarithm(e1, around_one, SymbolGerm::Branch{0.0, 0.0});
    const auto l = symbol_derivatives(lg, 1.0, 2);
    CHECK(std::abs(l[0] - 1.0) < 1e-14);
    CHECK(std::abs(l[1] - 1.0) < 1e-14);
    CHECK(std::abs(l[2]) < 1e-14);
}

TEST_CASE("logarithm branches follow continuation") {
    // log e^z = z continued along a path that winds past arg = pi.
    const Region strip{ConvexPolygon::segment({0.0, -5.0}, {0.0, 5.0}), 0.5};
    const auto lg = SymbolGerm::logarithm(e1, strip, SymbolGerm::Branch{0.0, 0.0});
    CHECK(std::abs(lg.value({0.2, 4.5}) - cplx(0.2, 4.5)) < 1e-12);
    CHECK(std::abs(lg.value({-0.3, -4.9}) - cplx(-0.3, -4.9)) < 1e-12);
    // Default branch: principal log at the centroid.
    const auto dflt = SymbolGerm::logarithm(e1, strip);
    CHECK(std::abs(dflt.value(0.4) - cplx(0.4)) < 1e-12);
    CHECK_THROWS_AS(SymbolGerm::logarithm(e1, strip, SymbolGerm::Branch{0.0, {0.0, 1.0}}), Error);
    CHECK_FALSE(lg.valid_at(3.0));
    CHECK_THROWS_AS(lg.taylor(3.0, 1), Error);
}

TEST_CASE("zero-free certification rejects zeros") {
    const SymbolGerm lin = SymbolGerm::polynomial({-0.5, 1.0});
    CHECK_THROWS_AS(SymbolGerm::reciprocal(lin, Region{ConvexPolygon::point(0.0), 1.0}), Error);
    CHECK_NOTHROW(SymbolGerm::reciprocal(lin, Region{ConvexPolygon::point(2.0), 1.0}));
    // 2 + e^z vanishes at log 2 + i pi.
    const SymbolGerm s = SymbolGerm::entire(add(ExpSum::constant(2.0), ExpSum::exponential(1.0)));
    CHECK_THROWS_AS(SymbolGerm::logarithm(s, Region{ConvexPolygon::point({std::log(2.0), pi}), 0.3}), Error);
    try {
        SymbolGerm::reciprocal(s, Region{ConvexPolygon::point({std::log(2.0), pi - 0.1}), 0.3});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "operators.zero_in_region");
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("local inverse of exp is log") {
    const auto inv = SymbolGerm::local_inverse(e1, 0.0, Region{ConvexPolygon::point(1.0), 0.5});
    const cplx w{1.2, 0.3};
    const auto t = inv.taylor(w, 3);
    CHECK(std::abs(t[0] - std::log(w)) < 1e-14);
    CHECK(std::abs(t[1] - 1.0 / w) < 1e-13);
    CHECK(std::abs(t[2] + 0.5 / (w * w)) < 1e-13);
    CHECK(std::abs(t[3] - 1.0 / (3.0 * w * w * w)) < 1e-12);
    CHECK_THROWS_AS(SymbolGerm::local_inverse(SymbolGerm::polynomial({0.0, 0.0, 1.0}), 0.0,
                                              Region{ConvexPolygon::point(0.0), 0.1}),
                    Error);
    // sqrt near 1 from z^2
    const auto sq = SymbolGerm::local_inverse(SymbolGerm::polynomial({0.0, 0.0, 1.0}), 1.0,
                                              Region{ConvexPolygon::point(1.0), 0.8});
    CHECK(std::abs(sq.value({0.4, 0.5}) - std::sqrt(cplx(0.4, 0.5))) < 1e-13);
}

TEST_CASE("product, power, shift, compose germs") {
    const cplx a{0.3, -0.2};
    const auto p = SymbolGerm::product(e1, zsym).taylor(a, 3);
    // z e^z at a: (a + t) e^{a} e^{t}
    const cplx ea = std::exp(a);
    CHECK(std::abs(p[0] - a * ea) < 1e-15);
    CHECK(std::abs(p[1] - (a + 1.0) * ea) < 1e-15);
    const auto pw = SymbolGerm::power(e1, 3).taylor(a, 2);
    CHECK(std::abs(pw[2] - 4.5 * std::exp(3.0 * a)) < 1e-13);
    const auto sh = SymbolGerm::shift(zsym, 2.0).taylor(a, 1);
    CHECK(std::abs(sh[0] - (a + 2.0)) < 1e-15);
    // exp(z^2) at a
    const auto c = SymbolGerm::compose(e1, SymbolGerm::polynomial({0.0, 0.0, 1.0})).taylor(a, 2);
    const cplx ez = std::exp(a * a);
    CHECK(std::abs(c[0] - ez) < 1e-15);
    CHECK(std::abs(c[1] - 2.0 * a * ez) < 1e-14);
    CHECK(std::abs(c[2] - (1.0 + 2.0 * a * a) * ez) < 1e-14);
}

TEST_CASE("apply_operator_exact") {
    CHECK(coeff_rel_diff(apply_operator_exact(zsym, ExpSum::exponential(2.0)), ExpSum::exponential(2.0, 2.0)) < 1e-15);
    const ExpSum shifted = apply_operator_exact(e1, ExpSum::polynomial({0.0, 1.0}));
    CHECK(coeff_rel_diff(shifted, ExpSum::polynomial({1.0, 1.0})) < 1e-15);
    const ExpSum d2 = apply_operator_exact(SymbolGerm::polynomial({0.0, 0.0, 1.0}), ExpSum::monomial(1.0, {0.0, 0.0, 1.0}));
    CHECK(coeff_rel_diff(d2, ExpSum::monomial(1.0, {2.0, 4.0, 1.0})) < 1e-15);

    const auto rec = SymbolGerm::reciprocal(e1, Region{ConvexPolygon::point(0.0), 0.5});
    CHECK_THROWS_AS(apply_operator_exact(rec, ExpSum::exponential(3.0)), Error);
    // Zero eigenvalue on a constant term removes it.
    CHECK(apply_operator_exact(zsym, ExpSum::constant(5.0)).is_zero());
}

TEST_CASE("eigen-relation on random symbols") {
    Gen gen(41);
    for (int trial = 0; trial < 100; ++trial) {
        const SymbolGerm phi = random_entire_symbol(gen);
        const cplx a = gen.in_disk(2.0);
        const ExpSum out = apply_operator_exact(phi, ExpSum::exponential(a));
        const cplx lam = phi.value(a);
        REQUIRE(out.size() == 1);
        REQUIRE(out.terms()[0].poly.size() == 1);
        CHECK(out.terms()[0].alpha == a);
        CHECK(std::abs(out.terms()[0].poly[0] - lam) <= 1e-12 * std::abs(lam));
    }
}

TEST_CASE("shift covariance") {
    Gen gen(42);
    for (int trial = 0; trial < 50; ++trial) {
        const SymbolGerm phi = random_entire_symbol(gen);
        const cplx a = gen.in_disk(1.5);
        std::vector<cplx> p(gen.integer(1, 4));
        for (auto& c : p) c = gen.coeff();
        const ExpSum lhs = apply_operator_exact(phi, ExpSum::monomial(a, p));
        const ExpSum inner = apply_operator_exact(SymbolGerm::shift(phi, a), ExpSum::polynomial(p));
        CHECK(coeff_rel_diff(lhs, multiply_by_exponential(inner, a)) <= 1e-10);
    }
}

TEST_CASE("apply_operator_series") {
    const cplx a{0.4, 0.2};
    const int N = 40;
    const auto jet = taylor_jet_of(ExpSum::exponential(a), N);
    std::vector<cplx> ecoef(30);
    ecoef[0] = 1.0;
    for (int n = 1; n < 30; ++n) ecoef[n] = ecoef[n - 1] / static_cast<double>(n);
    const auto res = apply_operator_series(ecoef, jet);
    const auto want = taylor_jet_of(apply_operator_exact(e1, ExpSum::exponential(a)), N);
    REQUIRE(res.jet.coeffs.size() == static_cast<std::size_t>(N - 20 + 1));
    for (std::size_t k = 0; k < res.jet.coeffs.size(); ++k)
        CHECK(std::abs(res.jet.coeffs[k] - want.coeffs[k]) <= 1e-13 * std::max(1e-300, std::abs(want.coeffs[k])) + 1e-300);
    CHECK(res.truncation_error < 1e-12);

    const auto d = apply_operator_series({0.0, 1.0}, jet);
    for (std::size_t k = 0; k < d.jet.coeffs.size(); ++k)
        CHECK(std::abs(d.jet.coeffs[k] - jet.coeffs[k + 1] * static_cast<double>(k + 1)) < 1e-15);
    const auto id = apply_operator_series({1.0}, jet);
    CHECK(id.jet.coeffs == jet.coeffs);

    // Coefficients growing like n! cannot be summed.
    std::vector<cplx> bad(30);
    double f = 1.0;
    for (int n = 0; n < 30; ++n) {
        bad[n] = f;
        f *= (n + 1);
    }
    CHECK_THROWS_AS(apply_operator_series(bad, taylor_jet_of(ExpSum::exponential(2.0), 40)), Error);
}

TEST_CASE("apply_operator_contour matches the exact path") {
    const cplx a{0.3, 0.1};
    const auto B = BorelFunction::from_rational(borel_of_expsum(ExpSum::exponential(a)));
    const auto gamma = make_cauchy_cycle(ConvexPolygon::point(a), 1.0, 256);
    CHECK(std::abs(apply_operator_contour(zsym, B, gamma, 1.0) - a * std::exp(a)) < 1e-12);

    const auto Bz = BorelFunction::from_rational(borel_of_expsum(ExpSum::polynomial({0.0, 1.0})));
    const auto g0 = make_cauchy_cycle(ConvexPolygon::point(0.0), 1.0, 256);
    CHECK(std::abs(apply_operator_contour(e1, Bz, g0, 0.3) - 1.3) < 1e-12);

    Gen gen(43);
    for (int trial = 0; trial < 20; ++trial) {
        const SymbolGerm phi = random_entire_symbol(gen);
        const ExpSum f = gen.expsum(3, 1.0, 2);
        const auto Bf = BorelFunction::from_rational(borel_of_expsum(f));
        const auto g = make_cauchy_cycle(exact_cid(f), 0.5, 512);
        const ExpSum exact = apply_operator_exact(phi, f);
        for (int k = 0; k < 4; ++k) {
            const cplx z = gen.in_disk(1.5);
            CHECK(std::abs(apply_operator_contour(phi, Bf, g, z) - evaluate(exact, z)) <= 1e-8);
        }
    }

    const auto rec = SymbolGerm::reciprocal(e1, Region{ConvexPolygon::point(a), 0.3});
    CHECK_THROWS_AS(apply_operator_contour(rec, B, gamma, 0.0), Error);
}

TEST_CASE("compose_apply") {
    const auto [n1, p1] = compose_apply(zsym, zsym, ExpSum::monomial(1.0, {0.0, 1.0}));
    CHECK(coeff_rel_diff(n1, ExpSum::monomial(1.0, {2.0, 1.0})) < 1e-15);
    CHECK(coeff_rel_diff(p1, ExpSum::monomial(1.0, {2.0, 1.0})) < 1e-15);
    const ExpSum f = ExpSum::monomial({0.2, 0.1}, {1.0, 2.0, 3.0});
    const auto [n2, p2] = compose_apply(SymbolGerm::constant(1.0), e1, f);
    CHECK(coeff_rel_diff(n2, apply_operator_exact(e1, f)) < 1e-15);
    CHECK(coeff_rel_diff(p2, apply_operator_exact(e1, f)) < 1e-15);

    Gen gen(44);
    for (int trial = 0; trial < 50; ++trial) {
        const SymbolGerm phi = random_entire_symbol(gen);
        const SymbolGerm psi = random_entire_symbol(gen);
        const ExpSum g = gen.expsum(3, 1.5, 3);
        const auto [a, b] = compose_apply(phi, psi, g);
        CHECK(coeff_rel_diff(a, b) <= 1e-10);
    }
}

TEST_CASE("invert_operator") {
    const ExpSum back = invert_operator(e1, ExpSum::polynomial({0.0, 1.0}));
    CHECK(coeff_rel_diff(back, ExpSum::polynomial({-1.0, 1.0})) < 1e-15);
    const ExpSum f = ExpSum::monomial({0.1, 0.2}, {1.0, -2.0});
    CHECK(coeff_rel_diff(invert_operator(SymbolGerm::constant(2.0), f), scale(f, 0.5)) < 1e-15);

    const SymbolGerm phi = SymbolGerm::entire(add(ExpSum::constant(2.0), ExpSum::exponential(1.0)));
    Gen gen(45);
    for (int trial = 0; trial < 30; ++trial) {
        const ExpSum g = gen.expsum(3, 0.5, 3);
        const ExpSum round = apply_operator_exact(phi, invert_operator(phi, g));
        CHECK(coeff_rel_diff(round, g) <= 1e-9);
    }
    CHECK_THROWS_AS(invert_operator(zsym, ExpSum::exponential(0.1)), Error);
}

TEST_CASE("iterate_operator") {
    const cplx a{0.5, 0.5};
    const ExpSum it = iterate_operator(zsym, ExpSum::exponential(a), 5);
    CHECK(std::abs(it.terms()[0].poly[0] - std::pow(a, 5)) < 1e-15);
    const ExpSum tr = iterate_operator(e1, ExpSum::polynomial({0.0, 0.0, 1.0}), 3);
    CHECK(coeff_rel_diff(tr, ExpSum::polynomial({9.0, 6.0, 1.0})) < 1e-15);
    CHECK(coeff_rel_diff(iterate_operator(e1, tr, 0), tr) == 0.0);

    Gen gen(46);
    for (int trial = 0; trial < 30; ++trial) {
        const SymbolGerm phi = random_entire_symbol(gen);
        const ExpSum g = gen.expsum(3, 1.0, 2);
        const std::uint64_t n = static_cast<std::uint64_t>(gen.integer(1, 40));
        CHECK(scaled_relative_difference(iterate_operator_scaled(phi, g, n), apply_power_scaled(phi, g, n)) <= 1e-8);
    }
}

TEST_CASE("iterates beyond double range use the exponent ledger") {
    const SymbolGerm big = SymbolGerm::constant(1e10);
    const ScaledExpSum s = iterate_operator_scaled(big, ExpSum::exponential(0.3), 100);
    CHECK(s.exp2 > 3000);
    CHECK(std::abs(static_cast<double>(s.exp2) + std::log2(s.mantissa.max_abs_coefficient()) - 1000.0 * std::log2(10.0)) < 1e-9);
    CHECK_THROWS_AS(iterate_operator(big, ExpSum::exponential(0.3), 100), Error);
    const ScaledExpSum p = apply_power_scaled(big, ExpSum::monomial(0.3, {1.0, 1.0}), 100);
    CHECK(scaled_relative_difference(s, apply_power_scaled(big, ExpSum::exponential(0.3), 100)) < 1e-12);
    CHECK(p.exp2 > 3000);
}

TEST_CASE("hypercyclicity_predicate") {
    const std::vector<cplx> sq = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto yes = hypercyclicity_predicate(zsym, convex_hull(sq));
    CHECK(yes.verdict == Verdict::yes);
    REQUIRE(yes.witness.has_value());
    CHECK(std::abs(std::abs(*yes.witness) - 1.0) <= 1e-10);

    const auto disk = minkowski_inflate(ConvexPolygon::point(0.0), 0.5, 2.0 * pi / 32);
    const auto no = hypercyclicity_predicate(zsym, disk);
    CHECK(no.verdict == Verdict::no);
    CHECK(no.reason == "contracting");

    const auto seg = hypercyclicity_predicate(e1, ConvexPolygon::segment(-I, I));
    CHECK(seg.verdict == Verdict::yes);
    CHECK(seg.witness_residual <= 1e-10);

    const SymbolGerm three = SymbolGerm::entire(add(ExpSum::constant(3.0), ExpSum::exponential(1.0)));
    const std::vector<cplx> small = {{-0.1, -0.1}, {0.1, -0.1}, {0.1, 0.1}, {-0.1, 0.1}};
    const auto exp_no = hypercyclicity_predicate(three, convex_hull(small));
    CHECK(exp_no.verdict == Verdict::no);
    CHECK(exp_no.reason == "expanding");

    CHECK(hypercyclicity_predicate(zsym, ConvexPolygon::point(I)).verdict == Verdict::yes);
    CHECK(hypercyclicity_predicate(zsym, ConvexPolygon::point(2.0)).verdict == Verdict::no);
    // |z| touches 1 only at a tangent point the grid cannot resolve.
    const auto tangent = hypercyclicity_predicate(zsym, ConvexPolygon::segment({1.0, -1.0}, {1.0 + 1e-13, 1.0}),
                                                  PredicateOptions{1e-16, 4, 2, 1.5});
    CHECK(tangent.verdict == Verdict::undetermined);
}
