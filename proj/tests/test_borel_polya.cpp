#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exptype/borel_polya.hpp"
#include "exptype/error.hpp"
#include "test_support.hpp"

using namespace exptype;
using testing_support::Gen;

namespace {

// Truncated Borel series sum_{n<=N} f^(n)(0) / xi^{n+1}, summed directly.
cplx borel_series_oracle(const ExpSum& f, cplx xi, int N) {
    const auto jet = taylor_jet_of(f, N);
    cplx s = 0.0;
    double fact = 1.0;
    for (int n = 0; n <= N; ++n) {
        if (n > 0) fact *= n;
        s += fact * jet.coeffs[n] / std::pow(xi, n + 1);
    }
    return s;
}

}  // namespace

TEST_CASE("borel_of_expsum") {
    const auto one = borel_of_expsum(ExpSum::constant(1.0));
    CHECK(borel_eval(one, 2.0) == cplx(0.5));
    const auto ei = borel_of_expsum(ExpSum::exponential(I));
    CHECK(std::abs(borel_eval(ei, {1.0, 1.0}) - 1.0) < 1e-15);

    // Frozen from a 30-digit evaluation of 1/(xi - a)^2 at xi = i(|a| + 2).
    const cplx a{0.3, 0.4};
    const auto B = borel_of_expsum(ExpSum::monomial(a, {0.0, 1.0}));
    const cplx xi = I * (std::abs(a) + 2.0);
    const cplx want{-0.21333333333333333641, 0.062222222222222221064};
    CHECK(std::abs(borel_eval(B, xi) - want) < 1e-15);
    CHECK(std::abs(borel_series_oracle(ExpSum::monomial(a, {0.0, 1.0}), xi, 60) - want) <= 1e-10 * std::abs(want));
    CHECK(B.poles[0].principal == std::vector<cplx>{0.0, 1.0});
}

TEST_CASE("borel_eval refuses points next to a pole") {
    const auto B = borel_of_expsum(ExpSum::exponential(0.5));
    CHECK_THROWS_AS(borel_eval(B, 0.5 + 1e-10), Error);
    try {
        borel_eval(B, 0.5);
    } catch (const Error& e) {
        CHECK(e.code() == "borel_polya.near_pole");
    }
}

TEST_CASE("rational Borel data agrees with the series outside the hull") {
    Gen gen(31);
    for (int trial = 0; trial < 30; ++trial) {
        const ExpSum f = gen.expsum(4, 1.0, 2);
        const auto B = borel_of_expsum(f);
        const cplx xi = std::polar(3.0, gen.uniform(-pi, pi));
        const cplx want = borel_series_oracle(f, xi, 120);
        CHECK(std::abs(borel_eval(B, xi) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("borel_of_expsum is linear") {
    Gen gen(32);
    for (int trial = 0; trial < 20; ++trial) {
        const ExpSum f = gen.expsum(3, 1.0, 2);
        const ExpSum g = gen.expsum(3, 1.0, 2);
        const cplx c = gen.coeff();
        const auto Bs = borel_of_expsum(add(f, scale(g, c)));
        const auto Bf = borel_of_expsum(f);
        const auto Bg = borel_of_expsum(g);
        for (int k = 0; k < 5; ++k) {
            const cplx xi = std::polar(2.5, gen.uniform(-pi, pi));
            CHECK(std::abs(borel_eval(Bs, xi) - borel_eval(Bf, xi) - c * borel_eval(Bg, xi)) < 1e-12);
        }
    }
}

TEST_CASE("borel_series_eval") {
    const auto e1 = borel_series_eval(taylor_jet_of(ExpSum::exponential(1.0), 80), 3.0);
    CHECK(std::abs(e1.value - 0.5) < 1e-14);
    CHECK(e1.error_estimate < 1e-20);
    const auto c = borel_series_eval(taylor_jet_of(ExpSum::constant(1.0), 5), 5.0);
    CHECK(std::abs(c.value - 0.2) < 1e-16);
    const ExpSum ch = add(ExpSum::exponential(1.0), ExpSum::exponential(-1.0));
    const auto v = borel_series_eval(taylor_jet_of(ch, 120), 2.0);
    CHECK(std::abs(v.value - 4.0 / 3.0) < 1e-13);
    CHECK_THROWS_AS(borel_series_eval(taylor_jet_of(ExpSum::exponential(1.0), 10), 1.1), Error);
}

TEST_CASE("make_cauchy_cycle") {
    const auto circ = make_cauchy_cycle(ConvexPolygon::point(0.0), 1.0, 64);
    CHECK(circ.shape() == Contour::Shape::circle);
    CHECK(circ.radius() == 1.0);
    CHECK(circ.winding_number(0.0) == 1);

    const auto seg = make_cauchy_cycle(ConvexPolygon::segment(-I, I), 0.5, 256);
    CHECK(seg.winding_number(0.0) == 1);
    CHECK(seg.winding_number({0.0, 0.9}) == 1);
    CHECK(seg.winding_number({0.0, -0.9}) == 1);
    CHECK(seg.winding_number(2.0) == 0);

    Gen gen(33);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> pts(5);
        for (auto& p : pts) p = gen.in_box(2.0);
        const auto K = convex_hull(pts);
        const auto g = make_cauchy_cycle(K, 0.3, 128);
        for (cplx v : K.vertices()) CHECK(g.winding_number(v) == 1);
        CHECK(g.winding_number(10.0) == 0);
    }
    CHECK_THROWS_AS(make_cauchy_cycle(ConvexPolygon::point(0.0), 1.0, 8), Error);
}

TEST_CASE("polya_reconstruct recovers exponentials") {
    const cplx a{0.4, -0.3};
    const auto B = BorelFunction::from_rational(borel_of_expsum(ExpSum::exponential(a)));
    const auto gamma = Contour::circle(0.0, std::abs(a) + 1.0, 512);
    for (cplx z : {cplx(0.0), cplx(1.0, 1.0), cplx(-2.0, 0.0), cplx(0.0, 2.0)}) {
        const auto r = polya_reconstruct(B, gamma, z);
        CHECK(std::abs(r.value - std::exp(a * z)) < 1e-8);
        CHECK(r.nodes_used == 512);
    }

    const BorelFunction zero{[](cplx) { return cplx(0.0); }, ConvexPolygon{}};
    CHECK(polya_reconstruct(zero, gamma, 1.0).value == cplx(0.0));

    const ExpSum zexp = ExpSum::monomial(a, {0.0, 1.0});
    const auto Bz = BorelFunction::from_rational(borel_of_expsum(zexp));
    for (cplx z : {cplx(0.5, 0.5), cplx(-1.5, 1.0)})
        CHECK(std::abs(polya_reconstruct(Bz, gamma, z).value - evaluate(zexp, z)) < 1e-8);

    const auto small = Contour::circle(2.0, 0.5, 64);
    CHECK_THROWS_AS(polya_reconstruct(B, small, 0.0), Error);
}

TEST_CASE("round trip and contour independence") {
    Gen gen(34);
    for (int trial = 0; trial < 25; ++trial) {
        const ExpSum f = gen.expsum(4, 1.0, 2);
        const auto B = BorelFunction::from_rational(borel_of_expsum(f));
        const auto circle = Contour::circle(0.0, 2.0, 512);
        const auto poly = make_cauchy_cycle(exact_cid(f), 0.5, 512);
        std::vector<cplx> zs;
        for (int k = 0; k < 10; ++k) zs.push_back(gen.in_disk(2.0));
        const auto vc = polya_reconstruct_many(B, circle, zs);
        const auto vp = polya_reconstruct_many(B, poly, zs, 2);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            CHECK(std::abs(vc[i] - evaluate(f, zs[i])) <= 1e-8);
            CHECK(std::abs(vc[i] - vp[i]) <= 1e-8);
        }
    }
}

TEST_CASE("trapezoid error drops tenfold per doubling") {
    const ExpSum f = add(ExpSum::monomial({0.6, 0.5}, {1.0, 0.5}), ExpSum::exponential({-0.7, 0.1}, 2.0));
    const auto B = BorelFunction::from_rational(borel_of_expsum(f));
    const cplx z{1.2, -1.1};
    double prev = 1e300;
    for (int n = 16; n <= 512; n *= 2) {
        const double err = std::abs(polya_reconstruct(B, Contour::circle(0.0, 2.0, n), z).value - evaluate(f, z));
        if (prev > 1e-12) CHECK((err <= prev / 10.0 || err <= 1e-12));
        prev = err;
    }
}
