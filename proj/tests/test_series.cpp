#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exptype/error.hpp"
#include "exptype/quadrature.hpp"
#include "exptype/series.hpp"
#include "test_support.hpp"

using namespace exptype;

namespace {

Series exp_series(cplx a, std::size_t n) {
    Series s(n);
    s[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] * a / static_cast<double>(k);
    return s;
}

}  // namespace

TEST_CASE("reciprocal and product invert each other") {
    const Series a = {2.0, {1.0, 1.0}, -0.5, 0.25};
    const Series r = series_reciprocal(a, 10);
    const Series one = series_mul(a, r, 10);
    CHECK(std::abs(one[0] - 1.0) < 1e-15);
    for (std::size_t k = 1; k < 10; ++k) CHECK(std::abs(one[k]) < 1e-14);
    CHECK_THROWS_AS(series_reciprocal({0.0, 1.0}, 4), Error);
}

TEST_CASE("log of exp recovers the exponent") {
    const cplx a{0.3, 0.7};
    const Series g = series_log(exp_series(a, 12), 12, 0.0);
    CHECK(std::abs(g[1] - a) < 1e-15);
    for (std::size_t k = 2; k < 12; ++k) CHECK(std::abs(g[k]) < 1e-15);
    // log(1 + t) = t - t^2/2 + t^3/3 ...
    const Series l = series_log({1.0, 1.0}, 6, 0.0);
    CHECK(std::abs(l[3] - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(l[4] + 0.25) < 1e-15);
}

TEST_CASE("power, composition, reversion") {
    const Series p = series_pow({1.0, 1.0}, 5, 7);
    const double binom[] = {1, 5, 10, 10, 5, 1, 0};
    for (int k = 0; k < 7; ++k) CHECK(std::abs(p[k] - binom[k]) < 1e-13);
    CHECK(series_pow({3.0}, 0, 3) == Series{1.0, 0.0, 0.0});

    // exp(log(1 + t)) == 1 + t
    const Series lg = series_log({1.0, 1.0}, 10, 0.0);
    const Series e = series_compose(exp_series(1.0, 10), lg, 10);
    CHECK(std::abs(e[0] - 1.0) < 1e-15);
    CHECK(std::abs(e[1] - 1.0) < 1e-15);
    for (std::size_t k = 2; k < 10; ++k) CHECK(std::abs(e[k]) < 1e-13);

    // Reversion of t e^t is Lambert W: W_k = (-k)^{k-1}/k!.
    Series tet(12, 0.0);
    const Series ex = exp_series(1.0, 12);
    for (std::size_t k = 1; k < 12; ++k) tet[k] = ex[k - 1];
    const Series w = series_reversion(tet, 12);
    double fact = 1.0;
    for (int k = 1; k < 12; ++k) {
        fact *= k;
        const double want = std::pow(-static_cast<double>(k), k - 1) / fact;
        CHECK(std::abs(w[k] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
    CHECK_THROWS_AS(series_reversion({0.0, 0.0, 1.0}, 4), Error);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int n : {2, 5, 16, 33}) {
        const auto& rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (int deg = 0; deg < 2 * n; deg += 2) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
            CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(1), Error);
}

TEST_CASE("compensated sum recovers cancellation") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == cplx(1.0));
}
