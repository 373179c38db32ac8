#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "exptype/error.hpp"
#include "exptype/serialize.hpp"
#include "test_support.hpp"

using namespace exptype;
using testing_support::Gen;

namespace {

ConvexPolygon random_polygon(Gen& g) {
    std::vector<cplx> pts;
    const int n = g.integer(1, 7);
    for (int i = 0; i < n; ++i) pts.push_back(g.in_disk(1.5));
    return convex_hull(pts);
}

// Zero-free base near the origin so derived kinds certify.
SymbolGerm zero_free_base(Gen& g) {
    return SymbolGerm::entire(add(ExpSum::constant(3.0), ExpSum::exponential(g.in_disk(1.0), 0.5 * g.coeff())));
}

SymbolGerm random_symbol(Gen& g, int depth) {
    const int kind = depth <= 0 ? 0 : g.integer(0, 7);
    const Region small{ConvexPolygon::point(g.in_disk(0.2)), 0.1};
    switch (kind) {
        case 1: return SymbolGerm::reciprocal(zero_free_base(g), small);
        case 2: return SymbolGerm::logarithm(zero_free_base(g), small);
        case 3: {
            const cplx c = g.in_disk(0.5);
            return SymbolGerm::local_inverse(SymbolGerm::entire(ExpSum::exponential(1.0)), c,
                                             Region{ConvexPolygon::point(std::exp(c)), 0.2});
        }
        case 4: return SymbolGerm::product(random_symbol(g, depth - 1), random_symbol(g, depth - 1));
        case 5: return SymbolGerm::power(random_symbol(g, depth - 1), static_cast<unsigned>(g.integer(0, 4)));
        case 6: return SymbolGerm::shift(random_symbol(g, depth - 1), g.coeff());
        case 7: return SymbolGerm::compose(random_symbol(g, depth - 1), random_symbol(g, depth - 1));
        default: return SymbolGerm::entire(g.expsum(3, 1.0, 2));
    }
}

}  // namespace

TEST_CASE("round trip of exponential polynomials, polygons and symbols") {
    Gen g(31);
    for (int trial = 0; trial < 200; ++trial) {
        const ExpSum f = g.expsum(5, 2.0, 3);
        const std::string fs = to_json(f).dump();
        CHECK(expsum_from_json(Json::parse(fs)) == f);

        const ConvexPolygon K = random_polygon(g);
        const ConvexPolygon K2 = polygon_from_json(Json::parse(to_json(K).dump()));
        CHECK(K2.vertices() == K.vertices());

        const SymbolGerm phi = random_symbol(g, 2);
        const Json pj = to_json(phi);
        const SymbolGerm back = symbol_from_json(Json::parse(pj.dump()));
        CHECK(to_json(back).dump() == pj.dump());
        const cplx z = g.in_disk(0.1);
        if (phi.valid_at(z)) CHECK(back.value(z) == phi.value(z));
    }
}

TEST_CASE("shorthand inputs") {
    CHECK(complex_from_json(Json::parse("2.5")) == cplx(2.5, 0.0));
    const Json bare = Json::parse(R"({"terms":[{"alpha":[1,0],"poly":[[1,0]]}]})");
    const SymbolGerm phi = symbol_from_json(bare);
    CHECK(phi.kind() == SymbolGerm::Kind::entire);
    CHECK(std::abs(phi.value(0.0) - 1.0) < 1e-15);
    CHECK(expsum_from_json(Json::parse(R"({"terms":[]})")).is_zero());
}

TEST_CASE("malformed input names the field") {
    auto message = [](const char* text) {
        try {
            symbol_from_json(Json::parse(text));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::parse);
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"terms":[{"alpha":[1,0]}]})").find("$.terms[0]: missing field 'poly'") != std::string::npos);
    CHECK(message(R"({"terms":[{"alpha":[1],"poly":[]}]})").find("$.terms[0].alpha") != std::string::npos);
    CHECK(message(R"({"kind":"power","base":{"terms":[]},"exponent":-1})").find("$.exponent") != std::string::npos);
    CHECK(message(R"({"kind":"cosine"})").find("unknown symbol kind") != std::string::npos);
    CHECK(message(R"({"kind":"shift","base":{"kind":"entire","expsum":{"terms":[]}},"offset":"x"})")
              .find("$.offset") != std::string::npos);

    const std::string path = "serialize_bad_input.json";
    {
        std::ofstream f(path);
        f << "{\n  \"terms\": [\n";
    }
    try {
        read_json_file(path);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_json_file("no/such/file.json"), Error);
}

TEST_CASE("module errors surface through symbol parsing") {
    // The reciprocal of z on a region around 0 is refused by the module.
    const char* text = R"({"kind":"reciprocal","base":{"terms":[{"alpha":[0,0],"poly":[[0,0],[1,0]]}]},
                          "validity":{"polygon":{"vertices":[[0,0]]},"clearance":0.5}})";
    try {
        symbol_from_json(Json::parse(text));
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}
