#include "exptype/serialize.hpp"

#include <fstream>
#include <sstream>

#include "exptype/error.hpp"

namespace exptype {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw_parse("cli.parse", path + ": " + msg); }

const Json& field(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::vector<cplx> complex_list(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

SymbolGerm::Kind kind_from_name(const std::string& name, const std::string& path) {
    using K = SymbolGerm::Kind;
    for (K k : {K::entire, K::reciprocal, K::logarithm, K::local_inverse, K::product, K::power, K::shift, K::compose})
        if (name == kind_name(k)) return k;
    fail(path, "unknown symbol kind '" + name + "'");
}

}  // namespace

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const ExpSum& f) {
    Json terms = Json::array();
    for (const auto& t : f.terms()) {
        Json poly = Json::array();
        for (cplx c : t.poly) poly.push_back(to_json(c));
        terms.push_back({{"alpha", to_json(t.alpha)}, {"poly", poly}});
    }
    return {{"terms", terms}};
}

Json to_json(const ConvexPolygon& K) {
    Json v = Json::array();
    for (cplx p : K.vertices()) v.push_back(to_json(p));
    return {{"vertices", v}};
}

Json to_json(const Region& r) { return {{"polygon", to_json(r.polygon)}, {"clearance", r.clearance}}; }

Json to_json(const SymbolGerm& phi) {
    using K = SymbolGerm::Kind;
    Json j{{"kind", kind_name(phi.kind())}};
    switch (phi.kind()) {
        case K::entire: j["expsum"] = to_json(*phi.expsum()); break;
        case K::reciprocal:
            j["base"] = to_json(*phi.first());
            j["validity"] = to_json(*phi.region());
            break;
        case K::logarithm: {
            j["base"] = to_json(*phi.first());
            j["validity"] = to_json(*phi.region());
            const auto br = *phi.branch();
            j["branch"] = {{"base_point", to_json(br.base_point)}, {"value", to_json(br.value)}};
            break;
        }
        case K::local_inverse:
            j["base"] = to_json(*phi.first());
            j["center"] = to_json(phi.offset_or_center());
            j["validity"] = to_json(*phi.region());
            break;
        case K::product:
            j["base"] = to_json(*phi.first());
            j["factor"] = to_json(*phi.second());
            break;
        case K::power:
            j["base"] = to_json(*phi.first());
            j["exponent"] = phi.exponent();
            break;
        case K::shift:
            j["base"] = to_json(*phi.first());
            j["offset"] = to_json(phi.offset_or_center());
            break;
        case K::compose:
            j["base"] = to_json(*phi.first());
            j["inner"] = to_json(*phi.second());
            break;
    }
    return j;
}

cplx complex_from_json(const Json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) fail(path, "expected [re, im]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

ExpSum expsum_from_json(const Json& j, const std::string& path) {
    const Json& terms = field(j, "terms", path);
    if (!terms.is_array()) fail(path + ".terms", "expected an array");
    std::vector<ExpMonomial> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string p = path + ".terms[" + std::to_string(i) + "]";
        ExpMonomial m;
        m.alpha = complex_from_json(field(terms[i], "alpha", p), p + ".alpha");
        m.poly = complex_list(field(terms[i], "poly", p), p + ".poly");
        out.push_back(std::move(m));
    }
    return ExpSum(std::move(out));
}

ConvexPolygon polygon_from_json(const Json& j, const std::string& path) {
    const auto v = complex_list(field(j, "vertices", path), path + ".vertices");
    return convex_hull(v);
}

Region region_from_json(const Json& j, const std::string& path) {
    Region r;
    r.polygon = polygon_from_json(field(j, "polygon", path), path + ".polygon");
    if (j.contains("clearance")) r.clearance = number(j["clearance"], path + ".clearance");
    return r;
}

SymbolGerm symbol_from_json(const Json& j, const std::string& path) {
    using K = SymbolGerm::Kind;
    if (j.is_object() && j.contains("terms") && !j.contains("kind")) return SymbolGerm::entire(expsum_from_json(j, path));
    const Json& kj = field(j, "kind", path);
    if (!kj.is_string()) fail(path + ".kind", "expected a string");
    const K kind = kind_from_name(kj.get<std::string>(), path + ".kind");
    auto base = [&] { return symbol_from_json(field(j, "base", path), path + ".base"); };
    auto validity = [&] { return region_from_json(field(j, "validity", path), path + ".validity"); };
    switch (kind) {
        case K::entire: return SymbolGerm::entire(expsum_from_json(field(j, "expsum", path), path + ".expsum"));
        case K::reciprocal: return SymbolGerm::reciprocal(base(), validity());
        case K::logarithm: {
            std::optional<SymbolGerm::Branch> br;
            if (j.contains("branch")) {
                const Json& b = j["branch"];
                br = SymbolGerm::Branch{complex_from_json(field(b, "base_point", path + ".branch"), path + ".branch.base_point"),
                                        complex_from_json(field(b, "value", path + ".branch"), path + ".branch.value")};
            }
            return SymbolGerm::logarithm(base(), validity(), br);
        }
        case K::local_inverse:
            return SymbolGerm::local_inverse(base(), complex_from_json(field(j, "center", path), path + ".center"),
                                             validity());
        case K::product:
            return SymbolGerm::product(base(), symbol_from_json(field(j, "factor", path), path + ".factor"));
        case K::power: {
            const Json& e = field(j, "exponent", path);
            if (!e.is_number_unsigned()) fail(path + ".exponent", "expected a nonnegative integer");
            return SymbolGerm::power(base(), e.get<unsigned>());
        }
        case K::shift:
            return SymbolGerm::shift(base(), complex_from_json(field(j, "offset", path), path + ".offset"));
        case K::compose:
            return SymbolGerm::compose(base(), symbol_from_json(field(j, "inner", path), path + ".inner"));
    }
    fail(path, "unreachable symbol kind");
}

Json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw_parse("cli.io", "cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw_parse("cli.parse", file + ": " + e.what());
    }
}

}  // namespace exptype
