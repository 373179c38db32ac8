#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "exptype/convex_geom.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/operators.hpp"

namespace exptype {

using Json = nlohmann::ordered_json;

// Complex numbers are [re, im]; a bare number is accepted as real.
Json to_json(cplx z);
Json to_json(const ExpSum& f);            // {terms: [{alpha, poly}]}
Json to_json(const ConvexPolygon& K);     // {vertices: [...]}
Json to_json(const Region& r);            // {polygon, clearance}
Json to_json(const SymbolGerm& phi);      // {kind, ...}

// Parsers throw ErrorKind::parse with the JSON path of the offending field.
// `path` is the prefix used in messages.
cplx complex_from_json(const Json& j, const std::string& path = "$");
ExpSum expsum_from_json(const Json& j, const std::string& path = "$");
ConvexPolygon polygon_from_json(const Json& j, const std::string& path = "$");
Region region_from_json(const Json& j, const std::string& path = "$");
// Kinds: entire {expsum}, reciprocal {base, validity}, logarithm {base,
// validity, branch?}, local_inverse {base, center, validity}, product {base,
// factor}, power {base, exponent}, shift {base, offset}, compose {base (outer),
// inner}. An object with "terms" is read as an entire symbol.
SymbolGerm symbol_from_json(const Json& j, const std::string& path = "$");

// Reads a whole file; parse errors carry line and column.
Json read_json_file(const std::string& file);

}  // namespace exptype
