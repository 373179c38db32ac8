#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exptype/borel_polya.hpp"
#include "exptype/convex_geom.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/types.hpp"

namespace exptype {

// Points within `clearance` of a convex polygon.
struct Region {
    ConvexPolygon polygon;
    double clearance = 0.0;

    bool contains(cplx z, double tol = 1e-12) const {
        return polygon.distance_to(z) <= clearance + tol;
    }
    // Polygonal boundary of the region (inflated polygon).
    ConvexPolygon outline() const;
};

// Immutable symbol with exact local Taylor data. Derived kinds carry the
// region on which they are declared holomorphic (and zero-free for
// reciprocal / logarithm); factory functions verify that claim and throw a
// domain error when it fails.
class SymbolGerm {
public:
    enum class Kind { entire, reciprocal, logarithm, local_inverse, product, power, shift, compose };

    struct Branch {
        cplx base_point;
        cplx value;  // log phi(base_point) on the chosen branch
    };

    static SymbolGerm entire(ExpSum f);
    static SymbolGerm constant(cplx c) { return entire(ExpSum::constant(c)); }
    static SymbolGerm polynomial(std::vector<cplx> p) { return entire(ExpSum::polynomial(std::move(p))); }
    static SymbolGerm identity() { return polynomial({0.0, 1.0}); }

    static SymbolGerm reciprocal(const SymbolGerm& base, Region validity);
    // Default branch: principal log of base at the centroid of the region.
    static SymbolGerm logarithm(const SymbolGerm& base, Region validity,
                                std::optional<Branch> branch = std::nullopt);
    // Germ of base^{-1} near base(center); validity is a region in the image
    // plane containing base(center).
    static SymbolGerm local_inverse(const SymbolGerm& base, cplx center, Region validity);
    static SymbolGerm product(const SymbolGerm& a, const SymbolGerm& b);
    static SymbolGerm power(const SymbolGerm& base, unsigned n);
    // z -> base(z + offset)
    static SymbolGerm shift(const SymbolGerm& base, cplx offset);
    // z -> outer(inner(z))
    static SymbolGerm compose(const SymbolGerm& outer, const SymbolGerm& inner);

    Kind kind() const noexcept;
    // Declared region for reciprocal / logarithm / local_inverse kinds.
    const std::optional<Region>& region() const noexcept;
    // Children for derived kinds (null where not applicable).
    const SymbolGerm* first() const noexcept;
    const SymbolGerm* second() const noexcept;
    const ExpSum* expsum() const noexcept;
    unsigned exponent() const noexcept;
    cplx offset_or_center() const noexcept;
    std::optional<Branch> branch() const noexcept;

    bool valid_at(cplx z) const;
    // Taylor coefficients phi^{(k)}(alpha) / k!, k = 0..m.
    std::vector<cplx> taylor(cplx alpha, int m) const;
    cplx value(cplx alpha) const { return taylor(alpha, 0)[0]; }
    cplx derivative(cplx alpha) const { return taylor(alpha, 1)[1]; }

    std::string describe() const;

private:
    struct Node;
    explicit SymbolGerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

const char* kind_name(SymbolGerm::Kind k);

// (phi(alpha), phi'(alpha), ..., phi^{(m)}(alpha)).
std::vector<cplx> symbol_derivatives(const SymbolGerm& phi, cplx alpha, int m);

// Termwise phi(D)(p e_alpha) = e_alpha sum_n phi^{(n)}(alpha)/n! p^{(n)}.
ExpSum apply_operator_exact(const SymbolGerm& phi, const ExpSum& f);

struct SeriesApplication {
    TaylorJet jet;
    double truncation_error = 0.0;
};

// f -> sum_n coeffs[n] f^{(n)} on Taylor data. guard < 0 selects
// min(coeffs.size() - 1, N / 2). Throws numeric "operators.series_divergence"
// when a truncated sum is not settled to 1e-6 relative.
SeriesApplication apply_operator_series(const std::vector<cplx>& coeffs, const TaylorJet& jet,
                                        int guard = -1);

// (1 / 2 pi i) contour integral of B(xi) phi(xi) e^{xi z}.
cplx apply_operator_contour(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx z);

// (phi(D) psi(D) f, (phi psi)(D) f)
std::pair<ExpSum, ExpSum> compose_apply(const SymbolGerm& phi, const SymbolGerm& psi, const ExpSum& f);

// (1/phi)(D) f; the reciprocal is declared on `region` (default: the hull of
// f's frequencies inflated by 0.25).
ExpSum invert_operator(const SymbolGerm& phi, const ExpSum& f,
                       std::optional<Region> region = std::nullopt);

// n-fold application with a power-of-two exponent ledger.
ScaledExpSum iterate_operator_scaled(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n);
// Same, converted back to an ExpSum; numeric error if out of double range.
ExpSum iterate_operator(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n);
// (phi^n)(D) f in one step from the power germ's Taylor data.
ScaledExpSum apply_power_scaled(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n);

// Largest coefficientwise relative mismatch between two scaled sums with the
// same frequency structure (infinite when structures differ).
double scaled_relative_difference(const ScaledExpSum& a, const ScaledExpSum& b);

enum class Verdict { yes, no, undetermined };
const char* verdict_name(Verdict v);

struct PredicateResult {
    Verdict verdict = Verdict::undetermined;
    std::optional<cplx> witness;
    double witness_residual = 0.0;  // ||phi(witness)| - 1|
    double min_modulus = 0.0;       // over sampled points
    double max_modulus = 0.0;
    std::string reason;
    int refinements = 0;
};

struct PredicateOptions {
    double tol = 1e-10;
    int initial_subdivisions = 8;
    int max_refinements = 6;
    double lipschitz_safety = 1.5;
};

// Does phi(K) meet the unit circle?
PredicateResult hypercyclicity_predicate(const SymbolGerm& phi, const ConvexPolygon& K,
                                         const PredicateOptions& opts = {});

}  // namespace exptype
