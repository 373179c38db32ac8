#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "exptype/convex_geom.hpp"
#include "exptype/types.hpp"

namespace exptype {

// p(z) e^{alpha z}; poly holds p in ascending degree.
struct ExpMonomial {
    cplx alpha;
    std::vector<cplx> poly;

    std::size_t degree() const noexcept { return poly.empty() ? 0 : poly.size() - 1; }
    friend bool operator==(const ExpMonomial&, const ExpMonomial&) = default;
};

struct CoreTolerances {
    // Frequencies closer than this are merged into one term.
    double dedup = 1e-9;
    // A leading coefficient is dropped when |lead| <= trim * max|coeff|; a sum
    // a + b is flushed to zero when |a + b| <= trim * max(|a|, |b|).
    double trim = 1e-14;
};

// Finite sum of ExpMonomials with pairwise distinct frequencies, ordered by
// (Re alpha, Im alpha). The empty sum is the zero function.
class ExpSum {
public:
    ExpSum() = default;
    explicit ExpSum(std::vector<ExpMonomial> terms, const CoreTolerances& tol = {});

    static ExpSum exponential(cplx alpha, cplx coeff = 1.0);
    static ExpSum monomial(cplx alpha, std::vector<cplx> poly);
    static ExpSum polynomial(std::vector<cplx> poly) { return monomial(0.0, std::move(poly)); }
    static ExpSum constant(cplx c) { return monomial(0.0, {c}); }

    const std::vector<ExpMonomial>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::vector<cplx> frequencies() const;
    std::size_t max_degree() const noexcept;
    double max_abs_coefficient() const noexcept;
    // Term whose frequency lies within tol of alpha, if any.
    const ExpMonomial* find(cplx alpha, double tol = 1e-9) const;

    friend bool operator==(const ExpSum&, const ExpSum&) = default;

private:
    std::vector<ExpMonomial> terms_;
};

cplx evaluate(const ExpSum& f, cplx z);
// log|f(z)| computed with the dominant exponential factored out; -inf at zeros.
double log_abs_evaluate(const ExpSum& f, cplx z);

ExpSum differentiate(const ExpSum& f);
ExpSum multiply_by_exponential(const ExpSum& f, cplx beta);
ExpSum add(const ExpSum& f, const ExpSum& g, const CoreTolerances& tol = {});
ExpSum subtract(const ExpSum& f, const ExpSum& g, const CoreTolerances& tol = {});
ExpSum scale(const ExpSum& f, cplx c);
// z -> f(z + a), computed exactly by polynomial Taylor shift.
ExpSum translate(const ExpSum& f, cplx a);

// Polynomial helpers on ascending coefficient vectors.
cplx horner(const std::vector<cplx>& poly, cplx z);
std::vector<cplx> poly_derivative(const std::vector<cplx>& poly);
std::vector<cplx> poly_taylor_shift(const std::vector<cplx>& poly, cplx a);

// Truncated Taylor data c_n = f^(n)(0)/n!, n = 0..N.
struct TaylorJet {
    std::vector<cplx> coeffs;
    double type_bound = 0.0;
    std::optional<ConvexPolygon> hull_bound;
};

TaylorJet taylor_jet_of(const ExpSum& f, int N);

// Smallest n0 >= 1 such that |c_n|^{1/n} n / e <= type_bound (1 + slack) for
// every nonzero c_n with n >= n0, or nullopt when the last coefficient fails.
std::optional<std::size_t> jet_decay_onset(const TaylorJet& jet, double slack = 0.25);

// Conjugate indicator diagram conv{alpha_j}; empty for the zero function.
ConvexPolygon exact_cid(const ExpSum& f);

// value = mantissa * 2^exp2. Used where iterates outgrow double range.
struct ScaledExpSum {
    ExpSum mantissa;
    std::int64_t exp2 = 0;

    // Rescales by a power of two so the largest coefficient lies in [0.5, 1).
    void renormalize();
    cplx evaluate(cplx z) const;
    // Throws numeric error when the unscaled coefficients leave double range.
    ExpSum to_expsum() const;
    bool finite() const;
};

}  // namespace exptype
