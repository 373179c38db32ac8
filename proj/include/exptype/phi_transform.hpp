#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exptype/borel_polya.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/operators.hpp"

namespace exptype {

// Two source frequencies whose images under phi fell within the dedup
// tolerance and were merged.
struct FrequencyCollision {
    cplx first;
    cplx second;
    cplx image;
};

// Residue form: p e_alpha -> e_{phi(alpha)} sum_k k! p_k E_k(z), where
// E_k(z) = sum_j z^j [t^k] u(t)^j / j! and u(t) = phi(alpha + t) - phi(alpha).
ExpSum phi_transform_exact(const SymbolGerm& phi, const ExpSum& f,
                           std::vector<FrequencyCollision>* collisions = nullptr);

// (1 / 2 pi i) contour integral of B(xi) e^{phi(xi) z}.
cplx phi_transform_contour(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx z);

// Taylor data of the transform: c_n = phi(D)^n f(0) / n!.
TaylorJet phi_transform_taylor(const SymbolGerm& phi, const ExpSum& f, int N);

inline constexpr double default_image_clearance = 0.05;
// (1 / 2 pi i) contour integral of B(xi) / (w - phi(xi)). Domain error
// "phi_transform.inside_image_hull" when w is within `clearance` of the
// convex hull of phi over the contour nodes.
cplx borel_continuation_H(const SymbolGerm& phi, const BorelFunction& B, const Contour& gamma, cplx w,
                          double clearance = default_image_clearance);

enum class ConjugacyCase { derivative, translation, psi };
const char* conjugacy_case_name(ConjugacyCase c);

struct ConjugacyOptions {
    // Region and branch for log(phi); default: hull of f's frequencies + 0.25.
    std::optional<Region> log_region;
    std::optional<SymbolGerm::Branch> log_branch;
    // Germ of psi^{-1}: center c with psi(c) near phi's values, and a region
    // in the image plane. Defaults: Newton solve of psi(c) = phi(centroid),
    // and the hull of phi(frequencies) + 0.25.
    std::optional<cplx> inverse_center;
    std::optional<Region> inverse_region;
    int jobs = 1;
};

struct ConjugacyResidual {
    double max_abs = 0.0;
    double scale = 0.0;  // max |right side| over the grid
    ExpSum left;
    ExpSum right;
};

// Max over the grid of |left - right| for the chosen quasi-conjugacy:
//   derivative:  Phi_phi(phi(D) f)            vs (Phi_phi f)'
//   translation: Phi_{log phi}(phi(D) f)      vs (Phi_{log phi} f)(. + 1)
//   psi:         Phi_{psi^-1 o phi}(phi(D) f) vs psi(D) Phi_{psi^-1 o phi} f
ConjugacyResidual conjugacy_residual(ConjugacyCase which, const SymbolGerm& phi, const std::optional<SymbolGerm>& psi,
                                     const ExpSum& f, std::span<const cplx> grid, const ConjugacyOptions& opts = {});

struct InterpolationReport {
    double max_relative_error = 0.0;
    int worst_n = 0;
    std::vector<double> errors;  // per n, relative
};

// Compares Phi_{log phi} f(n) with phi(D)^n f(0) for 0 <= n <= n_max.
InterpolationReport verify_interpolation(const SymbolGerm& phi, const ExpSum& f, int n_max,
                                         std::optional<Region> region = std::nullopt,
                                         std::optional<SymbolGerm::Branch> branch = std::nullopt);

struct TransformReport {
    ExpSum output;
    ConvexPolygon source_hull;
    ConvexPolygon image_hull;        // hull of phi over samples of the source hull
    double containment_margin = 0.0; // >= 0 when every output frequency is inside
    std::vector<FrequencyCollision> collisions;
    std::optional<double> derivative_residual;
};

inline constexpr double default_containment_inflation = 1e-6;
TransformReport transform_report(const SymbolGerm& phi, const ExpSum& f,
                                 std::span<const cplx> residual_grid = {},
                                 double inflation = default_containment_inflation);

}  // namespace exptype
