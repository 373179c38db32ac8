#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exptype/convex_geom.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/operators.hpp"

namespace exptype {

using Evaluator = std::function<cplx(cplx)>;
// log|f(z)|; -inf at zeros. Lets growth estimates run past double range.
using LogModulus = std::function<double(cplx)>;

LogModulus log_modulus_of(const Evaluator& f);
LogModulus log_modulus_of(const ExpSum& f);

struct MaxModulus {
    double value;  // M_f(r)
    double theta;  // argument of the maximiser
};

// Uniform angular samples plus one parabolic polish of the best sample.
MaxModulus max_modulus(const Evaluator& f, double r, int samples = 256);
// log M_f(r), safe for large r.
MaxModulus log_max_modulus(const LogModulus& logf, double r, int samples = 256);
double lp_average(const Evaluator& f, double r, double p, int samples = 256);

struct TypeEstimate {
    double regression = 0.0;        // slope of log M_f(r) over the top half ladder
    std::optional<double> exact;    // max |vertex| of K(f) for exponential polynomials
    std::vector<double> log_max;    // per rung
};

TypeEstimate exp_type_estimate(const LogModulus& logf, std::span<const double> ladder, int samples = 256);
TypeEstimate exp_type_estimate(const ExpSum& f, std::span<const double> ladder, int samples = 256);

enum class IndicatorMethod { exact_support, radial_regression };
const char* indicator_method_name(IndicatorMethod m);

struct IndicatorProfile {
    std::vector<double> thetas;
    std::vector<double> h_values;
    std::vector<double> r_ladder;
    IndicatorMethod method = IndicatorMethod::exact_support;
    std::vector<bool> low_confidence;   // per ray (regression only)
    std::vector<int> rejected_samples;  // per ray (regression only)
};

// Uniform grid of n angles on [-pi, pi).
std::vector<double> theta_grid(int n);
// Geometric-free uniform ladder r_k = r_max * k / count, k = 1..count.
std::vector<double> uniform_ladder(double r_max, int count);

// h(theta) = H_{K(f)}(e^{i theta}) from the exact diagram.
IndicatorProfile indicator_exact(const ExpSum& f, std::span<const double> thetas);

struct RegressionOptions {
    int blocks = 24;               // block maxima in the top window
    double window_fraction = 0.5;  // top part of the ladder used for the fit
    double reject_below = 1e-12;   // |f| below reject_below * (block maximum) counts as rejected
    double flag_residual = 0.15;   // rms residual of the block fit that flags a ray
    double flag_rejected_fraction = 0.1;
    double flag_ripple = 1e-3;     // peak-to-peak residual about a one-term model that flags a ray
};

// Slope in r of the block-maximum envelope of log|f(r e^{i theta})|.
IndicatorProfile indicator_regression(const LogModulus& logf, std::span<const double> thetas,
                                      std::span<const double> r_ladder, const RegressionOptions& opts = {});

// Exact-support profile for exponential polynomials, radial regression for
// anything else.
IndicatorProfile indicator_estimate(const ExpSum& f, std::span<const double> thetas);
IndicatorProfile indicator_estimate(const LogModulus& logf, std::span<const double> thetas,
                                    std::span<const double> r_ladder, const RegressionOptions& opts = {});

struct CidEstimate {
    ConvexPolygon polygon;
    bool feasible = true;
    int rays_used = 0;  // rays entering the half-plane system
};

// Half-plane reconstruction from a profile. Low-confidence rays take their
// value from the hull of contact points of the trusted rays.
CidEstimate cid_estimate(const IndicatorProfile& profile);

struct SeminormResult {
    double value = 0.0;   // +inf when the seminorm diverges
    bool finite = true;
    cplx argmax = 0.0;
    double tail_radius = 0.0;  // beyond this radius the integrand is bounded by tail_bound
    double tail_bound = 0.0;
};

// sup_z |f(z)| exp(-H_K(z) - |z| / n).
SeminormResult seminorm(const ExpSum& f, const ConvexPolygon& K, int n);

struct ComparisonFunction {
    std::vector<double> a;
};

struct E2Norm {
    double value = 0.0;
    bool tail_significant = false;  // last term not negligible against the sum
    double last_term = 0.0;
};

E2Norm e2_norm(const TaylorJet& jet, const ComparisonFunction& a);

struct Admissibility {
    bool admissible = true;
    std::optional<std::size_t> first_violation;
    std::string reason;
};

// a_n > 0, a_{n+1}/a_n strictly decreasing (1e-12 relative slack), and
// (n+1) a_{n+1}/a_n non-increasing.
Admissibility admissibility_check(const ComparisonFunction& a);

struct Window {
    double xmin = -1.0;
    double xmax = 1.0;
    double ymin = -1.0;
    double ymax = 1.0;
};

// Square of half-width 2 + (type of the symbol) centred at 0.
Window default_level_window(const SymbolGerm& phi);

struct LevelSetTrace {
    std::vector<Polyline> polylines;
    std::optional<double> tau;  // dist(0, C_phi) inside the window
    cplx nearest = 0.0;
    Window window;
    int resolution = 0;
};

inline constexpr int default_level_resolution = 256;
LevelSetTrace level_set_trace(const SymbolGerm& phi, const Window& window,
                              int resolution = default_level_resolution, int jobs = 1);

}  // namespace exptype
