#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exptype/convex_geom.hpp"
#include "exptype/exp_core.hpp"
#include "exptype/operators.hpp"

namespace exptype {

struct DensityEstimate {
    std::vector<double> hit_indices;   // sorted
    std::vector<double> ratios;        // #{lambda <= lambda_k} / lambda_k at each positive hit
    std::vector<double> left_ratios;   // #{lambda < lambda_k} / lambda_k (counting ratio just before the hit)
    double ldens_proxy = 0.0;          // inf of #{lambda <= r} / r over the trailing window
    std::optional<double> exact_limit; // 1/step for affine sequences
    double r_max = 0.0;
    double window_fraction = 0.2;
};

inline constexpr double default_density_window = 0.2;

// Counting-ratio curve of a sorted nonnegative sequence up to r_max; the
// liminf proxy is the infimum of the ratio over [(1 - window) r_max, r_max].
DensityEstimate lower_density(std::span<const double> lambda, double r_max,
                              double window_fraction = default_density_window);

// Polar test grid on the closed disk |z| <= radius: the centre plus `rings`
// circles of `per_ring` points.
std::vector<cplx> disk_grid(double radius, int rings = 6, int per_ring = 32);

struct OrbitRecord {
    std::uint64_t n = 0;
    ScaledExpSum state;                    // phi(D)^n f with exponent ledger
    std::vector<cplx> disk_samples;        // state on the disk grid
    std::vector<double> target_distances;  // sup over the grid of |state - target|
};

struct SpotCheck {
    std::uint64_t n;
    double relative_difference;  // against the power-germ path
};

struct OrbitOptions {
    int rings = 6;
    int per_ring = 32;
    std::uint64_t spot_check_every = 10;
    double spot_check_tol = 1e-6;
    bool keep_states = true;
    int jobs = 1;
};

struct OrbitRun {
    std::vector<OrbitRecord> records;  // n = 0..last_good_n
    std::vector<std::vector<std::uint64_t>> hits;  // per target
    std::vector<DensityEstimate> densities;        // per target
    std::vector<SpotCheck> spot_checks;
    bool spot_checks_passed = true;
    bool aborted = false;
    std::uint64_t last_good_n = 0;
    std::string abort_reason;
};

OrbitRun orbit_run(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n_max, std::span<const ExpSum> targets,
                   double disk_radius, double epsilon, const OrbitOptions& opts = {});

struct SteeringPiece {
    std::uint64_t time = 0;
    bool expanding = true;               // basis drawn from |phi| > 1 + delta, else |phi| < 1 / (1 + delta)
    double delta = 0.0;
    std::vector<cplx> basis;
    std::vector<cplx> coefficients;      // c_j, so phi(D)^time piece = sum c_j e_{beta_j}
    double fit_residual = 0.0;           // sup on the disk boundary of |sum c_j e_{beta_j} - target|
    double cross_term_sup = 0.0;         // sampled sup of the other pieces at this time
    double cross_term_bound = 0.0;       // triangle-inequality bound of the same
    double certified_bound = 0.0;        // fit_residual + cross_term_bound
};

struct SteeringReport {
    bool success = false;
    std::string failure;
    std::vector<SteeringPiece> pieces;
};

struct SteeringResult {
    ExpSum vector;
    SteeringReport report;
};

struct SteeringOptions {
    double delta = 0.5;       // halved (down to 1/64) while a region is empty
    int max_basis = 40;
    double ridge = 1e-10;
    int fit_nodes = 128;      // boundary nodes used in the fit
    int check_nodes = 1024;   // boundary nodes used for residuals
};

// Finite orbit-steering certificate: f with phi(D)^{N_m} f within tol of
// target m on |z| <= disk_radius. The first of several targets is carried by
// contracting eigenfrequencies, the others by expanding ones.
SteeringResult godefroy_shapiro_vector(const SymbolGerm& phi, const ConvexPolygon& K,
                                       std::span<const ExpSum> targets, std::span<const std::uint64_t> schedule,
                                       double disk_radius, double tol, const SteeringOptions& opts = {});

enum class ProbeMode { sector, decay };
const char* probe_mode_name(ProbeMode m);

struct ProbeReport {
    ProbeMode mode = ProbeMode::sector;
    cplx lambda = 0.0;
    cplx phi_at_lambda = 0.0;
    std::vector<cplx> values;         // h(n) = phi(D)^n f(0) / phi(lambda)^n, or phi(D)^n f(0) in decay mode
    std::vector<bool> in_sector;      // |arg h(n)| <= pi / 5
    std::vector<std::uint64_t> sector_exits;
    std::vector<std::uint64_t> re_sign_changes;  // n with a sign change of Re h on [n, n+1]
    std::vector<std::uint64_t> im_sign_changes;
    bool interpolant_used = false;    // false: integer samples only
    ExpSum interpolant;               // h(x) on the real line when available
    DensityEstimate sign_change_density;  // union of Re and Im intervals
    std::string note;
};

inline constexpr double probe_sector_half_angle = pi / 5.0;

ProbeReport fhc_obstruction_probe(const SymbolGerm& phi, cplx lambda, const ExpSum& f, std::uint64_t n_max);

struct UnimodularArc {
    bool has_arc = false;
    double length_in_K = 0.0;   // length of C_phi inside K
    double arg_span = 0.0;      // angular extent of phi along those pieces
};

// Does phi(K) contain an arc of the unit circle? Traced through C_phi.
UnimodularArc unimodular_arc(const SymbolGerm& phi, const ConvexPolygon& K, int resolution = 256);

}  // namespace exptype
