#include "exptype/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "exptype/error.hpp"
#include "exptype/growth.hpp"
#include "exptype/parallel.hpp"
#include "exptype/phi_transform.hpp"

namespace exptype {

DensityEstimate lower_density(std::span<const double> lambda, double r_max, double window_fraction) {
    if (!(r_max > 0)) throw_domain("dynamics.bad_range", "r_max must be positive");
    if (!(window_fraction > 0 && window_fraction <= 1))
        throw_domain("dynamics.bad_window", "window fraction must lie in (0, 1]");
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (!(lambda[i] >= 0) || !std::isfinite(lambda[i]))
            throw_domain("dynamics.bad_sequence", "sequence entries must be finite and nonnegative");
        if (i > 0 && lambda[i] < lambda[i - 1]) throw_domain("dynamics.unsorted", "sequence must be sorted");
    }
    DensityEstimate d;
    d.r_max = r_max;
    d.window_fraction = window_fraction;
    const auto end = std::upper_bound(lambda.begin(), lambda.end(), r_max);
    d.hit_indices.assign(lambda.begin(), end);
    const auto& h = d.hit_indices;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k] <= 0) continue;
        const auto upto = std::upper_bound(h.begin(), h.end(), h[k]) - h.begin();
        const auto below = std::lower_bound(h.begin(), h.end(), h[k]) - h.begin();
        d.ratios.push_back(static_cast<double>(upto) / h[k]);
        d.left_ratios.push_back(static_cast<double>(below) / h[k]);
    }
    // N(r) / r decreases between jumps, so its infimum over the window is a
    // left limit at a jump or the value at r_max.
    const double lo = (1.0 - window_fraction) * r_max;
    double inf = static_cast<double>(h.size()) / r_max;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(h[k] > lo) || (k > 0 && h[k] == h[k - 1])) continue;
        const auto below = std::lower_bound(h.begin(), h.end(), h[k]) - h.begin();
        inf = std::min(inf, static_cast<double>(below) / h[k]);
    }
    d.ldens_proxy = inf;
    if (h.size() >= 3) {
        const double step = h[1] - h[0];
        bool affine = step > 0;
        for (std::size_t k = 2; k < h.size() && affine; ++k)
            affine = std::abs((h[k] - h[k - 1]) - step) <= 1e-9 * std::max(1.0, step);
        if (affine) d.exact_limit = 1.0 / step;
    }
    return d;
}

std::vector<cplx> disk_grid(double radius, int rings, int per_ring) {
    if (!(radius > 0) || rings < 1 || per_ring < 1)
        throw_domain("dynamics.bad_grid", "disk grid needs radius > 0, rings >= 1, per_ring >= 1");
    std::vector<cplx> pts{0.0};
    for (int k = 1; k <= rings; ++k)
        for (int j = 0; j < per_ring; ++j)
            pts.push_back(std::polar(radius * k / rings, 2.0 * pi * j / per_ring));
    return pts;
}

namespace {

double sup_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = std::abs(a[i] - b[i]);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        d = std::max(d, v);
    }
    return d;
}

}  // namespace

OrbitRun orbit_run(const SymbolGerm& phi, const ExpSum& f, std::uint64_t n_max, std::span<const ExpSum> targets,
                   double disk_radius, double epsilon, const OrbitOptions& opts) {
    if (n_max < 1) throw_domain("dynamics.bad_horizon", "n_max must be >= 1");
    for (const auto& t : f.terms())
        if (!phi.valid_at(t.alpha))
            throw_domain("dynamics.outside_validity", "a frequency of f lies outside the symbol's validity");
    const std::vector<cplx> grid = disk_grid(disk_radius, opts.rings, opts.per_ring);
    std::vector<std::vector<cplx>> target_vals;
    for (const auto& g : targets) {
        std::vector<cplx> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = evaluate(g, grid[i]);
        target_vals.push_back(std::move(v));
    }

    OrbitRun run;
    run.hits.resize(targets.size());
    ScaledExpSum state{f, 0};
    state.renormalize();
    for (std::uint64_t n = 0;; ++n) {
        OrbitRecord rec;
        rec.n = n;
        rec.disk_samples.resize(grid.size());
        parallel_for(grid.size(), opts.jobs, [&](std::size_t i) { rec.disk_samples[i] = state.evaluate(grid[i]); });
        for (std::size_t m = 0; m < targets.size(); ++m) {
            const double d = sup_distance(rec.disk_samples, target_vals[m]);
            rec.target_distances.push_back(d);
            if (d < epsilon) run.hits[m].push_back(n);
        }
        if (opts.spot_check_every > 0 && n > 0 && n % opts.spot_check_every == 0) {
            try {
                const double diff = scaled_relative_difference(state, apply_power_scaled(phi, f, n));
                run.spot_checks.push_back({n, diff});
                if (!(diff <= opts.spot_check_tol)) run.spot_checks_passed = false;
            } catch (const Error&) {
                // Power germ unavailable for this symbol; nothing to compare.
            }
        }
        if (opts.keep_states) rec.state = state;
        run.records.push_back(std::move(rec));
        run.last_good_n = n;
        if (n == n_max) break;
        try {
            ScaledExpSum next{apply_operator_exact(phi, state.mantissa), state.exp2};
            next.renormalize();
            if (!next.finite()) throw_numeric("dynamics.non_finite", "iterate is not finite");
            state = std::move(next);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numeric) throw;
            run.aborted = true;
            run.abort_reason = e.what();
            break;
        }
    }
    for (const auto& h : run.hits) {
        std::vector<double> pos(h.begin(), h.end());
        run.densities.push_back(lower_density(pos, static_cast<double>(n_max)));
    }
    return run;
}

namespace {

// Candidate points of K: vertices, edge samples and an interior lattice.
std::vector<cplx> sample_polygon(const ConvexPolygon& K, int lattice) {
    std::vector<cplx> pts = K.vertices();
    const auto& V = K.vertices();
    if (V.size() >= 2) {
        for (std::size_t i = 0; i < V.size(); ++i) {
            const cplx a = V[i], b = V[(i + 1) % V.size()];
            for (int k = 1; k < lattice; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / lattice));
            if (V.size() == 2) break;
        }
    }
    if (K.has_area()) {
        double x0 = V[0].real(), x1 = x0, y0 = V[0].imag(), y1 = y0;
        for (cplx v : V) {
            x0 = std::min(x0, v.real());
            x1 = std::max(x1, v.real());
            y0 = std::min(y0, v.imag());
            y1 = std::max(y1, v.imag());
        }
        for (int i = 1; i < lattice; ++i)
            for (int j = 1; j < lattice; ++j) {
                const cplx p(x0 + (x1 - x0) * i / lattice, y0 + (y1 - y0) * j / lattice);
                if (K.contains(p)) pts.push_back(p);
            }
    }
    return pts;
}

// Greedy farthest-point subset of `pts`, starting from the first entry.
std::vector<cplx> spread_subset(const std::vector<cplx>& pts, std::size_t m) {
    std::vector<cplx> out;
    if (pts.empty()) return out;
    std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
    std::size_t next = 0;
    while (out.size() < std::min(m, pts.size())) {
        out.push_back(pts[next]);
        double best = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            dist[i] = std::min(dist[i], std::abs(pts[i] - out.back()));
            if (dist[i] > best) {
                best = dist[i];
                next = i;
            }
        }
        if (best <= 0.0) break;
    }
    return out;
}

struct Fit {
    std::vector<cplx> coeffs;
    double residual = std::numeric_limits<double>::infinity();
};

// Ridge least squares of target by sum c_j e^{beta_j z} on the circle |z| = R.
Fit fit_exponentials(const std::vector<cplx>& basis, const ExpSum& target, double R, const SteeringOptions& opts) {
    const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index rows = opts.fit_nodes;
    Eigen::MatrixXcd A(rows + m, m);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(rows + m);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const cplx z = std::polar(R, 2.0 * pi * static_cast<double>(i) / static_cast<double>(rows));
        for (Eigen::Index j = 0; j < m; ++j) A(i, j) = std::exp(basis[static_cast<std::size_t>(j)] * z);
        b(i) = evaluate(target, z);
    }
    // Column scaling, then ridge rows.
    Eigen::VectorXd scale(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        scale(j) = A.col(j).head(rows).norm();
        A.col(j).head(rows) /= scale(j);
    }
    A.bottomRows(m) = std::sqrt(opts.ridge) * Eigen::MatrixXcd::Identity(m, m);
    const Eigen::VectorXcd x = A.colPivHouseholderQr().solve(b);
    Fit fit;
    for (Eigen::Index j = 0; j < m; ++j) fit.coeffs.push_back(x(j) / scale(j));
    double res = 0.0;
    for (int i = 0; i < opts.check_nodes; ++i) {
        const cplx z = std::polar(R, 2.0 * pi * i / opts.check_nodes);
        cplx s = 0.0;
        for (std::size_t j = 0; j < basis.size(); ++j) s += fit.coeffs[j] * std::exp(basis[j] * z);
        res = std::max(res, std::abs(s - evaluate(target, z)));
    }
    fit.residual = res;
    return fit;
}

}  // namespace

SteeringResult godefroy_shapiro_vector(const SymbolGerm& phi, const ConvexPolygon& K,
                                       std::span<const ExpSum> targets, std::span<const std::uint64_t> schedule,
                                       double disk_radius, double tol, const SteeringOptions& opts) {
    if (targets.size() != schedule.size())
        throw_domain("dynamics.schedule_length", "schedule and target lists differ in length");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw_domain("dynamics.schedule_order", "schedule must be increasing");
    if (!(disk_radius > 0) || !(tol > 0)) throw_domain("dynamics.bad_tolerance", "radius and tol must be positive");
    SteeringResult out;
    if (targets.empty()) {
        out.report.success = true;
        return out;
    }
    if (K.empty()) throw_domain("dynamics.empty_set", "K must be nonempty");
    const PredicateResult pred = hypercyclicity_predicate(phi, K);
    if (pred.verdict == Verdict::no)
        throw_domain("dynamics.not_hypercyclic", "phi(K) does not meet the unit circle (" + pred.reason + ")");

    const std::vector<cplx> candidates = sample_polygon(K, 24);
    std::vector<double> mods;
    for (cplx p : candidates) mods.push_back(phi.valid_at(p) ? std::abs(phi.value(p)) : std::nan(""));

    auto region = [&](bool expanding, double& delta) {
        std::vector<std::pair<double, cplx>> pts;
        for (delta = opts.delta; delta >= 1.0 / 64; delta *= 0.5) {
            pts.clear();
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                const double a = mods[i];
                if (std::isnan(a) || a == 0.0) continue;
                if (expanding ? a > 1.0 + delta : a < 1.0 / (1.0 + delta)) pts.push_back({a, candidates[i]});
            }
            if (!pts.empty()) break;
        }
        // Start the spread from the most extreme modulus.
        std::stable_sort(pts.begin(), pts.end(), [&](const auto& x, const auto& y) {
            return expanding ? x.first > y.first : x.first < y.first;
        });
        std::vector<cplx> p;
        for (const auto& x : pts) p.push_back(x.second);
        return p;
    };

    const std::size_t M = targets.size();
    auto& rep = out.report;
    rep.pieces.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        SteeringPiece& piece = rep.pieces[m];
        piece.time = schedule[m];
        piece.expanding = !(M > 1 && m == 0);
        const std::vector<cplx> pool = region(piece.expanding, piece.delta);
        if (pool.empty()) {
            rep.failure = std::string("no sampled point of K with |phi| ") +
                          (piece.expanding ? "> 1" : "< 1") + " for target " + std::to_string(m);
            return out;
        }
        Fit best;
        std::vector<cplx> basis;
        for (int size = 8; size <= opts.max_basis; size += 8) {
            std::vector<cplx> trial = spread_subset(pool, static_cast<std::size_t>(size));
            Fit fit = fit_exponentials(trial, targets[m], disk_radius, opts);
            if (fit.residual < best.residual) {
                best = fit;
                basis = trial;
            }
            if (best.residual <= 0.5 * tol || trial.size() < static_cast<std::size_t>(size)) break;
        }
        piece.basis = basis;
        piece.coefficients = best.coeffs;
        piece.fit_residual = best.residual;
        if (best.residual > 0.5 * tol) {
            rep.failure = "fit residual " + std::to_string(best.residual) + " exceeds tol/2 for target " +
                          std::to_string(m) + " at basis size " + std::to_string(basis.size());
            return out;
        }
    }

    // f = sum_m sum_j c_mj phi(beta_j)^{-N_m} e_{beta_j}.
    std::vector<std::vector<cplx>> phis(M);
    std::vector<ExpMonomial> terms;
    for (std::size_t m = 0; m < M; ++m) {
        const auto& piece = rep.pieces[m];
        for (std::size_t j = 0; j < piece.basis.size(); ++j) {
            const cplx w = phi.value(piece.basis[j]);
            phis[m].push_back(w);
            const cplx c = piece.coefficients[j] * std::exp(-static_cast<double>(piece.time) * std::log(w));
            terms.push_back({piece.basis[j], {c}});
        }
    }
    out.vector = ExpSum(terms);

    bool ok = true;
    for (std::size_t m = 0; m < M; ++m) {
        SteeringPiece& piece = rep.pieces[m];
        std::vector<ExpMonomial> cross;
        double bound = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            if (k == m) continue;
            const auto& other = rep.pieces[k];
            const double gap = static_cast<double>(piece.time) - static_cast<double>(other.time);
            for (std::size_t j = 0; j < other.basis.size(); ++j) {
                const cplx c = other.coefficients[j] * std::exp(gap * std::log(phis[k][j]));
                cross.push_back({other.basis[j], {c}});
                bound += std::abs(c) * std::exp(std::abs(other.basis[j]) * disk_radius);
            }
        }
        const ExpSum cs(cross);
        double sup = 0.0;
        for (int i = 0; i < opts.check_nodes; ++i)
            sup = std::max(sup, std::abs(evaluate(cs, std::polar(disk_radius, 2.0 * pi * i / opts.check_nodes))));
        piece.cross_term_sup = sup;
        piece.cross_term_bound = bound;
        piece.certified_bound = piece.fit_residual + bound;
        if (!(piece.certified_bound <= tol) && ok) {
            ok = false;
            rep.failure = "schedule spacing insufficient for target " + std::to_string(m) + ": certified bound " +
                          std::to_string(piece.certified_bound) + " > tol";
        }
    }
    rep.success = ok;
    return out;
}

const char* probe_mode_name(ProbeMode m) { return m == ProbeMode::sector ? "sector" : "decay"; }

ProbeReport fhc_obstruction_probe(const SymbolGerm& phi, cplx lambda, const ExpSum& f, std::uint64_t n_max) {
    if (n_max < 1) throw_domain("dynamics.bad_horizon", "n_max must be >= 1");
    const ConvexPolygon K = exact_cid(f);
    if (!K.is_point() || std::abs(K.vertices().front() - lambda) > 1e-9)
        throw_domain("dynamics.probe_seed", "the seed must be p e_lambda with a single frequency lambda");
    if (!phi.valid_at(lambda)) throw_domain("dynamics.outside_validity", "lambda lies outside the symbol's validity");
    ProbeReport rep;
    rep.lambda = lambda;
    rep.phi_at_lambda = phi.value(lambda);

    if (std::abs(rep.phi_at_lambda) < 1.0) {
        rep.mode = ProbeMode::decay;
        rep.note = "|phi(lambda)| < 1: phi(D)^n f(0) -> 0";
        ExpSum g = f;
        for (std::uint64_t n = 0; n <= n_max; ++n) {
            if (n > 0) g = apply_operator_exact(phi, g);
            rep.values.push_back(evaluate(g, 0.0));
        }
        return rep;
    }

    // h(n) through the normalized symbol phi / phi(lambda).
    const SymbolGerm normalized = SymbolGerm::product(phi, SymbolGerm::constant(1.0 / rep.phi_at_lambda));
    ExpSum g = f;
    for (std::uint64_t n = 0; n <= n_max; ++n) {
        if (n > 0) g = apply_operator_exact(normalized, g);
        const cplx h = evaluate(g, 0.0);
        rep.values.push_back(h);
        const bool inside = std::abs(h) > 0.0 && std::abs(std::arg(h)) <= probe_sector_half_angle;
        rep.in_sector.push_back(inside);
        if (!inside) rep.sector_exits.push_back(n);
    }

    for (double clearance : {0.25, 0.1, 0.02}) {
        try {
            const SymbolGerm lg = SymbolGerm::logarithm(normalized, Region{ConvexPolygon::point(lambda), clearance},
                                                        SymbolGerm::Branch{lambda, 0.0});
            rep.interpolant = phi_transform_exact(lg, f);
            rep.interpolant_used = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!rep.interpolant_used) rep.note = "log of the normalized symbol unavailable near lambda; integer samples only";

    const int inner = rep.interpolant_used ? 32 : 0;
    std::vector<std::vector<cplx>> samples;
    double scale = 0.0;
    for (std::uint64_t n = 0; n < n_max; ++n) {
        std::vector<cplx> s{rep.values[n]};
        for (int k = 1; k <= inner; ++k)
            s.push_back(evaluate(rep.interpolant, static_cast<double>(n) + static_cast<double>(k) / (inner + 1)));
        s.push_back(rep.values[n + 1]);
        for (cplx v : s) scale = std::max(scale, std::abs(v));
        samples.push_back(std::move(s));
    }
    const double thr = 1e-12 * scale;
    auto changes = [&](const std::vector<cplx>& s, bool real_part) {
        bool pos = false, neg = false;
        for (cplx v : s) {
            const double x = real_part ? v.real() : v.imag();
            pos = pos || x > thr;
            neg = neg || x < -thr;
        }
        return pos && neg;
    };
    std::vector<double> either;
    for (std::uint64_t n = 0; n < n_max; ++n) {
        const bool re = changes(samples[n], true);
        const bool im = changes(samples[n], false);
        if (re) rep.re_sign_changes.push_back(n);
        if (im) rep.im_sign_changes.push_back(n);
        if (re || im) either.push_back(static_cast<double>(n));
    }
    rep.sign_change_density = lower_density(either, static_cast<double>(n_max));
    return rep;
}

UnimodularArc unimodular_arc(const SymbolGerm& phi, const ConvexPolygon& K, int resolution) {
    if (K.empty()) throw_domain("dynamics.empty_set", "K must be nonempty");
    UnimodularArc arc;
    std::vector<double> args;
    auto on_circle = [&](cplx z) { return phi.valid_at(z) && std::abs(std::abs(phi.value(z)) - 1.0) <= 1e-9; };
    if (K.has_area()) {
        const auto& V = K.vertices();
        Window w{V[0].real(), V[0].real(), V[0].imag(), V[0].imag()};
        for (cplx v : V) {
            w.xmin = std::min(w.xmin, v.real());
            w.xmax = std::max(w.xmax, v.real());
            w.ymin = std::min(w.ymin, v.imag());
            w.ymax = std::max(w.ymax, v.imag());
        }
        const LevelSetTrace trace = level_set_trace(phi, w, resolution);
        for (const auto& line : trace.polylines)
            for (std::size_t i = 0; i + 1 < line.size(); ++i)
                if (K.contains(line[i], 1e-9) && K.contains(line[i + 1], 1e-9)) {
                    arc.length_in_K += std::abs(line[i + 1] - line[i]);
                    args.push_back(std::arg(phi.value(line[i])));
                    args.push_back(std::arg(phi.value(line[i + 1])));
                }
    } else {
        // Point or segment: walk it and keep runs on the circle.
        const auto& V = K.vertices();
        const cplx a = V.front(), b = V.back();
        const int N = 1024;
        cplx prev = a;
        bool prev_on = on_circle(a);
        for (int k = 1; k <= N && V.size() > 1; ++k) {
            const cplx z = a + (b - a) * (static_cast<double>(k) / N);
            const bool on = on_circle(z);
            if (on && prev_on) {
                arc.length_in_K += std::abs(z - prev);
                args.push_back(std::arg(phi.value(prev)));
                args.push_back(std::arg(phi.value(z)));
            }
            prev = z;
            prev_on = on;
        }
    }
    if (!args.empty()) {
        std::sort(args.begin(), args.end());
        double gap = args.front() + 2.0 * pi - args.back();
        for (std::size_t i = 1; i < args.size(); ++i) gap = std::max(gap, args[i] - args[i - 1]);
        arc.arg_span = 2.0 * pi - gap;
    }
    arc.has_arc = arc.length_in_K > 1e-6 && arc.arg_span > 1e-6;
    return arc;
}

}  // namespace exptype
