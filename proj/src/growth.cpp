#include "exptype/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>


#include <Eigen/Dense>

#include "exptype/error.hpp"
#include "exptype/parallel.hpp"

namespace exptype {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

void require_samples(int samples) {
    if (samples < 64) throw_domain("growth.too_few_samples", "at least 64 angular samples are required");
}

// Vertex of the parabola through (-1, a), (0, b), (1, c), as an offset in [-1, 1].
double parabola_vertex(double a, double b, double c) {
    const double denom = a - 2.0 * b + c;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
}

}  // namespace

LogModulus log_modulus_of(const Evaluator& f) {
    return [f](cplx z) { return std::log(std::abs(f(z))); };
}

LogModulus log_modulus_of(const ExpSum& f) {
    return [f](cplx z) { return log_abs_evaluate(f, z); };
}

MaxModulus log_max_modulus(const LogModulus& logf, double r, int samples) {
    require_samples(samples);
    if (r < 0.0) throw_domain("growth.negative_radius", "radius must be >= 0");
    const double step = 2.0 * pi / samples;
    std::vector<double> vals(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) vals[k] = logf(std::polar(r, -pi + step * k));
    const auto best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    MaxModulus m{vals[best], -pi + step * best};
    const double a = vals[(best + samples - 1) % samples];
    const double c = vals[(best + 1) % samples];
    if (std::isfinite(a) && std::isfinite(c) && std::isfinite(m.value)) {
        const double theta = m.theta + step * parabola_vertex(a, m.value, c);
        const double v = logf(std::polar(r, theta));
        if (v > m.value) m = {v, theta};
    }
    return m;
}

MaxModulus max_modulus(const Evaluator& f, double r, int samples) {
    MaxModulus m = log_max_modulus(log_modulus_of(f), r, samples);
    m.value = std::exp(m.value);
    return m;
}

double lp_average(const Evaluator& f, double r, double p, int samples) {
    require_samples(samples);
    if (r < 0.0) throw_domain("growth.negative_radius", "radius must be >= 0");
    if (!(p >= 1.0) || !std::isfinite(p)) throw_domain("growth.bad_exponent", "p must lie in [1, inf)");
    std::vector<double> mods(static_cast<std::size_t>(samples));
    const double step = 2.0 * pi / samples;
    for (int k = 0; k < samples; ++k) mods[k] = std::abs(f(std::polar(r, -pi + step * k)));
    const double m = *std::max_element(mods.begin(), mods.end());
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : mods) acc += std::pow(v / m, p);
    return m * std::pow(acc / samples, 1.0 / p);
}

TypeEstimate exp_type_estimate(const LogModulus& logf, std::span<const double> ladder, int samples) {
    if (ladder.size() < 4) throw_domain("growth.short_ladder", "radius ladder needs at least 4 rungs");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i - 1])) throw_domain("growth.ladder_order", "radius ladder must be increasing");
    TypeEstimate est;
    for (double r : ladder) est.log_max.push_back(log_max_modulus(logf, r, samples).value);
    const std::size_t lo = ladder.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t i = lo; i < ladder.size(); ++i) {
        if (!std::isfinite(est.log_max[i])) continue;
        sx += ladder[i];
        sy += est.log_max[i];
        sxx += ladder[i] * ladder[i];
        sxy += ladder[i] * est.log_max[i];
        n += 1;
    }
    const double denom = n * sxx - sx * sx;
    est.regression = (n >= 2 && denom > 0) ? (n * sxy - sx * sy) / denom : 0.0;
    return est;
}

TypeEstimate exp_type_estimate(const ExpSum& f, std::span<const double> ladder, int samples) {
    TypeEstimate est = exp_type_estimate(log_modulus_of(f), ladder, samples);
    est.exact = exact_cid(f).max_modulus();
    return est;
}

const char* indicator_method_name(IndicatorMethod m) {
    return m == IndicatorMethod::exact_support ? "exact-support" : "radial-regression";
}

std::vector<double> theta_grid(int n) {
    if (n < 1) throw_domain("growth.bad_grid", "theta grid needs at least one node");
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[k] = -pi + 2.0 * pi * k / n;
    return t;
}

std::vector<double> uniform_ladder(double r_max, int count) {
    if (count < 1 || !(r_max > 0)) throw_domain("growth.bad_ladder", "ladder needs r_max > 0 and count >= 1");
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) r[k - 1] = r_max * k / count;
    return r;
}

IndicatorProfile indicator_exact(const ExpSum& f, std::span<const double> thetas) {
    IndicatorProfile p;
    p.method = IndicatorMethod::exact_support;
    p.thetas.assign(thetas.begin(), thetas.end());
    const ConvexPolygon K = exact_cid(f);
    for (double t : thetas) p.h_values.push_back(K.empty() ? neg_inf : support_function(K, std::polar(1.0, t)));
    p.low_confidence.assign(thetas.size(), false);
    p.rejected_samples.assign(thetas.size(), 0);
    return p;
}

IndicatorProfile indicator_regression(const LogModulus& logf, std::span<const double> thetas,
                                      std::span<const double> r_ladder, const RegressionOptions& opts) {
    if (r_ladder.size() < 4) throw_domain("growth.short_ladder", "radius ladder needs at least 4 rungs");
    IndicatorProfile p;
    p.method = IndicatorMethod::radial_regression;
    p.thetas.assign(thetas.begin(), thetas.end());
    p.r_ladder.assign(r_ladder.begin(), r_ladder.end());
    const std::size_t R = r_ladder.size();
    const std::size_t T = thetas.size();
    const std::size_t lo = static_cast<std::size_t>(std::floor(R * (1.0 - opts.window_fraction)));

    std::vector<std::vector<double>> L(T, std::vector<double>(R - lo));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = lo; k < R; ++k) L[t][k - lo] = logf(std::polar(r_ladder[k], thetas[t]));
    const double cut = std::log(opts.reject_below);

    const std::size_t W = R - lo;
    const std::size_t blocks = std::clamp<std::size_t>(static_cast<std::size_t>(opts.blocks), 2, W);
    p.h_values.assign(T, 0.0);
    p.low_confidence.assign(T, false);
    p.rejected_samples.assign(T, 0);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> xs, ys;
        int rejected = 0;
        double ripple = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t a0 = b * W / blocks;
            const std::size_t a1 = (b + 1) * W / blocks;
            double best = neg_inf;
            double at = 0.0;
            for (std::size_t k = a0; k < a1; ++k) {
                if (L[t][k] > best) {
                    best = L[t][k];
                    at = r_ladder[k + lo];
                }
            }
            // Samples near zeros of f sit far below the local envelope.
            for (std::size_t k = a0; k < a1; ++k)
                if (!(L[t][k] >= best + cut)) ++rejected;
            if (std::isfinite(best)) {
                xs.push_back(at);
                ys.push_back(best);
            }
        }
        // Residual ripple about the one-term model c + h r + m log r + k / r
        // over the window. A second exponential that has not yet separated
        // from the dominant one shows up as a beat the model cannot absorb.
        {
            std::vector<std::size_t> keep;
            double top = neg_inf;
            for (std::size_t k = 0; k < W; ++k) top = std::max(top, L[t][k]);
            for (std::size_t k = 0; k < W; ++k)
                if (L[t][k] >= top - 700.0 && std::isfinite(L[t][k])) keep.push_back(k);
            if (keep.size() >= 8) {
                const double rs = r_ladder[R - 1];
                Eigen::MatrixXd V(static_cast<Eigen::Index>(keep.size()), 4);
                Eigen::VectorXd yv(static_cast<Eigen::Index>(keep.size()));
                for (std::size_t i = 0; i < keep.size(); ++i) {
                    const double x = r_ladder[keep[i] + lo] / rs;
                    const auto row = static_cast<Eigen::Index>(i);
                    V(row, 0) = 1.0;
                    V(row, 1) = x;
                    V(row, 2) = std::log(x);
                    V(row, 3) = 1.0 / x;
                    yv(row) = L[t][keep[i]];
                }
                const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(yv);
                const Eigen::VectorXd res = V * coef - yv;
                ripple = res.maxCoeff() - res.minCoeff();
            } else {
                ripple = std::numeric_limits<double>::infinity();
            }
        }
        p.rejected_samples[t] = rejected;
        if (xs.size() < 2) {
            p.h_values[t] = neg_inf;
            p.low_confidence[t] = true;
            continue;
        }
        Eigen::MatrixXd A(static_cast<Eigen::Index>(xs.size()), 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            A(row, 0) = xs[i];
            A(row, 1) = 1.0;
            y(row) = ys[i];
        }
        const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
        const double slope = coef(0);
        const double n = static_cast<double>(xs.size());
        const double rss = (A * coef - y).squaredNorm();
        p.h_values[t] = slope;
        p.low_confidence[t] = std::sqrt(rss / n) > opts.flag_residual || ripple > opts.flag_ripple ||
                              rejected > opts.flag_rejected_fraction * static_cast<double>(W);
    }
    return p;
}

IndicatorProfile indicator_estimate(const ExpSum& f, std::span<const double> thetas) {
    return indicator_exact(f, thetas);
}

IndicatorProfile indicator_estimate(const LogModulus& logf, std::span<const double> thetas,
                                    std::span<const double> r_ladder, const RegressionOptions& opts) {
    return indicator_regression(logf, thetas, r_ladder, opts);
}

CidEstimate cid_estimate(const IndicatorProfile& profile) {
    const std::size_t T = profile.thetas.size();
    if (T != profile.h_values.size())
        throw_domain("growth.profile_shape", "profile thetas and values differ in length");
    auto flagged = [&](std::size_t i) { return i < profile.low_confidence.size() && profile.low_confidence[i]; };
    auto trusted = [&](std::size_t i) { return std::isfinite(profile.h_values[i]) && !flagged(i); };

    // Each trusted ray with trusted neighbours gives a contact point
    // u = e^{-i theta} (h - i h'). Their hull is an inner estimate of the
    // diagram, used in place of flagged rays.
    std::vector<cplx> contacts;
    if (T >= 3) {
        for (std::size_t i = 0; i < T; ++i) {
            const std::size_t prev = (i + T - 1) % T, next = (i + 1) % T;
            if (!trusted(i) || !trusted(prev) || !trusted(next)) continue;
            double span = profile.thetas[next] - profile.thetas[prev];
            while (span <= 0.0) span += 2.0 * pi;
            const double dh = (profile.h_values[next] - profile.h_values[prev]) / span;
            contacts.push_back(std::polar(1.0, -profile.thetas[i]) * cplx(profile.h_values[i], -dh));
        }
    }
    const ConvexPolygon inner = convex_hull(contacts);

    // The trusted rays alone give an outer estimate; a flagged ray's own value
    // is clamped between the two.
    std::vector<SupportSample> samples;
    for (std::size_t i = 0; i < T; ++i)
        if (trusted(i)) samples.push_back({profile.thetas[i], profile.h_values[i]});
    std::optional<ConvexPolygon> outer;
    if (samples.size() >= 3 && samples.size() < T) {
        const SupportReconstruction rec = polygon_from_support_samples(samples);
        if (rec.feasible && !rec.polygon.empty()) outer = rec.polygon;
    }
    for (std::size_t i = 0; i < T; ++i) {
        if (trusted(i)) continue;
        const cplx dir = std::polar(1.0, profile.thetas[i]);
        double h = profile.h_values[i];
        if (!inner.empty()) {
            const double lo = support_function(inner, dir);
            double hi = outer ? support_function(*outer, dir) : std::numeric_limits<double>::infinity();
            hi = std::max(hi, lo);
            h = std::isfinite(h) ? std::clamp(h, lo, hi) : lo;
        }
        if (std::isfinite(h)) samples.push_back({profile.thetas[i], h});
    }
    std::sort(samples.begin(), samples.end(),
              [](const SupportSample& a, const SupportSample& b) { return a.theta < b.theta; });
    std::vector<double> t;
    for (const auto& x : samples) t.push_back(x.theta);
    std::sort(t.begin(), t.end());
    double gap = t.empty() ? 2.0 * pi : t.front() + 2.0 * pi - t.back();
    for (std::size_t i = 1; i < t.size(); ++i) gap = std::max(gap, t[i] - t[i - 1]);
    if (t.size() < 3 || gap >= 0.5 * pi)
        throw_domain("growth.profile_coverage", "profile does not cover the full circle");

    const SupportReconstruction rec = polygon_from_support_samples(samples);
    CidEstimate est;
    est.polygon = rec.polygon;
    est.feasible = rec.feasible;
    est.rays_used = static_cast<int>(samples.size());
    return est;
}

namespace {

// Envelope of one term's contribution: log(sum_k |p_k| r^k) - delta r.
double term_envelope(const ExpMonomial& t, double delta, double r) {
    double acc = 0.0;
    double rk = 1.0;
    for (cplx c : t.poly) {
        acc += std::abs(c) * rk;
        rk *= r;
    }
    return std::log(acc) - delta * r;
}

}  // namespace

SeminormResult seminorm(const ExpSum& f, const ConvexPolygon& K, int n) {
    if (n < 1) throw_domain("growth.bad_seminorm_index", "seminorm index n must be >= 1");
    if (K.empty()) throw_domain("growth.empty_set", "seminorm needs a nonempty convex set");
    SeminormResult res;
    if (f.is_zero()) return res;
    const double relax = 1.0 / n;
    const double boundary_tol = 1e-12;
    std::vector<double> deltas;
    for (const auto& t : f.terms()) {
        const double d = K.distance_to(t.alpha);
        const double delta = relax - d;
        if (delta < -boundary_tol || (std::abs(delta) <= boundary_tol && t.degree() > 0)) {
            res.finite = false;
            res.value = std::numeric_limits<double>::infinity();
            return res;
        }
        deltas.push_back(std::max(delta, 0.0));
    }

    // Radius past which every term envelope has decayed by e^-36 from its peak.
    double r_max = 1.0;
    double scale_r = 1.0;
    for (const auto& t : f.terms()) scale_r = std::max(scale_r, std::abs(t.alpha));
    for (std::size_t j = 0; j < f.terms().size(); ++j) {
        const auto& t = f.terms()[j];
        if (deltas[j] <= boundary_tol) {
            r_max = std::max(r_max, 50.0 * scale_r);
            continue;
        }
        double peak = term_envelope(t, deltas[j], 0.0);
        double r = 0.0;
        while (r < 1e4) {
            r += std::max(0.05, 0.02 * r);
            const double e = term_envelope(t, deltas[j], r);
            peak = std::max(peak, e);
            if (e < peak - 36.0 && term_envelope(t, deltas[j], 1.01 * r) < e) break;
        }
        r_max = std::max(r_max, std::min(r, 1e4));
    }
    res.tail_radius = r_max;
    for (std::size_t j = 0; j < f.terms().size(); ++j)
        res.tail_bound += std::exp(term_envelope(f.terms()[j], deltas[j], r_max));

    auto objective = [&](double r, double theta) {
        const cplx z = std::polar(r, theta);
        return log_abs_evaluate(f, z) - support_function(K, z) - r * relax;
    };

    const int rays = 64;
    const int rungs = 200;
    struct Candidate {
        double value, r, theta;
    };
    std::vector<Candidate> cands;
    cands.push_back({objective(0.0, 0.0), 0.0, 0.0});
    const double r_min = 1e-3;
    for (int k = 0; k < rungs; ++k) {
        const double r = r_min * std::pow(r_max / r_min, static_cast<double>(k) / (rungs - 1));
        for (int a = 0; a < rays; ++a) {
            const double th = -pi + 2.0 * pi * a / rays;
            cands.push_back({objective(r, th), r, th});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
    Candidate best = cands.front();
    const std::size_t polish = std::min<std::size_t>(8, cands.size());
    for (std::size_t c = 0; c < polish; ++c) {
        Candidate cur = cands[c];
        if (!std::isfinite(cur.value)) continue;
        double dr = 0.1 * cur.r + 0.01;
        double dt = 2.0 * pi / rays;
        for (int it = 0; it < 4000 && (dt > 1e-10 || dr > 1e-10 * (1.0 + cur.r)); ++it) {
            bool moved = false;
            const double steps[4][2] = {{dr, 0}, {-dr, 0}, {0, dt}, {0, -dt}};
            for (const auto& s : steps) {
                const double r = std::max(0.0, cur.r + s[0]);
                const double th = cur.theta + s[1];
                const double v = objective(r, th);
                if (v > cur.value) {
                    cur = {v, r, th};
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                dr *= 0.5;
                dt *= 0.5;
            }
        }
        if (cur.value > best.value) best = cur;
    }
    res.value = std::exp(best.value);
    res.argmax = std::polar(best.r, best.theta);
    return res;
}

E2Norm e2_norm(const TaylorJet& jet, const ComparisonFunction& a) {
    if (jet.coeffs.size() > a.a.size())
        throw_domain("growth.comparison_too_short", "comparison function is shorter than the jet");
    E2Norm out;
    double sum = 0.0;
    for (std::size_t k = 0; k < jet.coeffs.size(); ++k) {
        if (!(a.a[k] > 0)) throw_domain("growth.nonpositive_comparison", "a_n must be positive");
        const double term = std::norm(jet.coeffs[k]) / (a.a[k] * a.a[k]);
        sum += term;
        out.last_term = term;
    }
    out.value = std::sqrt(sum);
    out.tail_significant = sum > 0 && out.last_term > 1e-12 * sum;
    return out;
}

Admissibility admissibility_check(const ComparisonFunction& a) {
    Admissibility res;
    auto fail = [&](std::size_t i, std::string why) {
        res.admissible = false;
        res.first_violation = i;
        res.reason = std::move(why);
        return res;
    };
    for (std::size_t i = 0; i < a.a.size(); ++i)
        if (!(a.a[i] > 0) || !std::isfinite(a.a[i])) return fail(i, "a_n must be positive and finite");
    const double slack = 1e-12;
    for (std::size_t i = 0; i + 2 < a.a.size(); ++i) {
        const double q0 = a.a[i + 1] / a.a[i];
        const double q1 = a.a[i + 2] / a.a[i + 1];
        if (!(q1 < q0 * (1.0 - slack))) return fail(i + 1, "ratio a_{n+1}/a_n is not strictly decreasing");
        const double w0 = static_cast<double>(i + 1) * q0;
        const double w1 = static_cast<double>(i + 2) * q1;
        if (w1 > w0 * (1.0 + slack)) return fail(i + 1, "(n+1) a_{n+1}/a_n is increasing");
    }
    return res;
}

namespace {

double symbol_type(const SymbolGerm& phi) {
    switch (phi.kind()) {
        case SymbolGerm::Kind::entire: return exact_cid(*phi.expsum()).max_modulus();
        case SymbolGerm::Kind::product: return symbol_type(*phi.first()) + symbol_type(*phi.second());
        case SymbolGerm::Kind::power: return phi.exponent() * symbol_type(*phi.first());
        case SymbolGerm::Kind::shift:
        case SymbolGerm::Kind::reciprocal:
        case SymbolGerm::Kind::logarithm: return symbol_type(*phi.first());
        default: return 0.0;
    }
}

// log|phi| clamped to [-50, 50]; NaN outside validity.
double clamped_log(const SymbolGerm& phi, cplx z) {
    if (!phi.valid_at(z)) return std::numeric_limits<double>::quiet_NaN();
    const double v = std::log(std::abs(phi.value(z)));
    if (std::isnan(v)) return v;
    return std::clamp(v, -50.0, 50.0);
}

// Illinois regula falsi on the segment [a, b] where the field changes sign.
cplx refine_crossing(const SymbolGerm& phi, cplx a, cplx b, double fa, double fb) {
    if (std::abs(fa) <= 1e-8) return a;
    if (std::abs(fb) <= 1e-8) return b;
    double ta = 0.0, tb = 1.0;
    int side = 0;
    cplx z = a;
    for (int it = 0; it < 100; ++it) {
        const double t = (ta * fb - tb * fa) / (fb - fa);
        z = a + (b - a) * t;
        const double fz = clamped_log(phi, z);
        if (!std::isfinite(fz)) break;
        if (std::abs(fz) <= 1e-8 || tb - ta <= 1e-15) break;
        if ((fz < 0) == (fa < 0)) {
            ta = t;
            fa = fz;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            tb = t;
            fb = fz;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
    }
    return z;
}

// Radius along the ray at angle theta where log|phi| = 0, by Newton from rho0.
std::optional<double> ray_root(const SymbolGerm& phi, double theta, double rho0) {
    const cplx dir = std::polar(1.0, theta);
    double rho = rho0;
    for (int it = 0; it < 60; ++it) {
        const cplx z = rho * dir;
        if (!phi.valid_at(z)) return std::nullopt;
        const auto T = phi.taylor(z, 1);
        if (T[0] == 0.0) return std::nullopt;
        const double g = std::log(std::abs(T[0]));
        const double dg = (dir * T[1] / T[0]).real();
        if (std::abs(g) <= 1e-14) return rho;
        if (dg == 0.0 || !std::isfinite(dg)) return std::nullopt;
        double next = rho - g / dg;
        if (next < 0.0) next = 0.5 * rho;
        if (std::abs(next - rho) <= 1e-15 * (1.0 + rho)) return next;
        rho = next;
    }
    const double g = std::log(std::abs(phi.value(rho * dir)));
    if (std::abs(g) <= 1e-10) return rho;
    return std::nullopt;
}

}  // namespace

Window default_level_window(const SymbolGerm& phi) {
    const double h = 2.0 + symbol_type(phi);
    return {-h, h, -h, h};
}

LevelSetTrace level_set_trace(const SymbolGerm& phi, const Window& window, int resolution, int jobs) {
    if (resolution < 2) throw_domain("growth.bad_resolution", "level-set resolution must be >= 2");
    if (!(window.xmax > window.xmin) || !(window.ymax > window.ymin))
        throw_domain("growth.bad_window", "window must have positive width and height");
    for (cplx c : {cplx(window.xmin, window.ymin), cplx(window.xmax, window.ymin), cplx(window.xmax, window.ymax),
                   cplx(window.xmin, window.ymax)})
        if (!phi.valid_at(c)) throw_domain("growth.window_outside_validity", "window corner outside symbol validity");

    LevelSetTrace trace;
    trace.window = window;
    trace.resolution = resolution;
    const int N = resolution;
    const double hx = (window.xmax - window.xmin) / N;
    const double hy = (window.ymax - window.ymin) / N;
    auto node = [&](int i, int j) { return cplx(window.xmin + hx * i, window.ymin + hy * j); };
    const std::size_t stride = static_cast<std::size_t>(N) + 1;
    std::vector<double> F(stride * stride);
    parallel_for(stride, jobs, [&](std::size_t j) {
        for (std::size_t i = 0; i < stride; ++i)
            F[j * stride + i] = clamped_log(phi, node(static_cast<int>(i), static_cast<int>(j)));
    });
    auto val = [&](int i, int j) { return F[static_cast<std::size_t>(j) * stride + i]; };

    // Edge ids: horizontal (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
    const std::size_t n_h = static_cast<std::size_t>(N) * stride;
    auto h_edge = [&](int i, int j) { return static_cast<std::size_t>(j) * N + i; };
    auto v_edge = [&](int i, int j) { return n_h + static_cast<std::size_t>(j) * stride + i; };
    auto edge_ends = [&](std::size_t e, int& i0, int& j0, int& i1, int& j1) {
        if (e < n_h) {
            j0 = j1 = static_cast<int>(e / N);
            i0 = static_cast<int>(e % N);
            i1 = i0 + 1;
        } else {
            const std::size_t k = e - n_h;
            i0 = i1 = static_cast<int>(k % stride);
            j0 = static_cast<int>(k / stride);
            j1 = j0 + 1;
        }
    };

    std::vector<std::pair<std::size_t, std::size_t>> segments;
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            const double c[4] = {val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
            if (std::isnan(c[0]) || std::isnan(c[1]) || std::isnan(c[2]) || std::isnan(c[3])) continue;
            const bool s[4] = {c[0] >= 0, c[1] >= 0, c[2] >= 0, c[3] >= 0};
            // Edge k joins corner k and corner k+1.
            const std::size_t e[4] = {h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
            std::vector<int> cut;
            for (int k = 0; k < 4; ++k)
                if (s[k] != s[(k + 1) % 4]) cut.push_back(k);
            if (cut.size() == 2) {
                segments.push_back({e[cut[0]], e[cut[1]]});
            } else if (cut.size() == 4) {
                const bool center = clamped_log(phi, node(i, j) + cplx(0.5 * hx, 0.5 * hy)) >= 0;
                if (center == s[0]) {
                    // Corners 0 and 2 connect through the centre; cut off 1 and 3.
                    segments.push_back({e[0], e[1]});
                    segments.push_back({e[2], e[3]});
                } else {
                    segments.push_back({e[3], e[0]});
                    segments.push_back({e[1], e[2]});
                }
            }
        }
    }
    if (segments.empty()) return trace;

    std::vector<std::size_t> edges;
    for (const auto& s : segments) {
        edges.push_back(s.first);
        edges.push_back(s.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<cplx> points(edges.size());
    parallel_for(edges.size(), jobs, [&](std::size_t k) {
        int i0, j0, i1, j1;
        edge_ends(edges[k], i0, j0, i1, j1);
        points[k] = refine_crossing(phi, node(i0, j0), node(i1, j1), val(i0, j0), val(i1, j1));
    });
    auto point_of = [&](std::size_t e) {
        return points[static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), e) - edges.begin())];
    };

    // Chain segments through shared edges.
    std::map<std::size_t, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incident[segments[s].first].push_back(s);
        incident[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    auto walk = [&](std::size_t seg, std::size_t from_edge, std::vector<std::size_t>& out) {
        std::size_t cur = seg;
        std::size_t at = from_edge;
        while (true) {
            used[cur] = true;
            const std::size_t next_edge = segments[cur].first == at ? segments[cur].second : segments[cur].first;
            out.push_back(next_edge);
            std::optional<std::size_t> nxt;
            for (std::size_t cand : incident[next_edge])
                if (!used[cand]) nxt = cand;
            if (!nxt) break;
            cur = *nxt;
            at = next_edge;
        }
    };
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        std::vector<std::size_t> fwd{segments[s].first};
        walk(s, segments[s].first, fwd);
        std::vector<std::size_t> back;
        for (std::size_t cand : incident[segments[s].first])
            if (!used[cand]) {
                walk(cand, segments[s].first, back);
                break;
            }
        std::vector<std::size_t> chain(back.rbegin(), back.rend());
        chain.insert(chain.end(), fwd.begin(), fwd.end());
        Polyline line;
        for (std::size_t e : chain) line.push_back(point_of(e));
        trace.polylines.push_back(std::move(line));
    }

    const OriginDistance d = dist_origin(std::span<const Polyline>(trace.polylines));
    if (d.empty) return trace;
    trace.tau = d.value;
    trace.nearest = d.nearest;

    // Polish: minimise the ray root radius over a small angular bracket.
    const double cell = std::max(hx, hy);
    if (d.value > 1e-12) {
        const double theta0 = std::arg(d.nearest);
        const double w = 2.0 * cell / std::max(d.value, cell);
        double rho_guess = d.value;
        auto radius = [&](double th) {
            const auto r = ray_root(phi, th, rho_guess);
            if (!r) return std::numeric_limits<double>::infinity();
            if (std::abs(*r - d.value) > 4.0 * cell) return std::numeric_limits<double>::infinity();
            return *r;
        };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = theta0 - w, b = theta0 + w;
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = radius(x1), f2 = radius(x2);
        for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = radius(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = radius(x2);
            }
        }
        const double th = 0.5 * (a + b);
        const double r = radius(th);
        const double r0 = radius(theta0);
        const double pick_r = std::min(r, r0);
        if (std::isfinite(pick_r) && pick_r <= d.value + cell) {
            trace.tau = pick_r;
            trace.nearest = std::polar(pick_r, pick_r == r ? th : theta0);
        }
    }
    return trace;
}

}  // namespace exptype
