#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "exptype/acceptance.hpp"
#include "exptype/borel_polya.hpp"
#include "exptype/dynamics.hpp"
#include "exptype/error.hpp"
#include "exptype/growth.hpp"
#include "exptype/operators.hpp"
#include "exptype/phi_transform.hpp"
#include "exptype/serialize.hpp"

#ifndef EXPTYPE_VERSION
#define EXPTYPE_VERSION "0.0.0"
#endif

using namespace exptype;

namespace {

enum ExitCode { exit_ok = 0, exit_domain = 2, exit_numeric = 3, exit_verify = 4 };

struct Common {
    int jobs = 0;
    std::uint64_t seed = 1;
    std::string out;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

cplx complex_flag(const std::string& s, const std::string& name) {
    std::stringstream ss(s);
    std::string re, im;
    std::getline(ss, re, ',');
    std::getline(ss, im);
    try {
        std::size_t used = 0;
        const double r = std::stod(re, &used);
        if (used != re.size()) throw std::invalid_argument(s);
        double i = 0.0;
        if (!im.empty()) {
            i = std::stod(im, &used);
            if (used != im.size()) throw std::invalid_argument(s);
        }
        return {r, i};
    } catch (const std::logic_error&) {
        throw_parse("cli.flag", name + ": expected re or re,im, got '" + s + "'");
    }
}

std::vector<cplx> complex_flags(const std::vector<std::string>& v, const std::string& name) {
    std::vector<cplx> out;
    for (const auto& s : v) out.push_back(complex_flag(s, name));
    return out;
}

class Runner {
public:
    explicit Runner(Common& common) : common_(common) {}

    int jobs() const {
        if (common_.jobs > 0) return common_.jobs;
        if (const char* env = std::getenv("EXPTYPE_JOBS")) {
            const int j = std::atoi(env);
            if (j > 0) return j;
        }
        return 1;
    }

    Json manifest(const CLI::App& sub, const Json& tolerances) const {
        Json inputs = Json::object();
        for (const CLI::Option* opt : sub.get_options()) {
            if (opt->get_name() == "--help" || opt->count() == 0) continue;
            const auto res = opt->results();
            inputs[opt->get_name()] = res.size() == 1 ? Json(res.front()) : Json(res);
        }
        return {{"command", sub.get_name()},
                {"inputs", inputs},
                {"version", EXPTYPE_VERSION},
                {"seed", common_.seed},
                {"jobs", jobs()},
                {"tolerances", tolerances}};
    }

    void emit(const std::string& text) const {
        if (common_.out.empty()) {
            std::cout << text;
            std::cout.flush();
            return;
        }
        std::ofstream f(common_.out, std::ios::binary);
        if (!f) throw_config("cli.io", "cannot write " + common_.out);
        f << text;
    }

    void emit_json(Json body, const CLI::App& sub, const Json& tolerances) const {
        body["manifest"] = manifest(sub, tolerances);
        emit(body.dump(2) + "\n");
    }

    // CSV with the manifest and any extra facts as leading comment lines.
    void emit_csv(const std::string& header, const std::vector<std::string>& rows, const CLI::App& sub,
                  const Json& tolerances, const std::vector<std::string>& notes = {}) const {
        std::string text = "# manifest: " + manifest(sub, tolerances).dump() + "\n";
        for (const auto& n : notes) text += "# " + n + "\n";
        text += header + "\n";
        for (const auto& r : rows) text += r + "\n";
        emit(text);
    }

private:
    Common& common_;
};

Json complex_array(const std::vector<cplx>& v) {
    Json a = Json::array();
    for (cplx z : v) a.push_back(to_json(z));
    return a;
}

Json density_json(const DensityEstimate& d) {
    Json j{{"ldens_proxy", d.ldens_proxy},
           {"count", d.hit_indices.size()},
           {"r_max", d.r_max},
           {"window_fraction", d.window_fraction}};
    j["exact_limit"] = d.exact_limit ? Json(*d.exact_limit) : Json(nullptr);
    return j;
}

std::vector<double> read_sequence(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw_parse("cli.io", "cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<double> out;
    if (first != std::string::npos && text[first] == '[') {
        const Json j = read_json_file(file);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw_parse("cli.parse", file + ": $[" + std::to_string(i) + "]: expected a number");
            out.push_back(j[i].get<double>());
        }
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    for (int lineno = 1; std::getline(lines, line); ++lineno) {
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (tok[0] == '#') break;
            try {
                std::size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::logic_error&) {
                throw_parse("cli.parse", file + ": line " + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and numerical tools for entire functions of exponential type"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", EXPTYPE_VERSION);
    Common common;
    app.add_option("--jobs", common.jobs, "Worker threads (default: EXPTYPE_JOBS or 1)")->check(CLI::PositiveNumber);
    app.add_option("--seed", common.seed, "Seed for randomized suites");
    app.add_option("--out", common.out, "Output file (default: standard output)");
    Runner run(common);
    std::function<int()> action;

    // eval
    std::string f_file, phi_file;
    std::vector<std::string> at;
    auto* eval = app.add_subcommand("eval", "Evaluate an exponential polynomial");
    eval->add_option("--f", f_file, "ExpSum JSON")->required();
    eval->add_option("--at", at, "Point re,im (repeatable)")->required();
    eval->callback([&] {
        action = [&] {
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            Json values = Json::array();
            for (cplx z : complex_flags(at, "--at")) values.push_back({{"z", to_json(z)}, {"value", to_json(evaluate(f, z))}});
            run.emit_json({{"values", values}}, *eval, Json::object());
            return exit_ok;
        };
    });

    // borel
    auto* borel = app.add_subcommand("borel", "Rational Borel transform of an exponential polynomial");
    borel->add_option("--f", f_file, "ExpSum JSON")->required();
    borel->add_option("--at", at, "Evaluation point re,im (repeatable)");
    double pole_proximity = default_pole_proximity;
    borel->add_option("--pole-proximity", pole_proximity, "Refuse evaluation this close to a pole");
    borel->callback([&] {
        action = [&] {
            const RationalBorel B = borel_of_expsum(expsum_from_json(read_json_file(f_file), "f"));
            Json poles = Json::array();
            for (const auto& p : B.poles) poles.push_back({{"alpha", to_json(p.alpha)}, {"principal", complex_array(p.principal)}});
            Json values = Json::array();
            for (cplx xi : complex_flags(at, "--at"))
                values.push_back({{"xi", to_json(xi)}, {"value", to_json(borel_eval(B, xi, pole_proximity))}});
            run.emit_json({{"poles", poles}, {"values", values}}, *borel, {{"pole_proximity", pole_proximity}});
            return exit_ok;
        };
    });

    // polya
    double radius = 2.0;
    int nodes = default_contour_nodes;
    auto* polya = app.add_subcommand("polya", "Reconstruct f from its Borel transform on a circle");
    polya->add_option("--f", f_file, "ExpSum JSON")->required();
    polya->add_option("--at", at, "Point re,im (repeatable)")->required();
    polya->add_option("--radius", radius, "Contour radius (centred at 0)");
    polya->add_option("--nodes", nodes, "Trapezoid nodes");
    polya->callback([&] {
        action = [&] {
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            const auto B = BorelFunction::from_rational(borel_of_expsum(f));
            const auto zs = complex_flags(at, "--at");
            const auto vals = polya_reconstruct_many(B, Contour::circle(0.0, radius, nodes), zs, run.jobs());
            Json out = Json::array();
            double worst = 0.0;
            for (std::size_t i = 0; i < zs.size(); ++i) {
                const double err = std::abs(vals[i] - evaluate(f, zs[i]));
                worst = std::max(worst, err);
                out.push_back({{"z", to_json(zs[i])}, {"value", to_json(vals[i])}, {"error", err}});
            }
            run.emit_json({{"values", out}, {"max_error", worst}}, *polya, {{"radius", radius}, {"nodes", nodes}});
            return exit_ok;
        };
    });

    // apply
    std::uint64_t power = 1;
    auto* apply = app.add_subcommand("apply", "Apply phi(D) (or its n-th iterate) to an exponential polynomial");
    apply->add_option("--phi", phi_file, "Symbol JSON")->required();
    apply->add_option("--f", f_file, "ExpSum JSON")->required();
    apply->add_option("--power", power, "Number of applications");
    apply->callback([&] {
        action = [&] {
            const SymbolGerm phi = symbol_from_json(read_json_file(phi_file), "phi");
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            const ExpSum g = power == 1 ? apply_operator_exact(phi, f) : iterate_operator(phi, f, power);
            run.emit_json(to_json(g), *apply, Json::object());
            return exit_ok;
        };
    });

    // phi
    double inflation = default_containment_inflation;
    auto* phic = app.add_subcommand("phi", "Transform an exponential polynomial by Phi_phi");
    phic->add_option("--phi", phi_file, "Symbol JSON")->required();
    phic->add_option("--f", f_file, "ExpSum JSON")->required();
    phic->add_option("--inflation", inflation, "Containment slack for the image hull");
    phic->callback([&] {
        action = [&] {
            const SymbolGerm phi = symbol_from_json(read_json_file(phi_file), "phi");
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            const TransformReport rep = transform_report(phi, f, {}, inflation);
            Json body = to_json(rep.output);
            body["source_hull"] = to_json(rep.source_hull);
            body["image_hull"] = to_json(rep.image_hull);
            body["containment_margin"] = rep.containment_margin;
            Json col = Json::array();
            for (const auto& c : rep.collisions)
                col.push_back({{"first", to_json(c.first)}, {"second", to_json(c.second)}, {"image", to_json(c.image)}});
            body["collisions"] = col;
            run.emit_json(body, *phic, {{"inflation", inflation}});
            return exit_ok;
        };
    });

    // indicator / cid share the profile options
    int n_theta = 256;
    std::string method = "auto";
    double r_max = 200.0;
    int rungs = 800;
    auto profile = [&](const ExpSum& f) {
        const auto thetas = theta_grid(n_theta);
        if (method == "exact" || method == "auto") return indicator_estimate(f, thetas);
        return indicator_regression(log_modulus_of(f), thetas, uniform_ladder(r_max, rungs));
    };
    auto profile_tolerances = [&] {
        const RegressionOptions ro;
        return Json{{"thetas", n_theta},
                    {"method", method},
                    {"r_max", r_max},
                    {"rungs", rungs},
                    {"blocks", ro.blocks},
                    {"window_fraction", ro.window_fraction},
                    {"flag_residual", ro.flag_residual},
                    {"flag_ripple", ro.flag_ripple}};
    };
    auto add_profile_options = [&](CLI::App* sub) {
        sub->add_option("--f", f_file, "ExpSum JSON")->required();
        sub->add_option("--thetas", n_theta, "Number of angles on [-pi, pi)");
        sub->add_option("--method", method, "auto | exact | regression")
            ->check(CLI::IsMember({"auto", "exact", "regression"}));
        sub->add_option("--r-max", r_max, "Largest radius (regression)");
        sub->add_option("--rungs", rungs, "Radii in the ladder (regression)");
    };
    auto* ind = app.add_subcommand("indicator", "Indicator profile h(theta) as CSV");
    add_profile_options(ind);
    ind->callback([&] {
        action = [&] {
            const auto prof = profile(expsum_from_json(read_json_file(f_file), "f"));
            std::vector<std::string> rows;
            const bool reg = prof.method == IndicatorMethod::radial_regression;
            for (std::size_t k = 0; k < prof.thetas.size(); ++k)
                rows.push_back(num(prof.thetas[k]) + "," + num(prof.h_values[k]) + "," +
                               (reg && prof.low_confidence[k] ? "1" : "0") + "," +
                               std::to_string(reg ? prof.rejected_samples[k] : 0));
            run.emit_csv("theta_rad,h,low_confidence,rejected_samples", rows, *ind, profile_tolerances(),
                         {std::string("method: ") + indicator_method_name(prof.method)});
            return exit_ok;
        };
    });

    auto* cidc = app.add_subcommand("cid", "Conjugate indicator diagram from the indicator profile");
    add_profile_options(cidc);
    cidc->callback([&] {
        action = [&] {
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            const auto prof = profile(f);
            const CidEstimate est = cid_estimate(prof);
            const ConvexPolygon exact = exact_cid(f);
            Json body = to_json(est.polygon);
            body["feasible"] = est.feasible;
            body["rays_used"] = est.rays_used;
            body["method"] = indicator_method_name(prof.method);
            body["exact"] = to_json(exact);
            body["hausdorff_to_exact"] =
                exact.empty() || est.polygon.empty() ? Json(nullptr) : Json(hausdorff_distance(est.polygon, exact));
            run.emit_json(body, *cidc, profile_tolerances());
            return exit_ok;
        };
    });

    // levelset
    std::string window_flag;
    int resolution = default_level_resolution;
    auto* lvl = app.add_subcommand("levelset", "Trace |phi| = 1 as CSV polylines");
    lvl->add_option("--phi", phi_file, "Symbol JSON")->required();
    lvl->add_option("--window", window_flag, "xmin,xmax,ymin,ymax (default: half-width 2 + type)");
    lvl->add_option("--resolution", resolution, "Grid cells per side")->check(CLI::PositiveNumber);
    lvl->callback([&] {
        action = [&] {
            const SymbolGerm phi = symbol_from_json(read_json_file(phi_file), "phi");
            Window w = default_level_window(phi);
            if (!window_flag.empty()) {
                std::vector<double> v;
                std::stringstream ss(window_flag);
                for (std::string tok; std::getline(ss, tok, ',');) {
                    try {
                        v.push_back(std::stod(tok));
                    } catch (const std::logic_error&) {
                        throw_parse("cli.flag", "--window: bad number '" + tok + "'");
                    }
                }
                if (v.size() != 4) throw_parse("cli.flag", "--window: expected xmin,xmax,ymin,ymax");
                w = {v[0], v[1], v[2], v[3]};
            }
            const LevelSetTrace t = level_set_trace(phi, w, resolution, run.jobs());
            std::vector<std::string> rows;
            for (std::size_t i = 0; i < t.polylines.size(); ++i)
                for (cplx p : t.polylines[i]) rows.push_back(std::to_string(i) + "," + num(p.real()) + "," + num(p.imag()));
            const std::string tau = t.tau ? num(*t.tau) : std::string("none");
            run.emit_csv("polyline,x,y", rows, *lvl, {{"resolution", resolution}, {"refine", 1e-8}},
                         {"tau: " + tau, "nearest: " + num(t.nearest.real()) + "," + num(t.nearest.imag()),
                          "window: " + num(w.xmin) + "," + num(w.xmax) + "," + num(w.ymin) + "," + num(w.ymax)});
            return exit_ok;
        };
    });

    // orbit
    std::uint64_t n_max = 20;
    std::vector<std::string> target_files;
    double epsilon = 1e-3;
    double disk = 1.0;
    auto* orb = app.add_subcommand("orbit", "Iterate phi(D) on f and record visits to targets (CSV)");
    orb->add_option("--phi", phi_file, "Symbol JSON")->required();
    orb->add_option("--f", f_file, "ExpSum JSON")->required();
    orb->add_option("--n-max", n_max, "Last iteration")->check(CLI::PositiveNumber);
    orb->add_option("--target", target_files, "Target ExpSum JSON (repeatable)");
    orb->add_option("--epsilon", epsilon, "Hit threshold on the disk");
    orb->add_option("--radius", disk, "Disk radius");
    orb->callback([&] {
        action = [&] {
            const SymbolGerm phi = symbol_from_json(read_json_file(phi_file), "phi");
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            std::vector<ExpSum> targets;
            for (std::size_t i = 0; i < target_files.size(); ++i)
                targets.push_back(expsum_from_json(read_json_file(target_files[i]), "target[" + std::to_string(i) + "]"));
            OrbitOptions oo;
            oo.keep_states = true;
            oo.jobs = run.jobs();
            const OrbitRun r = orbit_run(phi, f, n_max, targets, disk, epsilon, oo);
            std::string header = "n,exp2,max_abs_mantissa,sup_disk";
            for (std::size_t m = 0; m < targets.size(); ++m) header += ",dist_" + std::to_string(m);
            std::vector<std::string> rows;
            for (const auto& rec : r.records) {
                double sup = 0.0;
                for (cplx v : rec.disk_samples) sup = std::max(sup, std::abs(v));
                std::string row = std::to_string(rec.n) + "," + std::to_string(rec.state.exp2) + "," +
                                  num(rec.state.mantissa.max_abs_coefficient()) + "," + num(sup);
                for (double d : rec.target_distances) row += "," + num(d);
                rows.push_back(row);
            }
            std::vector<std::string> notes;
            for (std::size_t m = 0; m < targets.size(); ++m) {
                std::string h;
                for (auto n : r.hits[m]) h += (h.empty() ? "" : " ") + std::to_string(n);
                notes.push_back("hits_" + std::to_string(m) + ": " + h);
                notes.push_back("density_" + std::to_string(m) + ": " + density_json(r.densities[m]).dump());
            }
            notes.push_back(std::string("spot_checks_passed: ") + (r.spot_checks_passed ? "true" : "false"));
            if (r.aborted) notes.push_back("aborted after n = " + std::to_string(r.last_good_n) + ": " + r.abort_reason);
            run.emit_csv(header, rows, *orb,
                         {{"epsilon", epsilon}, {"radius", disk}, {"spot_check_tol", oo.spot_check_tol}}, notes);
            return r.aborted ? exit_numeric : exit_ok;
        };
    });

    // density
    std::string seq_file;
    double dens_r_max = 0.0;
    double window = default_density_window;
    auto* dens = app.add_subcommand("density", "Lower-density proxy of a sorted sequence");
    dens->add_option("--input", seq_file, "Numbers (whitespace separated or a JSON array)")->required();
    dens->add_option("--r-max", dens_r_max, "Range end (default: largest entry)");
    dens->add_option("--window", window, "Trailing window fraction");
    dens->callback([&] {
        action = [&] {
            const auto seq = read_sequence(seq_file);
            const double R = dens_r_max > 0 ? dens_r_max : (seq.empty() ? 1.0 : seq.back());
            run.emit_json(density_json(lower_density(seq, R, window)), *dens, {{"window", window}});
            return exit_ok;
        };
    });

    // probe
    std::string lambda_flag;
    auto* prb = app.add_subcommand("probe", "Normalized sequence phi(D)^n f(0) / phi(lambda)^n for f = p e_lambda");
    prb->add_option("--phi", phi_file, "Symbol JSON")->required();
    prb->add_option("--f", f_file, "ExpSum JSON with a single frequency")->required();
    prb->add_option("--lambda", lambda_flag, "Frequency re,im")->required();
    prb->add_option("--n-max", n_max, "Last index")->check(CLI::PositiveNumber);
    prb->callback([&] {
        action = [&] {
            const SymbolGerm phi = symbol_from_json(read_json_file(phi_file), "phi");
            const ExpSum f = expsum_from_json(read_json_file(f_file), "f");
            const ProbeReport rep = fhc_obstruction_probe(phi, complex_flag(lambda_flag, "--lambda"), f, n_max);
            Json body{{"mode", probe_mode_name(rep.mode)},
                      {"lambda", to_json(rep.lambda)},
                      {"phi_at_lambda", to_json(rep.phi_at_lambda)},
                      {"values", complex_array(rep.values)},
                      {"sector_exits", rep.sector_exits},
                      {"re_sign_changes", rep.re_sign_changes},
                      {"im_sign_changes", rep.im_sign_changes},
                      {"interpolant_used", rep.interpolant_used},
                      {"note", rep.note}};
            if (rep.mode == ProbeMode::sector) body["sign_change_density"] = density_json(rep.sign_change_density);
            if (rep.interpolant_used) body["interpolant"] = to_json(rep.interpolant);
            run.emit_json(body, *prb, {{"sector_half_angle", probe_sector_half_angle}, {"zero_threshold", 1e-12}});
            return exit_ok;
        };
    });

    // verify
    std::string suite = "all";
    auto* ver = app.add_subcommand("verify", "Run the acceptance suite and print a pass/fail table");
    ver->add_option("--suite", suite, "all, or a comma-separated list of criterion numbers");
    ver->callback([&] {
        action = [&] {
            std::vector<int> ids;
            if (suite != "all") {
                std::stringstream ss(suite);
                for (std::string tok; std::getline(ss, tok, ',');) {
                    try {
                        ids.push_back(std::stoi(tok));
                    } catch (const std::logic_error&) {
                        throw_parse("cli.flag", "--suite: bad criterion '" + tok + "'");
                    }
                }
            }
            const auto results = run_acceptance(ids, common.seed, run.jobs());
            std::vector<std::string> rows;
            bool ok = true;
            for (const auto& r : results) {
                ok = ok && r.passed;
                std::string detail = r.detail;
                for (char& c : detail)
                    if (c == ',') c = ';';
                rows.push_back(std::to_string(r.id) + "," + r.name + "," + (r.passed ? "PASS" : "FAIL") + "," + detail);
            }
            run.emit_csv("criterion,name,status,detail", rows, *ver, {{"pinned", "per-criterion bounds in detail"}});
            return ok ? exit_ok : exit_verify;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_domain;
    }
    try {
        return action();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::numeric ? exit_numeric : exit_domain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
