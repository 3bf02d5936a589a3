#include "levystop/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "levystop/diagnostics.hpp"
#include "levystop/errors.hpp"
#include "levystop/mc.hpp"
#include "levystop/oracles.hpp"

namespace levystop {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Json jnum(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

int row_of(const SpaceTimeGrid& g, double t) {
    return std::clamp(static_cast<int>(std::lround(t / g.dt())), 0, g.nt);
}

// Linear in x. With an obstacle the gap u - g is interpolated instead, which
// is exact wherever the probe lies in the stopping region.
double value_at(const GridFunction& u, double x, int n, const PayoffSpec* obstacle = nullptr) {
    const auto& g = u.grid();
    const double s = (x - g.x(0)) / g.h();
    const int i = std::clamp(static_cast<int>(std::floor(s)), 0, g.nx - 1);
    const double w = s - i;
    if (!obstacle) return (1.0 - w) * u.at(i, n) + w * u.at(i + 1, n);
    const PayoffSpec& o = *obstacle;
    return o(x) + (1.0 - w) * (u.at(i, n) - o(g.x(i))) + w * (u.at(i + 1, n) - o(g.x(i + 1)));
}

double default_gap_tol(const RunConfig& rc, const SolveConfig& sc) {
    if (rc.numerics.gap_tol > 0.0) return rc.numerics.gap_tol;
    if (sc.mode == SolveMode::Penalized) return sc.eps_schedule.back();
    return 1e-8 * std::max(1.0, sc.payoff.K_bound());
}

struct Reference {
    std::string name;
    double value = std::nan("");
};

// Closed-form or tree value where one applies to this configuration.
Reference reference_value(const RunConfig& rc, const SolveConfig& sc, double x, double t) {
    const auto& p = rc.problem;
    if (p.payoff != "put" || p.b) return {};
    const double S = std::exp(x), tau = p.T - t, sigma = std::sqrt(2.0 * p.a);
    const LevyFamily f = sc.model.family();
    if (sc.mode == SolveMode::EuropeanCauchy) {
        if (f == LevyFamily::None && rc.oracle.series && sigma > 0.0) {
            return {"black_scholes", oracle::bs_put(S, p.strike, tau, p.r, p.q, sigma)};
        }
        if (f == LevyFamily::Merton && rc.oracle.series && p.q == 0.0 && sigma > 0.0) {
            const auto& lv = sc.model.params();
            return {"merton_series", oracle::merton_put(S, p.strike, tau, p.r, sigma, lv.at("intensity"), lv.at("mean"),
                                                        lv.at("stdev"))};
        }
        return {};
    }
    if (f == LevyFamily::None && rc.oracle.binomial && sigma > 0.0) {
        return {"binomial", oracle::crr_american_put(S, p.strike, tau, p.r, p.q, sigma, rc.oracle.binomial_steps)};
    }
    return {};
}

struct Level {
    SolveConfig cfg;
    SolveReport report;
};

Level solve_level(const RunConfig& rc, int refine) {
    Level l{to_solve_config(rc, refine), {}};
    l.report = solve_vi(l.cfg);
    return l;
}

double residual_max(const GridFunction& res) {
    double m = 0.0;
    for (double v : res.data()) {
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    }
    return m;
}

// Region labels only exist for stopping problems; European rows say "none".
std::string surface_csv(const GridFunction& u, const PayoffSpec& obstacle, const RegionPartition* part) {
    const auto& g = u.grid();
    const int lo = g.interior_begin(), hi = g.interior_end();
    const int sx = std::max(1, (hi - lo) / 400), st = std::max(1, g.nt / 200);
    std::string out = "x,t,u,g,region\n";
    for (int n = 0; n <= g.nt; n += st) {
        for (int i = lo; i <= hi; i += sx) {
            out += num(g.x(i)) + "," + num(g.t(n)) + "," + num(u.at(i, n)) + "," + num(obstacle(g.x(i))) + "," +
                   (part ? std::string(to_string(part->label(i, n))) : std::string("none")) + "\n";
        }
    }
    return out;
}

}  // namespace

RunOutcome run(const RunConfig& rc, int refine, bool with_mc) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome o;
    o.effective_config = rc.to_text();

    // Coarser levels first when a convergence table is requested.
    std::vector<Level> levels;
    for (int k = refine > 0 ? 0 : refine; k <= refine; ++k) levels.push_back(solve_level(rc, k));
    const SolveConfig& sc = levels.back().cfg;
    const SolveReport& rep = levels.back().report;
    const SpaceTimeGrid& g = sc.grid;
    const double T = g.T;

    const double gap_tol = default_gap_tol(rc, sc);
    const bool american = sc.mode != SolveMode::EuropeanCauchy;
    std::optional<RegionPartition> part;
    if (american) part = partition(rep.value, rep.obstacle, gap_tol);
    const LemmaSuite lemmas = lemma_suite(rep, sc, rc.numerics.lemma_c);
    for (const auto& [name, chk] : lemmas.checks) {
        if (!chk.pass) o.failures.push_back("lemma_suite." + name);
    }
    for (double v : rep.value.data()) {
        if (!std::isfinite(v)) {
            o.failures.push_back("finite_values");
            break;
        }
    }

    const double layer = rc.numerics.terminal_layer * T;
    const double res_max =
        american ? residual_max(residual_vi(rep.value, sc, gap_tol, rc.numerics.collar, layer)) : std::nan("");
    const double scale = std::max(std::abs(rep.anchor), 1e-12);
    const double res_bound = 20.0 * (g.h() * g.h() + g.dt()) * scale;

    const auto fit = part ? smooth_fit_gap(rep.value, *part) : std::vector<SmoothFitSample>{};
    const auto fit_sum = summarize_smooth_fit(fit, 0.5 * T);
    int unreliable = 0;
    for (const auto& s : fit) unreliable += s.unreliable ? 1 : 0;

    const double lip = holder_seminorm(rep.value, 1.0, 1.0, g.h()).x;
    const double t_mod = holder_seminorm(rep.value, 1.0, 0.5, std::min(0.1, 0.25 * T)).t;

    Json d;
    d["mode"] = std::string(to_string(rep.mode));
    d["grid"] = {{"x_lo", g.x_lo}, {"x_hi", g.x_hi}, {"pad", g.pad}, {"nx", g.nx}, {"nt", g.nt},
                 {"T", T},         {"h", g.h()},       {"dt", g.dt()}, {"refine", refine}};
    d["seeds"] = {{"oracle", rc.oracle.seed}};
    d["anchor"] = rep.anchor;
    d["eps_split"] = rep.eps_split;
    d["truncation_mass"] = rep.truncation_mass;
    d["steps"] = rep.steps;

    Json lj;
    lj["tol"] = lemmas.tol;
    lj["all_pass"] = lemmas.all_pass();
    for (const auto& [name, chk] : lemmas.checks) {
        lj["checks"][name] = {{"pass", chk.pass}, {"measured", jnum(chk.measured)}, {"bound", jnum(chk.bound)}};
    }
    d["lemma_suite"] = lj;

    d["residuals"] = {{"vi_residual_max", jnum(res_max)},
                      {"vi_residual_bound", res_bound},
                      {"vi_residual_within_bound", !american || res_max <= res_bound},
                      {"collar", rc.numerics.collar},
                      {"terminal_layer", layer},
                      {"gap_tol", gap_tol}};
    d["smooth_fit"] = {{"t_max", 0.5 * T},
                       {"rms", fit_sum.rms},
                       {"max", fit_sum.max},
                       {"samples", fit_sum.count},
                       {"unreliable", unreliable},
                       {"max_abs_dx_u", lip},
                       {"relative_max", lip > 0.0 ? fit_sum.max / lip : 0.0}};
    d["regularity"] = {{"lipschitz_x", lip},
                       {"lipschitz_bound", sc.payoff.L_lip()},
                       {"lipschitz_within_bound", lip <= sc.payoff.L_lip() * (1.0 + 1e-9)},
                       {"holder_t_half", t_mod}};

    Json conv;
    if (!rep.eps_trace.empty()) {
        conv["eps_schedule"] = sc.eps_schedule;
        conv["eps_trace"] = rep.eps_trace;
        Json es = Json::array();
        for (const auto& e : rep.eps_stats) {
            es.push_back({{"eps", e.eps},
                          {"v_min", e.v_min},
                          {"v_max", e.v_max},
                          {"gap_min", e.gap_min},
                          {"p_min", e.p_min},
                          {"p_max", e.p_max},
                          {"grad_max", e.grad_max}});
        }
        conv["eps_stats"] = es;
    }
    if (levels.size() > 1) {
        Json table = Json::array();
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto& L = levels[k];
            const auto& lg = L.cfg.grid;
            Json row{{"level", k}, {"h", lg.h()}, {"dt", lg.dt()}};
            Json vals = Json::array();
            for (double t : rc.oracle.probe_t) {
                for (double x : rc.oracle.probe_x) {
                    vals.push_back(value_at(L.report.value, x, row_of(lg, t),
                                            L.cfg.mode == SolveMode::EuropeanCauchy ? nullptr : &L.report.obstacle));
                }
            }
            row["probe_values"] = vals;
            if (american) {
                const double gt = default_gap_tol(rc, L.cfg);
                row["vi_residual_max"] =
                    residual_max(residual_vi(L.report.value, L.cfg, gt, rc.numerics.collar, layer));
                const auto p = partition(L.report.value, L.report.obstacle, gt);
                row["smooth_fit_rms"] = summarize_smooth_fit(smooth_fit_gap(L.report.value, p), 0.5 * T).rms;
            }
            table.push_back(row);
        }
        conv["refinement"] = table;
    }
    d["convergence"] = conv.is_null() ? Json::object() : conv;
    d["warnings"] = rep.warnings;

    // Probes with reference oracles, plus Monte Carlo when comparing.
    const McOptions base_opt{rc.oracle.mc_eps, 1e4, 0};
    Json probes = Json::array();
    std::string cmp = "x,t,pde,reference,reference_name,rel_gap_ref,mc,mc_stderr,pde_minus_mc,dominance\n";
    for (double t : rc.oracle.probe_t) {
        const int n = row_of(g, t);
        for (double x : rc.oracle.probe_x) {
            const double u = value_at(rep.value, x, n, american ? &rep.obstacle : nullptr);
            const Reference ref = reference_value(rc, sc, x, g.t(n));
            Json pj{{"x", x}, {"t", g.t(n)}, {"pde", u}};
            double rel = std::nan("");
            if (!ref.name.empty()) {
                rel = std::abs(u - ref.value) / std::max(std::abs(ref.value), 1e-12);
                pj["reference"] = {{"name", ref.name}, {"value", ref.value}, {"rel_gap", rel}};
            }
            double mc = std::nan(""), se = std::nan("");
            bool dominance = true;
            if (with_mc && rc.oracle.mc) {
                const double tau = T - g.t(n);
                const int steps = std::max(1, static_cast<int>(std::lround(rc.oracle.mc_steps * tau / T)));
                McOptions opt = base_opt;
                try {
                    const PathBatch fit_b = simulate(sc.model, sc.coeffs, x, tau, rc.oracle.mc_paths, steps,
                                                     rc.oracle.seed, opt);
                    if (american) {
                        opt.batch = 1;
                        const PathBatch eval_b = simulate(sc.model, sc.coeffs, x, tau, rc.oracle.mc_paths, steps,
                                                          rc.oracle.seed, opt);
                        const auto est = stopping_lower_bound(fit_b, eval_b, sc.payoff, rc.oracle.lsm_degree);
                        mc = est.price;
                        se = est.std_error;
                        pj["mc"] = {{"kind", "regression_policy_lower_bound"},
                                    {"value", mc},
                                    {"stderr", se},
                                    {"degenerate", est.degenerate}};
                        dominance = u >= mc - 4.0 * se;
                    } else {
                        const auto est = european_estimate(fit_b, sc.payoff);
                        mc = est.price;
                        se = est.std_error;
                        pj["mc"] = {{"kind", "european"}, {"value", mc}, {"stderr", se}};
                        dominance = std::abs(u - mc) <= 4.0 * se + 1e-12;
                    }
                } catch (const ParameterError& e) {
                    throw ConfigError(std::string("oracle: ") + e.what());
                }
                pj["mc"]["within_4_stderr"] = dominance;
                if (american && !dominance) o.failures.push_back("mc_dominance");
            }
            probes.push_back(pj);
            cmp += num(x) + "," + num(g.t(n)) + "," + num(u) + "," + (ref.name.empty() ? "" : num(ref.value)) + "," +
                   ref.name + "," + (ref.name.empty() ? "" : num(rel)) + "," + (std::isnan(mc) ? "" : num(mc)) + "," +
                   (std::isnan(se) ? "" : num(se)) + "," + (std::isnan(mc) ? "" : num(u - mc)) + "," +
                   (std::isnan(mc) ? "" : (dominance ? "pass" : "fail")) + "\n";
        }
    }
    d["probes"] = probes;
    std::sort(o.failures.begin(), o.failures.end());
    o.failures.erase(std::unique(o.failures.begin(), o.failures.end()), o.failures.end());
    d["failures"] = o.failures;
    d["status"] = o.failures.empty() ? "ok" : "invariant_violation";
    o.diagnostics_json = d.dump(2) + "\n";
    if (with_mc) o.comparison_csv = cmp;

    o.surface_csv = surface_csv(rep.value, rep.obstacle, part ? &*part : nullptr);
    o.boundary_csv = "t,b\n";
    for (int n = 0; part && n <= g.nt; ++n) {
        for (double b : part->boundary[n]) {
            if (rep.obstacle(b) > gap_tol) o.boundary_csv += num(g.t(n)) + "," + num(b) + "\n";
        }
    }

    std::ostringstream s;
    s << "mode            " << to_string(rep.mode) << "\n"
      << "family          " << to_string(sc.model.family()) << " (alpha = " << sc.model.alpha() << ")\n"
      << "payoff          " << rc.problem.payoff << ", K = " << sc.payoff.K_bound() << "\n"
      << "grid            nx = " << g.nx << ", nt = " << g.nt << ", h = " << g.h() << ", dt = " << g.dt() << "\n"
      << "lemma suite     " << (lemmas.all_pass() ? "pass" : "FAIL") << " (tol " << lemmas.tol << ")\n"
      << "truncation mass " << rep.truncation_mass << "\n";
    if (american) {
        s << "vi residual     " << res_max << " (bound " << res_bound << ")\n"
          << "smooth fit      rms " << fit_sum.rms << ", max " << fit_sum.max << " over " << fit_sum.count
          << " samples\n";
    }
    if (!rep.eps_trace.empty()) {
        s << "eps trace      ";
        for (double v : rep.eps_trace) s << " " << v;
        s << "\n";
    }
    for (const auto& w : rep.warnings) s << "warning         " << w << "\n";
    for (const auto& pj : probes) {
        s << "u(" << pj["x"].get<double>() << ", " << pj["t"].get<double>() << ") = " << pj["pde"].get<double>();
        if (pj.contains("reference")) {
            s << "  " << pj["reference"]["name"].get<std::string>() << " " << pj["reference"]["value"].get<double>();
        }
        if (pj.contains("mc")) {
            s << "  mc " << pj["mc"]["value"].get<double>() << " +- " << pj["mc"]["stderr"].get<double>();
        }
        s << "\n";
    }
    s << "status          " << (o.failures.empty() ? "ok" : "invariant violation") << "\n";
    for (const auto& f : o.failures) s << "failed check    " << f << "\n";
    o.summary = s.str();
    o.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
}

void write_artifacts(const RunOutcome& o, const RunConfig& rc, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    auto put = [&](const std::string& name, const std::string& body) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
        f << body;
    };
    const auto& fm = rc.output.formats;
    const bool csv = std::find(fm.begin(), fm.end(), "csv") != fm.end();
    const bool json = std::find(fm.begin(), fm.end(), "json") != fm.end();
    put("effective_config.cfg", o.effective_config);
    put("summary.txt", o.summary);
    if (csv) {
        put("surface.csv", o.surface_csv);
        put("boundary.csv", o.boundary_csv);
        if (!o.comparison_csv.empty()) put("comparison.csv", o.comparison_csv);
    }
    if (json) put("diagnostics.json", o.diagnostics_json);
}

int run_command(const std::string& command, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (command == "selftest") return selftest(out);
        if (command != "solve" && command != "compare") {
            err << "unknown command '" << command << "' (solve, compare, selftest)\n";
            return 2;
        }
        RunConfig rc = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
        if (opt.out_dir) rc.output.dir = *opt.out_dir;
        if (opt.seed) rc.oracle.seed = *opt.seed;
        const RunOutcome o = run(rc, opt.refine, command == "compare");
        write_artifacts(o, rc, rc.output.dir);
        out << o.summary;
        out << "wallclock       " << o.wallclock_s << " s\n";
        if (!o.failures.empty()) {
            err << "invariant violation: " << o.failures.front() << "\n";
            return 3;
        }
        return 0;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.check() << ": " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        err << "invariant violation: numerical: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedOperation& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace levystop
