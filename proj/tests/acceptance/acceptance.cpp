// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// here. Exit status is 0 once every criterion has been evaluated, and with
// --strict it is 1 when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "levystop/config.hpp"
#include "levystop/diagnostics.hpp"
#include "levystop/generator.hpp"
#include "levystop/harness.hpp"
#include "levystop/mc.hpp"
#include "levystop/oracles.hpp"
#include "levystop/penalty.hpp"
#include "levystop/solver.hpp"

using namespace levystop;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kR = 0.05;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SpaceTimeGrid desk(int nx, int nt, double T = 1.0) {
    SpaceTimeGrid g;
    g.x_lo = -2.0;
    g.x_hi = 2.0;
    g.pad = 1.0;
    g.nx = nx;
    g.nt = nt;
    g.T = T;
    return g;
}

SolveConfig put_problem(const LevyModel& m, double a, int nx, int nt, SolveMode mode) {
    SolveConfig c;
    c.grid = desk(nx, nt);
    c.model = m;
    c.coeffs = CoefficientField::constant(a, oracle::risk_neutral_drift(m, kR, a), kR);
    c.payoff = PayoffSpec::put(1.0);
    c.mode = mode;
    return c;
}

double at_x(const GridFunction& u, double x, int n = 0) {
    const auto& g = u.grid();
    const double s = (x - g.x(0)) / g.h();
    const int i = static_cast<int>(std::floor(s));
    const double w = s - i;
    return (1 - w) * u.at(i, n) + w * u.at(i + 1, n);
}

// Interpolates u - g and adds g back, so probes in the stopping region
// return g(x) exactly instead of a chord of the concave put.
double at_x_above(const GridFunction& u, const PayoffSpec& g, double x, int n = 0) {
    const auto& gr = u.grid();
    const double s = (x - gr.x(0)) / gr.h();
    const int i = static_cast<int>(std::floor(s));
    const double w = s - i;
    return g(x) + (1 - w) * (u.at(i, n) - g(gr.x(i))) + w * (u.at(i + 1, n) - g(gr.x(i + 1)));
}

std::vector<LevyModel> all_families() {
    return {LevyModel::none(),
            LevyModel::merton(2.0, -0.05, 0.1),
            LevyModel::kou(1.5, 0.4, 12.0, 8.0),
            LevyModel::variance_gamma(0.2, 0.3, -0.1),
            LevyModel::nig(10.0, -3.0, 0.3),
            LevyModel::tempered_stable(0.8, 1.0, 0.7, 1.5, 3.0, 2.0),
            LevyModel::tempered_stable(0.05, 0.05, 1.5, 1.5, 5.0, 5.0)};
}

const LevyModel kMerton = LevyModel::merton(1.0, -0.1, 0.15);
const LevyModel kNig = LevyModel::nig(10.0, -3.0, 0.3);
const LevyModel kTs = LevyModel::tempered_stable(0.05, 0.05, 1.5, 1.5, 5.0, 5.0);

// Relative errors use this floor when the target itself vanishes. It matches
// the tail mass the stencil is allowed to drop.
constexpr double kFloor = 1e-8;

// 1. I[1] = 0, I[x] = ∫_{|y|>1} y ν, I[x²] = ∫ y² ν + 2x ∫_{|y|>1} y ν, at
// every split point; the stencil may only drop its truncated tail.
Outcome operator_identities() {
    SpaceTimeGrid g;
    g.x_lo = -1.0;
    g.x_hi = 1.0;
    g.nx = 200;
    auto exact = [&](std::function<double(double)> f) {
        return GridFunction::sample(
            g, [f](double x, double) { return f(x); }, Extension::ClampToPayoff, [f](double x, int) { return f(x); });
    };
    const auto one = exact([](double) { return 1.0; });
    const auto lin = exact([](double x) { return x; });
    const auto sq = exact([](double x) { return x * x; });
    double worst_id = 0.0, worst_split = 0.0;
    for (const auto& m : all_families()) {
        const double big_mean = m.moment(1, 1.0, kInf);
        const double second = tails(m, 1.0).small_var + m.abs_moment(2, 1.0, kInf);
        std::vector<std::vector<double>> ref;
        for (double eps : {0.25, 0.5, 1.0}) {
            const auto s = build_nonlocal_stencil(m, g.h(), eps);
            const double slack1 = s.neglected, slack2 = m.abs_moment(2, s.radius, kInf);
            const auto a = apply_nonlocal(one, m, eps, 0);
            const auto b = apply_nonlocal(lin, m, eps, 0);
            const auto c = apply_nonlocal(sq, m, eps, 0);
            for (int i = 0; i <= g.nx; ++i) {
                const double x = g.x(i), want = second + 2.0 * x * big_mean;
                worst_id = std::max(worst_id, std::abs(a[i]));
                worst_id = std::max(worst_id, (std::abs(b[i] - big_mean) - slack1) / std::max(std::abs(big_mean), kFloor));
                worst_id = std::max(worst_id, (std::abs(c[i] - want) - slack2 - 2.0 * std::abs(x) * slack1) /
                                                  std::max(std::abs(want), kFloor));
            }
            std::vector<double> row(b);
            row.insert(row.end(), c.begin(), c.end());
            if (!ref.empty()) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    worst_split = std::max(worst_split, std::abs(row[i] - ref[0][i]) / std::max(1.0, std::abs(ref[0][i])));
                }
            }
            ref.push_back(std::move(row));
        }
    }
    return {worst_id <= 1e-6 && worst_split <= 1e-6,
            "identity rel err " + fmt("%.2e", worst_id) + ", split spread " + fmt("%.2e", worst_split) + " (tol 1e-6)"};
}

// 2. Sampled shape, exact anchor and the pointwise limit.
Outcome penalty_construction() {
    bool shape = true, anchor = true, limit = true;
    const double p0 = -1.37;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        const auto p = PenaltySpec::build(eps, p0);
        anchor = anchor && std::abs(p(0.0) - p0) <= 1e-12;
        double prev = -kInf, prev_d = kInf;
        for (int k = 0; k < 10000; ++k) {
            const double y = -5.0 + 10.0 * k / 9999.0;
            const double v = p(y), d = p.derivative(y), d2 = p.second_derivative(y);
            shape = shape && v <= 0.0 && (y < eps || v == 0.0) && v >= prev && d >= 0.0 && d <= prev_d + 1e-12 &&
                    d2 <= 0.0;
            prev = v;
            prev_d = d;
        }
    }
    double prev = 0.0;
    for (double eps = 0.2; eps > 1e-5; eps *= 0.5) {
        const auto p = PenaltySpec::build(eps, p0);
        if (eps < 0.3) limit = limit && p(0.3) == 0.0;
        limit = limit && p(-0.3) < prev;
        prev = p(-0.3);
    }
    limit = limit && prev < -1e3;
    return {shape && anchor && limit, std::string("shape ") + (shape ? "ok" : "broken") + ", anchor " +
                                          (anchor ? "exact" : "off") + ", limit " + (limit ? "ok" : "broken") +
                                          ", p(-0.3) at eps 1e-5 = " + fmt("%.3g", prev)};
}

// 3. A priori bounds on every ε of the penalized schedule.
Outcome lemma_suite_all() {
    bool ok = true;
    std::string detail;
    for (const auto& [name, m, a] : {std::tuple{"none", LevyModel::none(), 0.045}, std::tuple{"merton", kMerton, 0.02},
                                     std::tuple{"nig", kNig, 0.02}}) {
        const SolveConfig c = put_problem(m, a, 400, 200, SolveMode::Penalized);
        const auto s = lemma_suite(solve_vi(c), c, 10.0);
        ok = ok && s.all_pass();
        detail += std::string(detail.empty() ? "" : "; ") + name + (s.all_pass() ? " pass" : " FAIL");
        for (const auto& [k, chk] : s.checks) {
            if (!chk.pass) detail += " " + k + "=" + fmt("%.3g", chk.measured);
        }
    }
    return {ok, detail};
}

// 4. European put against Black-Scholes and the Merton series.
Outcome european_oracles() {
    double bs = 0.0, mer = 0.0;
    {
        SolveConfig c = put_problem(LevyModel::none(), 0.045, 400, 800, SolveMode::EuropeanCauchy);
        const auto u = solve_vi(c).value;
        for (double S : {0.8, 0.9, 1.0, 1.1, 1.2}) {
            const double want = oracle::bs_put(S, 1.0, 1.0, kR, 0.0, 0.3);
            bs = std::max(bs, std::abs(at_x(u, std::log(S)) / want - 1.0));
        }
    }
    {
        SolveConfig c = put_problem(kMerton, 0.02, 400, 400, SolveMode::EuropeanCauchy);
        const auto u = solve_vi(c).value;
        for (double S : {0.8, 0.9, 1.0, 1.1, 1.2}) {
            const double want = oracle::merton_put(S, 1.0, 1.0, kR, 0.2, 1.0, -0.1, 0.15, 50);
            mer = std::max(mer, std::abs(at_x(u, std::log(S)) / want - 1.0));
        }
    }
    return {bs <= 2e-3 && mer <= 5e-3,
            "black-scholes max rel " + fmt("%.2e", bs) + " (tol 2e-3), merton " + fmt("%.2e", mer) + " (tol 5e-3)"};
}

// 5. American diffusion put against a 5000-step tree.
Outcome american_binomial() {
    const SolveConfig c = put_problem(LevyModel::none(), 0.045, 400, 200, SolveMode::ProjectedImplicit);
    const auto u = solve_vi(c).value;
    auto rel = [&](double S) {
        const double want = oracle::crr_american_put(S, 1.0, 1.0, kR, 0.0, 0.3, 5000);
        return std::abs(at_x_above(u, c.payoff, std::log(S)) / want - 1.0);
    };
    const double atm = rel(1.0), wings = std::max(rel(0.8), rel(1.2));
    return {atm <= 2e-3 && wings <= 5e-3,
            "at the money " + fmt("%.2e", atm) + " (tol 2e-3), +-20% " + fmt("%.2e", wings) + " (tol 5e-3)"};
}

// 6. Successive sup-norm deltas along the ε schedule.
Outcome eps_continuation() {
    const SolveConfig c = put_problem(LevyModel::none(), 0.045, 400, 200, SolveMode::Penalized);
    const auto tr = solve_vi(c).eps_trace;
    bool decreasing = tr.size() == c.eps_schedule.size() - 1;
    for (std::size_t k = 1; k < tr.size(); ++k) decreasing = decreasing && tr[k] < tr[k - 1];
    const double last = tr.empty() ? kInf : tr.back();
    const double bound = 5e-3 * c.payoff.K_bound();
    std::string d = "deltas";
    for (double v : tr) d += " " + fmt("%.2e", v);
    return {decreasing && last <= bound, d + (decreasing ? ", decreasing" : ", NOT decreasing") + ", final bound " +
                                             fmt("%.1e", bound)};
}

// 7. Smooth fit for infinite-variation jumps.
Outcome smooth_fit() {
    bool ok = true;
    std::string detail;
    for (const auto& [name, m] : {std::pair{"nig", kNig}, std::pair{"ts1.5", kTs}}) {
        std::vector<double> rms;
        double last_max = 0.0, grad = 0.0;
        for (int k = 0; k < 3; ++k) {
            const SolveConfig c = put_problem(m, 0.02, 200 << k, 100 << k, SolveMode::ProjectedImplicit);
            const auto rep = solve_vi(c);
            const auto part = partition(rep.value, c.payoff, 1e-8);
            const auto sum = summarize_smooth_fit(smooth_fit_gap(rep.value, part), 0.5 * c.grid.T);
            rms.push_back(sum.count > 0 ? sum.rms : kInf);
            last_max = sum.max;
            grad = holder_seminorm(rep.value, 1.0, 1.0, c.grid.h()).x;
        }
        const double r1 = rms[1] / rms[0], r2 = rms[2] / rms[1];
        const bool pass = r1 <= 0.7 && r2 <= 0.7 && last_max <= 1e-2 * grad;
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : "; ") + name + " rms " + fmt("%.2e", rms[0]) + " " +
                  fmt("%.2e", rms[1]) + " " + fmt("%.2e", rms[2]) + " ratios " + fmt("%.2f", r1) + " " +
                  fmt("%.2f", r2) + " final max/grad " + fmt("%.2e", last_max / grad);
    }
    return {ok, detail};
}

struct Ladder {
    std::vector<SolveConfig> cfg;
    std::vector<SolveReport> rep;
};

Ladder ladder(const LevyModel& m, double a) {
    Ladder l;
    for (int k = 0; k < 3; ++k) {
        l.cfg.push_back(put_problem(m, a, 200 << k, 100 << k, SolveMode::ProjectedImplicit));
        l.rep.push_back(solve_vi(l.cfg.back()));
    }
    return l;
}

// 8. Pointwise VI residual outside the collar and the terminal layer.
Outcome vi_residual(const std::vector<std::pair<std::string, Ladder>>& ladders) {
    bool ok = true;
    std::string detail;
    for (const auto& [name, l] : ladders) {
        std::vector<double> res;
        double bound = 0.0;
        for (std::size_t k = 0; k < l.rep.size(); ++k) {
            const auto& c = l.cfg[k];
            const auto r = residual_vi(l.rep[k].value, c, 1e-8, 2, 0.1 * c.grid.T);
            double mx = 0.0;
            for (double v : r.data()) {
                if (std::isfinite(v)) mx = std::max(mx, std::abs(v));
            }
            res.push_back(mx);
            const double scale = std::abs(penalty_anchor(c.coeffs, c.payoff, c.model, c.grid));
            bound = 20.0 * (c.grid.h() * c.grid.h() + c.grid.dt()) * scale;
        }
        const bool pass = res[1] < res[0] && res[2] < res[1] && res[2] <= bound;
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : "; ") + name + " " + fmt("%.2e", res[0]) + " " +
                  fmt("%.2e", res[1]) + " " + fmt("%.2e", res[2]) + " bound " + fmt("%.2e", bound);
    }
    return {ok, detail};
}

// 9. L_p norms of the second derivative straddling the boundary.
Outcome sobolev_proxy(const std::vector<std::pair<std::string, Ladder>>& ladders) {
    bool ok = true;
    std::string detail;
    const NormWindow w{-0.6, -0.1, 0.05, 0.5};
    for (const auto& [name, l] : ladders) {
        std::vector<GridFunction> lv;
        for (const auto& r : l.rep) lv.push_back(r.value);
        for (double p : {2.0, 4.0}) {
            const auto tab = sobolev_stability(lv, p, w);
            double lo = kInf, hi = 0.0;
            for (const auto& row : tab.rows) {
                lo = std::min(lo, row.norm_xx);
                hi = std::max(hi, row.norm_xx);
            }
            const bool pass = tab.stable_xx && hi <= 2.0 * lo;
            ok = ok && pass;
            detail += std::string(detail.empty() ? "" : "; ") + name + " L" + fmt("%.0f", p) + " spread " +
                      fmt("%.2f", hi / lo) + " max|u_xx| " + fmt("%.3g", tab.rows.front().max_xx) + " -> " +
                      fmt("%.3g", tab.rows.back().max_xx);
        }
    }
    return {ok, detail};
}

// 10. PDE value dominates the regression-policy lower bound; American >= European.
Outcome mc_consistency() {
    bool ok = true;
    std::string detail;
    const int paths = 100000, steps = 50;
    for (const auto& [name, m] : {std::pair{"merton", kMerton}, std::pair{"nig", kNig}}) {
        const SolveConfig am = put_problem(m, 0.02, 400, 200, SolveMode::ProjectedImplicit);
        SolveConfig eu = am;
        eu.mode = SolveMode::EuropeanCauchy;
        const auto ua = solve_vi(am).value, ue = solve_vi(eu).value;
        double worst_order = 0.0;
        for (std::size_t i = 0; i < ua.data().size(); ++i) worst_order = std::max(worst_order, ue.data()[i] - ua.data()[i]);
        const bool order = worst_order <= 1e-12;
        // Largest violation of pde >= mc - 4 se; deep in the money the policy
        // stops at once and se is exactly zero.
        double worst = -kInf;
        for (double x : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
            McOptions o;
            const auto fit = simulate(m, am.coeffs, x, 1.0, paths, steps, 20240601, o);
            o.batch = 1;
            const auto ev = simulate(m, am.coeffs, x, 1.0, paths, steps, 20240601, o);
            const auto est = stopping_lower_bound(fit, ev, am.payoff, 3);
            worst = std::max(worst, est.price - 4.0 * est.std_error - at_x_above(ua, am.payoff, x));
        }
        const bool pass = order && worst <= 1e-12;
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : "; ") + name + " max (mc - 4se - pde) " + fmt("%.2e", worst) +
                  ", european - american <= " + fmt("%.1e", worst_order);
    }
    return {ok, detail};
}

// 11. Identical config and seed give identical artifacts.
Outcome determinism() {
    RunConfig rc = parse_text(
        "[problem]\nfamily = merton\nlevy.intensity = 1\nlevy.mean = -0.1\nlevy.stdev = 0.15\na = 0.02\n"
        "[numerics]\nnx = 200\nnt = 100\n[oracle]\nmc_paths = 5000\nmc_steps = 25\n");
    const auto a = run(rc, 1, true), b = run(rc, 1, true);
    const bool same = a.surface_csv == b.surface_csv && a.boundary_csv == b.boundary_csv &&
                      a.diagnostics_json == b.diagnostics_json && a.comparison_csv == b.comparison_csv &&
                      a.summary == b.summary && a.effective_config == b.effective_config;
    return {same, same ? "all artifacts byte-identical" : "artifacts differ"};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit_s;  // <= 0: none
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    bool strict = false;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) strict = true;
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }

    std::vector<std::pair<std::string, Ladder>> ladders;
    auto need_ladders = [&] {
        if (ladders.empty()) {
            ladders.emplace_back("none", ladder(LevyModel::none(), 0.045));
            ladders.emplace_back("merton", ladder(kMerton, 0.02));
        }
    };

    const std::vector<Criterion> all{
        {1, "operator identities", 5.0, operator_identities},
        {2, "penalty construction", 1.0, penalty_construction},
        {3, "lemma suite", 30.0, lemma_suite_all},
        {4, "european oracles", 30.0, european_oracles},
        {5, "american binomial", 60.0, american_binomial},
        {6, "eps continuation", 0.0, eps_continuation},
        {7, "smooth fit", 300.0, smooth_fit},
        {8, "vi residual", 0.0, [&] { need_ladders(); return vi_residual(ladders); }},
        {9, "sobolev proxy", 0.0, [&] { need_ladders(); return sobolev_proxy(ladders); }},
        {10, "mc consistency", 120.0, mc_consistency},
        {11, "determinism", 0.0, determinism},
    };

    int failed = 0, evaluated = 0;
    for (const auto& c : all) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
            o.pass = false;
            o.detail += ", over the " + fmt("%.0f", c.time_limit_s) + " s budget";
        }
        std::printf("%s %2d %-22s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
        ++evaluated;
    }
    std::printf("acceptance: %d/%d criteria passed\n", evaluated - failed, evaluated);
    return strict && failed > 0 ? 1 : 0;
}
