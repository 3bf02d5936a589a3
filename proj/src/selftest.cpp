#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "levystop/config.hpp"
#include "levystop/diagnostics.hpp"
#include "levystop/errors.hpp"
#include "levystop/generator.hpp"
#include "levystop/harness.hpp"
#include "levystop/mc.hpp"
#include "levystop/penalty.hpp"

namespace levystop {

namespace {

template <class E, class F>
bool throws(F&& f) {
    try {
        f();
    } catch (const E&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

SpaceTimeGrid small_grid() {
    SpaceTimeGrid g;
    g.x_lo = -1.0;
    g.x_hi = 1.0;
    g.pad = 1.0;
    g.nx = 80;
    g.nt = 20;
    g.T = 0.5;
    return g;
}

double max_abs_interior(const std::vector<double>& v, const SpaceTimeGrid& g) {
    double m = 0.0;
    for (int i = g.interior_begin(); i <= g.interior_end(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

PayoffSpec flat(double c) { return PayoffSpec::custom({-3.0, -1.0, 1.0, 3.0}, {c, c, c, c}); }

using Check = std::pair<std::string, std::function<bool()>>;

std::vector<Check> checks() {
    std::vector<Check> c;
    c.emplace_back("levy.none_density", [] { return LevyModel::none().density(0.3) == 0.0; });
    c.emplace_back("levy.merton_density_at_zero",
                   [] { return throws<DomainError>([] { (void)LevyModel::merton(1.0, 0.0, 0.2).density(0.0); }); });
    c.emplace_back("levy.symmetric_comp_drift", [] {
        const auto m = LevyModel::merton(2.0, 0.0, 0.3);
        for (double e : {0.05, 0.2, 0.7}) {
            if (std::abs(tails(m, e).comp_drift) > 1e-14) return false;
        }
        return true;
    });
    c.emplace_back("levy.finite_activity_exponent", [] { return LevyModel::merton(1.0, -0.1, 0.2).alpha() == 0.0; });
    c.emplace_back("payoff.put_limits", [] {
        const auto p = PayoffSpec::put(1.0);
        return p(0.0) == 0.0 && std::abs(p(-20.0) - 1.0) < 1e-8;
    });
    c.emplace_back("payoff.mollified_constant", [] {
        const auto p = flat(0.7).mollify(0.1);
        return std::abs(p(0.4) - 0.7) < 1e-12;
    });
    c.emplace_back("payoff.mollified_linear", [] {
        const auto p = PayoffSpec::custom({-3.0, -1.0, 1.0, 3.0}, {0.2, 0.4, 0.6, 0.8}).mollify(0.1);
        return std::abs(p(0.0) - 0.5) < 1e-10;
    });
    c.emplace_back("generator.local_quadratic", [] {
        const auto g = small_grid();
        const auto phi = GridFunction::sample(g, [](double x, double) { return x * x; });
        const auto out = apply_local(phi, CoefficientField::constant(1.0, 0.0, 0.0), 0);
        for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
            if (std::abs(out[i] - 2.0) > 1e-9) return false;
        }
        return true;
    });
    c.emplace_back("generator.local_drift", [] {
        const auto g = small_grid();
        const auto phi = GridFunction::sample(g, [](double x, double) { return x; });
        const auto out = apply_local(phi, CoefficientField::constant(0.0, 3.0, 0.0), 0);
        for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
            if (std::abs(out[i] - 3.0) > 1e-9) return false;
        }
        return true;
    });
    c.emplace_back("generator.nonlocal_constant", [] {
        const auto g = small_grid();
        const auto phi = GridFunction::sample(g, [](double, double) { return 1.0; });
        const auto m = LevyModel::nig(10.0, -3.0, 0.3);
        return max_abs_interior(apply_nonlocal(phi, m, default_eps_split(g.h()), 0), g) < 1e-12;
    });
    c.emplace_back("generator.none_nonlocal_zero", [] {
        const auto g = small_grid();
        const auto phi = GridFunction::sample(g, [](double x, double) { return std::sin(x); });
        return max_abs_interior(apply_nonlocal(phi, LevyModel::none(), default_eps_split(g.h()), 0), g) == 0.0;
    });
    c.emplace_back("generator.reduced_needs_finite_variation", [] {
        const auto g = small_grid();
        const auto phi = GridFunction::sample(g, [](double, double) { return 1.0; });
        return throws<UnsupportedOperation>([&] { (void)apply_reduced(phi, LevyModel::nig(10.0, -3.0, 0.3), 0); });
    });
    c.emplace_back("penalty.anchor_flat", [] {
        const auto p = flat(1.0);
        return penalty_anchor(CoefficientField::constant(1.0, 0.0, 0.0), p, LevyModel::none(), small_grid()) == 0.0;
    });
    c.emplace_back("penalty.anchor_put", [] {
        return penalty_anchor(CoefficientField::constant(1.0, 0.0, 0.0), PayoffSpec::put(1.0), LevyModel::none(),
                              small_grid()) == -1.0;
    });
    c.emplace_back("penalty.monotone", [] {
        const auto p = PenaltySpec::build(0.05, -3.0);
        double prev = p(-0.2);
        for (int k = 1; k <= 1000; ++k) {
            const double y = -0.2 + 0.3 * k / 1000.0, v = p(y);
            if (v < prev || v > 0.0) return false;
            prev = v;
        }
        return p(0.1) == 0.0;
    });
    c.emplace_back("solver.zero_payoff", [] {
        SolveConfig s;
        s.grid = small_grid();
        s.payoff = flat(0.0);
        s.mode = SolveMode::ProjectedImplicit;
        const SolveReport r = solve_vi(s);
        for (double v : r.value.data()) {
            if (v != 0.0) return false;
        }
        return true;
    });
    c.emplace_back("solver.terminal_slice", [] {
        SolveConfig s;
        s.grid = small_grid();
        s.mode = SolveMode::ProjectedImplicit;
        const auto r = solve_vi(s);
        const auto& g = s.grid;
        for (int i = 0; i <= g.nx; ++i) {
            if (r.value.at(i, g.nt) != s.payoff(g.x(i))) return false;
        }
        return true;
    });
    c.emplace_back("mc.deterministic_drift", [] {
        const auto b = simulate(LevyModel::none(), CoefficientField::constant(0.0, 0.3, 0.0), 0.1, 1.0, 8, 10, 7);
        for (int p = 0; p < b.n_paths; ++p) {
            if (std::abs(b.x(p, b.n_steps) - 0.4) > 1e-12) return false;
        }
        return true;
    });
    c.emplace_back("mc.constant_payoff", [] {
        const auto b = simulate(LevyModel::merton(1.0, 0.0, 0.2), CoefficientField::constant(0.02, 0.0, 0.0), 0.0,
                                1.0, 200, 10, 7);
        const auto e = european_estimate(b, flat(0.5));
        return e.price == 0.5 && e.std_error == 0.0;
    });
    c.emplace_back("mc.zero_payoff_policy", [] {
        const auto m = LevyModel::none();
        const auto cf = CoefficientField::constant(0.02, 0.0, 0.05);
        McOptions o;
        const auto fit = simulate(m, cf, 0.0, 1.0, 200, 10, 7, o);
        o.batch = 1;
        const auto ev = simulate(m, cf, 0.0, 1.0, 200, 10, 7, o);
        return stopping_lower_bound(fit, ev, flat(0.0)).price == 0.0;
    });
    c.emplace_back("diagnostics.all_continuation", [] {
        const auto g = small_grid();
        const auto u = GridFunction::sample(g, [](double, double) { return 1.0; });
        const auto p = partition(u, flat(0.0), 1e-12);
        for (auto l : p.labels) {
            if (l != Region::Continuation) return false;
        }
        return true;
    });
    c.emplace_back("diagnostics.lipschitz_of_identity", [] {
        const auto u = GridFunction::sample(small_grid(), [](double x, double) { return x; });
        return std::abs(holder_seminorm(u, 1.0, 0.5).x - 1.0) < 1e-9;
    });
    c.emplace_back("diagnostics.sobolev_zero", [] {
        std::vector<GridFunction> lv;
        for (int k = 0; k < 3; ++k) {
            lv.push_back(GridFunction::sample(small_grid().refined(k), [](double, double) { return 0.0; }));
        }
        const auto t = sobolev_stability(lv, 2.0, NormWindow{-0.5, 0.5, 0.1, 0.4});
        for (const auto& r : t.rows) {
            if (r.norm_t != 0.0 || r.norm_x != 0.0 || r.norm_xx != 0.0) return false;
        }
        return true;
    });
    c.emplace_back("config.reduced_operator_precondition", [] {
        RunConfig rc;
        rc.problem.family = "nig";
        rc.problem.levy = {{"alpha", 10.0}, {"beta", -3.0}, {"delta", 0.3}};
        rc.numerics.op = "reduced";
        return throws<ConfigError>([&] { to_solve_config(rc).validate(); });
    });
    c.emplace_back("config.round_trip", [] {
        RunConfig rc;
        rc.problem.family = "kou";
        rc.problem.levy = {{"intensity", 1.0}, {"p_up", 0.4}, {"eta_up", 10.0}, {"eta_down", 5.0}};
        rc.oracle.probe_x = {-0.1, 0.25};
        return parse_text(rc.to_text()) == rc;
    });
    return c;
}

}  // namespace

int selftest(std::ostream& out) {
    int failed = 0;
    for (const auto& [name, fn] : checks()) {
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            out << "  exception in " << name << ": " << e.what() << "\n";
        }
        out << (ok ? "ok     " : "FAILED ") << name << "\n";
        failed += ok ? 0 : 1;
    }
    out << (failed == 0 ? "selftest passed" : "selftest failed: " + std::to_string(failed) + " check(s)") << "\n";
    return failed == 0 ? 0 : 3;
}

}  // namespace levystop
