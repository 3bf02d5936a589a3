#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "levystop/errors.hpp"
#include "levystop/oracles.hpp"
#include "levystop/solver.hpp"

using namespace levystop;

namespace {

double at_x(const GridFunction& u, double x, int n = 0) {
    const auto& g = u.grid();
    const double s = (x - g.x(0)) / g.h();
    const int i = static_cast<int>(std::floor(s));
    const double w = s - i;
    return (1 - w) * u.at(i, n) + w * u.at(i + 1, n);
}

SolveConfig bs_desk(int nx = 400, int nt = 200) {
    SolveConfig c;
    c.grid.x_lo = -2.0;
    c.grid.x_hi = 2.0;
    c.grid.pad = 1.0;
    c.grid.nx = nx;
    c.grid.nt = nt;
    c.grid.T = 1.0;
    const double sigma = 0.3, r = 0.05;
    c.coeffs = CoefficientField::constant(0.5 * sigma * sigma, r - 0.5 * sigma * sigma, r);
    c.payoff = PayoffSpec::put(1.0);
    return c;
}

SolveConfig merton_desk(int nx, int nt) {
    SolveConfig c = bs_desk(nx, nt);
    c.model = LevyModel::merton(1.0, -0.1, 0.15);
    const double a = 0.02;
    c.coeffs = CoefficientField::constant(a, oracle::risk_neutral_drift(c.model, 0.05, a), 0.05);
    return c;
}

PayoffSpec zero_payoff() { return PayoffSpec::custom({-1.0, 0.0, 1.0, 2.0}, {0.0, 0.0, 0.0, 0.0}); }

}  // namespace

TEST_CASE("heat equation eigenfunction") {
    SolveConfig c = bs_desk(200, 400);
    c.grid.T = 0.5;
    c.coeffs = CoefficientField::constant(1.0, 0.0, 0.0);
    c.mode = SolveMode::EuropeanCauchy;
    Stepper st(c);
    const auto& g = c.grid;
    std::vector<double> far(static_cast<std::size_t>(g.points() + 2 * st.reach()));
    for (std::size_t k = 0; k < far.size(); ++k) far[k] = std::sin(g.x(static_cast<int>(k) - st.reach()));
    st.set_far_field(far, 1.0);  // e^{-τ} sin x
    std::vector<double> v(far.begin() + st.reach(), far.begin() + st.reach() + g.points()), next(v.size());
    for (int n = 0; n < g.nt; ++n) {
        st.step(v, n, nullptr, {}, false, next);
        v.swap(next);
    }
    double err = 0.0;
    for (int i = 0; i <= g.nx; ++i) err = std::max(err, std::abs(v[i] - std::exp(-g.T) * std::sin(g.x(i))));
    CHECK(err <= g.h() * g.h() + g.dt());
    CHECK(err > 0.0);
}

TEST_CASE("zero obstacle stays zero") {
    SolveConfig c = bs_desk(100, 50);
    c.coeffs = CoefficientField::constant(0.045, 0.0, 0.0);
    c.payoff = zero_payoff();
    c.mode = SolveMode::Penalized;
    const auto pen = solve_vi(c);
    for (double v : pen.value.data()) CHECK(v == 0.0);
    c.mode = SolveMode::ProjectedImplicit;
    c.coeffs = CoefficientField::constant(0.045, 0.01, 0.05);
    c.model = LevyModel::kou(1.0, 0.4, 12.0, 8.0);
    const auto proj = solve_vi(c);
    for (double v : proj.value.data()) CHECK(v == 0.0);
}

TEST_CASE("European diffusion matches Black-Scholes") {
    SolveConfig c = bs_desk(400, 800);
    c.mode = SolveMode::EuropeanCauchy;
    const auto rep = solve_vi(c);
    for (double S : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const double want = oracle::bs_put(S, 1.0, 1.0, 0.05, 0.0, 0.3);
        CHECK(std::abs(at_x(rep.value, std::log(S)) / want - 1.0) <= 2e-3);
    }
}

TEST_CASE("European Merton matches the series") {
    SolveConfig c = merton_desk(400, 400);
    c.mode = SolveMode::EuropeanCauchy;
    const auto rep = solve_vi(c);
    CHECK(rep.truncation_mass <= 1e-8);
    for (double S : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const double want = oracle::merton_put(S, 1.0, 1.0, 0.05, 0.2, 1.0, -0.1, 0.15);
        CHECK(std::abs(at_x(rep.value, std::log(S)) / want - 1.0) <= 5e-3);
    }
}

TEST_CASE("American diffusion put matches the binomial tree") {
    SolveConfig c = bs_desk(400, 800);
    c.mode = SolveMode::ProjectedImplicit;
    const auto rep = solve_vi(c);
    CHECK(std::abs(at_x(rep.value, 0.0) / 0.0986979707284191 - 1.0) <= 2e-3);
    CHECK(std::abs(at_x(rep.value, std::log(0.8)) / 0.21324297635613 - 1.0) <= 5e-3);
    // Free boundary at t = 0 lies below the strike and is unique.
    // The exercise boundary is the first crossing; far out of the money u and
    // g agree to within the gap tolerance as well.
    REQUIRE(!rep.boundary[0].empty());
    CHECK(rep.boundary[0][0] < 0.0);
    CHECK(rep.boundary[0][0] > std::log(0.6));
}

TEST_CASE("penalized and projected solutions agree") {
    SolveConfig c = bs_desk(200, 200);
    c.mode = SolveMode::Penalized;
    const auto pen = solve_vi(c);
    c.mode = SolveMode::ProjectedImplicit;
    const auto proj = solve_vi(c);
    const auto& g = c.grid;
    double d = 0.0;
    for (int n = 0; n <= g.nt; ++n) {
        for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
            d = std::max(d, std::abs(pen.value.at(i, n) - proj.value.at(i, n)));
        }
    }
    const double scale = std::abs(pen.anchor);
    CHECK(d <= std::max(2.0 * c.eps_schedule.back(), 5.0 * (g.h() * g.h() + g.dt()) * scale));
}

TEST_CASE("penalized run respects the a priori bounds") {
    for (const auto& m : {LevyModel::none(), LevyModel::merton(1.0, -0.1, 0.15), LevyModel::nig(10.0, -3.0, 0.3),
                          LevyModel::tempered_stable(0.5, 0.5, 1.5, 1.5, 5.0, 5.0)}) {
        SolveConfig c = bs_desk(200, 200);
        c.model = m;
        c.coeffs = CoefficientField::constant(0.045, oracle::risk_neutral_drift(m, 0.05, 0.045), 0.05);
        const auto rep = solve_vi(c);
        const auto& g = c.grid;
        const double tol = 10.0 * (g.h() * g.h() + g.dt()) + 1e-9;
        const double K = c.payoff.K_bound();
        REQUIRE(rep.eps_stats.size() == c.eps_schedule.size());
        double gmin = 1e300, gmax = 0.0;
        for (const auto& s : rep.eps_stats) {
            CHECK(s.v_min >= -tol);
            CHECK(s.v_max <= K + 1.0 + tol);
            CHECK(s.gap_min >= -tol);
            CHECK(s.p_min >= s.anchor - tol);
            CHECK(s.p_max <= 0.0);
            CHECK(s.anchor == rep.anchor);
            gmin = std::min(gmin, s.grad_max);
            gmax = std::max(gmax, s.grad_max);
        }
        CHECK((gmax - gmin) / gmax < 0.2);
        REQUIRE(rep.eps_trace.size() == c.eps_schedule.size() - 1);
        for (std::size_t k = 1; k < rep.eps_trace.size(); ++k) CHECK(rep.eps_trace[k] < rep.eps_trace[k - 1]);
        CHECK(rep.warnings.empty());
    }
}

TEST_CASE("terminal slice is the obstacle") {
    SolveConfig c = bs_desk(100, 50);
    c.mode = SolveMode::Penalized;
    const auto pen = solve_vi(c);
    const auto ge = c.payoff.mollify(c.eps_schedule.back());
    for (int i = 0; i <= c.grid.nx; ++i) CHECK(pen.value.at(i, c.grid.nt) == ge(c.grid.x(i)));
    c.mode = SolveMode::ProjectedImplicit;
    const auto proj = solve_vi(c);
    for (int i = 0; i <= c.grid.nx; ++i) CHECK(proj.value.at(i, c.grid.nt) == c.payoff(c.grid.x(i)));
}

TEST_CASE("raising the obstacle never lowers the value") {
    SolveConfig lo = merton_desk(150, 100);
    lo.mode = SolveMode::ProjectedImplicit;
    SolveConfig hi = lo;
    hi.payoff = PayoffSpec::put(1.15);
    const auto a = solve_vi(lo), b = solve_vi(hi);
    for (std::size_t k = 0; k < a.value.data().size(); ++k) CHECK(b.value.data()[k] >= a.value.data()[k]);
}

TEST_CASE("comparison principle with nonnegative data") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        SolveConfig c = merton_desk(120, 60);
        c.mode = SolveMode::EuropeanCauchy;
        c.coeffs = CoefficientField::constant(0.01 + 0.1 * U(rng), 0.2 * (U(rng) - 0.5), 0.1 * U(rng));
        const double amp = U(rng), freq = 1.0 + 5.0 * U(rng);
        c.source = [amp, freq](double x, double) { return amp * (1.0 + std::sin(freq * x)); };
        c.payoff = PayoffSpec::custom({-2.0, -0.5, 0.3, 1.0}, {U(rng), U(rng), U(rng), U(rng)});
        const auto rep = solve_vi(c);
        for (double v : rep.value.data()) CHECK(v >= 0.0);
    }
}

TEST_CASE("single step entry point matches the stepper") {
    SolveConfig c = merton_desk(100, 50);
    const double eps = 0.05;
    const auto p = PenaltySpec::build(eps, penalty_anchor(c.coeffs, c.payoff, c.model, c.grid));
    const auto ge = c.payoff.mollify(eps);
    std::vector<double> v(static_cast<std::size_t>(c.grid.points()));
    for (int i = 0; i <= c.grid.nx; ++i) v[i] = ge(c.grid.x(i));
    const auto one = step_penalized(v, 0, eps, p, c);
    const auto full = solve_penalized(c, eps);
    for (int i = 0; i <= c.grid.nx; ++i) CHECK(one[i] == full.value.at(i, c.grid.nt - 1));
}

TEST_CASE("VI residual shrinks under refinement") {
    double prev = 1e300;
    for (int k = 0; k < 3; ++k) {
        SolveConfig c = bs_desk(100, 50);
        c.grid = c.grid.refined(k);
        c.mode = SolveMode::ProjectedImplicit;
        const auto rep = solve_vi(c);
        const auto res = residual_vi(rep.value, c, 1e-8, 2, 0.5);
        double worst = 0.0;
        int counted = 0;
        for (double v : res.data()) {
            if (std::isnan(v)) continue;
            worst = std::max(worst, std::abs(v));
            ++counted;
        }
        CHECK(counted > 0);
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("configuration errors") {
    SolveConfig c = bs_desk(100, 50);
    c.eps_schedule = {0.1, 0.2};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.eps_schedule = {0.1, 1e-5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.eps_schedule = {0.1};
    c.theta = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.theta = 0.0;
    c.grid.nx = 400;
    try {
        c.validate();
        FAIL("explicit local part should exceed the budget");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nt >=") != std::string::npos);
    }
    c.theta = 1.0;
    c.grid.nx = 100;
    c.source = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.source = nullptr;
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(solve_mode_from_string("explicit"), ConfigError);
    CHECK(solve_mode_from_string(to_string(SolveMode::ProjectedImplicit)) == SolveMode::ProjectedImplicit);
}

TEST_CASE("drift without diffusion breaks monotonicity") {
    SolveConfig c = bs_desk(100, 50);
    c.coeffs = CoefficientField::constant(0.0, 1.0, 0.0);
    c.mode = SolveMode::ProjectedImplicit;
    CHECK_THROWS_AS(solve_vi(c), NumericalError);
}

TEST_CASE("thread count does not change results") {
    SolveConfig c = merton_desk(120, 60);
    setenv("LEVYSTOP_THREADS", "1", 1);
    const auto a = solve_vi(c);
    setenv("LEVYSTOP_THREADS", "4", 1);
    const auto b = solve_vi(c);
    unsetenv("LEVYSTOP_THREADS");
    CHECK(a.value.data() == b.value.data());
    CHECK(a.eps_trace == b.eps_trace);
}

TEST_CASE("reduced operator matches the full operator for finite-variation jumps") {
    SolveConfig c = bs_desk(400, 200);
    c.model = LevyModel::variance_gamma(0.2, 0.3, -0.1);
    const double a = 0.02;
    c.coeffs = CoefficientField::constant(a, oracle::risk_neutral_drift(c.model, 0.05, a), 0.05);
    c.mode = SolveMode::ProjectedImplicit;
    const auto full = solve_vi(c);
    c.reduced_operator = true;
    const auto red = solve_vi(c);
    for (double x : {-0.3, 0.0, 0.3}) CHECK(at_x(red.value, x) == doctest::Approx(at_x(full.value, x)).epsilon(5e-3));

    c.model = LevyModel::nig(10.0, -3.0, 0.3);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
