#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "levystop/errors.hpp"
#include "levystop/levy.hpp"

using namespace levystop;

namespace {

std::vector<LevyModel> all_families() {
    return {
        LevyModel::none(),
        LevyModel::merton(2.0, -0.05, 0.1),
        LevyModel::kou(1.5, 0.4, 12.0, 8.0),
        LevyModel::variance_gamma(0.2, 0.3, -0.1),
        LevyModel::nig(10.0, -3.0, 0.3),
        LevyModel::tempered_stable(0.8, 1.0, 0.7, 1.5, 3.0, 2.0),
    };
}

// Trapezoid rule in u = ln y on n uniformly spaced nodes over [ln lo, ln hi]:
// ∫ f(y) dy = ∫ f(e^u) e^u du.
double log_trapezoid(const auto& f, double lo, double hi, int n) {
    const double ua = std::log(lo), ub = std::log(hi);
    const double du = (ub - ua) / (n - 1);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = std::exp(ua + i * du);
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        s += w * f(y) * y;
    }
    return s * du;
}

}  // namespace

TEST_CASE("density of the empty measure is zero") {
    CHECK(LevyModel::none().density(0.5) == 0.0);
    CHECK(LevyModel::none().alpha() == 0.0);
}

TEST_CASE("tempered stable density at y = 1") {
    auto m = LevyModel::tempered_stable(0.0, 1.0, 0.0, 0.5, 1.0, 1.0);
    CHECK(m.density(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("density at the singular point is a domain error") {
    auto m = LevyModel::merton(2.0, 0.0, 0.1);
    CHECK_THROWS_AS(m.density(0.0), DomainError);
}

TEST_CASE("singularity exponents") {
    CHECK(singularity_exponent(LevyModel::variance_gamma(0.2, 0.3, -0.1)) == 0.0);
    CHECK(singularity_exponent(LevyModel::nig(10.0, -3.0, 0.3)) == 1.0);
    CHECK(singularity_exponent(LevyModel::merton(2.0, 0.0, 0.1)) == 0.0);
    CHECK(singularity_exponent(LevyModel::tempered_stable(0.8, 1.0, 0.7, 1.5, 3.0, 2.0)) == 1.5);
    // A side with zero weight does not contribute its exponent.
    CHECK(singularity_exponent(LevyModel::tempered_stable(0.0, 1.0, 1.9, 0.5, 3.0, 2.0)) == 0.5);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(LevyModel::tempered_stable(1.0, 1.0, 2.0, 0.5, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(LevyModel::tempered_stable(1.0, 1.0, 0.5, 0.5, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(LevyModel::nig(1.0, 1.0, 0.3), ParameterError);
    CHECK_THROWS_AS(LevyModel::merton(2.0, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(LevyModel::from_params(LevyFamily::Merton, {{"intensity", 1.0}}), ParameterError);
    CHECK_THROWS_AS(LevyModel::from_params(LevyFamily::Merton,
                                           {{"intensity", 1.0}, {"mean", 0.0}, {"stdev", 0.1}, {"bogus", 1.0}}),
                    ParameterError);
    CHECK(levy_family_from_string("nig") == LevyFamily::NIG);
    CHECK_THROWS_AS(levy_family_from_string("cauchy"), ParameterError);
}

TEST_CASE("symmetric Merton measure has zero compensator drift") {
    auto m = LevyModel::merton(2.0, 0.0, 0.1);
    for (double eps : {0.01, 0.1, 0.5, 1.0}) {
        CHECK(std::abs(tails(m, eps).comp_drift) < 1e-15);
    }
}

TEST_CASE("tails of the empty measure vanish") {
    auto t = tails(LevyModel::none(), 0.5);
    CHECK(t.small_var == 0.0);
    CHECK(t.comp_drift == 0.0);
    CHECK(t.big_mass == 0.0);
    CHECK(t.big_mean_abs == 0.0);
    CHECK(t.fv_drift() == 0.0);
}

TEST_CASE("tails reject eps outside (0, 1]") {
    auto m = LevyModel::merton(2.0, 0.0, 0.1);
    CHECK_THROWS_AS(tails(m, 0.0), ParameterError);
    CHECK_THROWS_AS(tails(m, 1.5), ParameterError);
}

TEST_CASE("fv_drift is unsupported for infinite variation") {
    CHECK_THROWS_AS(tails(LevyModel::nig(10.0, -3.0, 0.3), 0.1).fv_drift(), UnsupportedOperation);
    CHECK_NOTHROW(tails(LevyModel::variance_gamma(0.2, 0.3, -0.1), 0.1).fv_drift());
}

TEST_CASE("tempered stable tails match a brute-force log-spaced Riemann sum") {
    auto m = LevyModel::tempered_stable(0.8, 1.0, 0.7, 1.5, 3.0, 2.0);
    const double eps = 0.1;
    const int n = 1'000'000;
    auto rho_pos = [&](double y) { return m.density(y); };
    auto rho_neg = [&](double y) { return m.density(-y); };

    const double small_var = log_trapezoid([&](double y) { return y * y * (rho_pos(y) + rho_neg(y)); }, 1e-40, eps, n);
    const double comp = log_trapezoid([&](double y) { return y * (rho_pos(y) - rho_neg(y)); }, eps, 1.0, n);
    const double big_mass = log_trapezoid([&](double y) { return rho_pos(y) + rho_neg(y); }, 1.0, 60.0, n);
    const double big_abs = log_trapezoid([&](double y) { return y * (rho_pos(y) + rho_neg(y)); }, 1.0, 60.0, n);

    auto t = tails(m, eps);
    CHECK(t.small_var == doctest::Approx(small_var).epsilon(1e-8));
    CHECK(t.comp_drift == doctest::Approx(comp).epsilon(1e-8));
    CHECK(t.big_mass == doctest::Approx(big_mass).epsilon(1e-8));
    CHECK(t.big_mean_abs == doctest::Approx(big_abs).epsilon(1e-8));
}

TEST_CASE("closed-form moments agree with the numeric route") {
    for (const auto& m : {LevyModel::merton(2.0, -0.05, 0.1), LevyModel::kou(1.5, 0.4, 12.0, 8.0)}) {
        for (Side s : {Side::Negative, Side::Positive}) {
            for (int k = 0; k <= 2; ++k) {
                for (auto [lo, hi] : {std::pair{0.0, 0.1}, {0.1, 1.0}, {1.0, std::numeric_limits<double>::infinity()},
                                      {0.03, 0.7}}) {
                    const double closed = m.side_moment(k, lo, hi, s);
                    const double numeric = m.side_integral([k](double y) { return std::pow(std::abs(y), k); }, lo,
                                                           hi, s, static_cast<double>(k));
                    CHECK(closed == doctest::Approx(numeric).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("small_var is nondecreasing in eps and vanishes as eps -> 0") {
    for (const auto& m : all_families()) {
        double prev = 0.0;
        for (double eps : {1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0}) {
            const double v = small_var(m, eps);
            CHECK(v >= prev);
            prev = v;
        }
        CHECK(small_var(m, 1e-12) <= 1e-4 * std::max(small_var(m, 1.0), 1e-300) + 1e-300);
    }
}

TEST_CASE("density is nonnegative and respects the singularity bound") {
    for (const auto& m : all_families()) {
        double worst = 0.0;
        for (int i = 1; i <= 10000; ++i) {
            const double y = -5.0 + 10.0 * i / 10001.0;
            if (y == 0.0) continue;
            CHECK(m.density(y) >= 0.0);
            if (std::abs(y) <= 1.0 && m.sing_const() > 0.0) {
                worst = std::max(worst, m.density(y) * std::pow(std::abs(y), 1.0 + m.alpha()) / m.sing_const());
            }
        }
        // Log-spaced points close to the singularity as well.
        for (int i = 0; i < 2000 && m.sing_const() > 0.0; ++i) {
            const double y = std::pow(10.0, -8.0 + 8.0 * i / 1999.0);
            for (double s : {-1.0, 1.0}) {
                worst = std::max(worst, m.density(s * y) * std::pow(y, 1.0 + m.alpha()) / m.sing_const());
            }
        }
        CHECK(worst <= 1.0 + 1e-9);
    }
}

TEST_CASE("quadrature tolerance consistency") {
    for (const auto& m : all_families()) {
        auto fine = tails(m, 0.1, 1e-10);
        auto coarse = tails(m, 0.1, 1e-8);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
        CHECK(rel(fine.small_var, coarse.small_var) <= 1e-7);
        CHECK(rel(fine.big_mass, coarse.big_mass) <= 1e-7);
        CHECK(rel(fine.big_mean_abs, coarse.big_mean_abs) <= 1e-7);
        CHECK(std::abs(fine.comp_drift - coarse.comp_drift) <= 1e-7 * std::max(1.0, std::abs(fine.comp_drift)));
    }
}

TEST_CASE("truncation radius bounds the neglected tail") {
    for (const auto& m : all_families()) {
        const double r = m.truncation_radius(1e-8);
        if (m.family() == LevyFamily::None) {
            CHECK(r == 0.0);
            continue;
        }
        const double inf = std::numeric_limits<double>::infinity();
        CHECK(m.abs_moment(0, r, inf) + m.abs_moment(1, r, inf) <= 1e-8 * (1 + 1e-6));
        CHECK(m.abs_moment(0, 0.9 * r, inf) + m.abs_moment(1, 0.9 * r, inf) > 1e-8);
    }
}

TEST_CASE("exponential compensator of a Merton measure") {
    // ∫ (e^y - 1 - y 1{|y|<=1}) ν(dy) = λ (e^{μ + s²/2} - 1) - ∫_{|y|<=1} y ν(dy)
    auto m = LevyModel::merton(2.0, -0.05, 0.1);
    const double expected = 2.0 * (std::exp(-0.05 + 0.005) - 1.0) - m.moment(1, 0.0, 1.0);
    CHECK(m.exp_compensator() == doctest::Approx(expected).epsilon(1e-9));
}
