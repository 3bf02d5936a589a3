#include "doctest.h"

#include <cmath>
#include <vector>

#include "levystop/errors.hpp"
#include "levystop/mollifier.hpp"
#include "levystop/penalty.hpp"

using namespace levystop;

namespace {

SpaceTimeGrid unit_grid() {
    SpaceTimeGrid g;
    g.x_lo = -2.0;
    g.x_hi = 2.0;
    g.pad = 1.0;
    g.nx = 80;
    g.nt = 10;
    g.T = 1.0;
    return g;
}

}  // namespace

TEST_CASE("anchor and zero set are exact") {
    for (double eps : {0.2, 0.1, 0.05, 0.025, 1e-3}) {
        for (double p0 : {-1.0, -0.37, -25.0}) {
            const auto p = PenaltySpec::build(eps, p0);
            CHECK(std::abs(p(0.0) - p0) <= 1e-12 * std::abs(p0));
            CHECK(p(eps) == 0.0);
            CHECK(p(0.5 * eps + p.kernel_width()) == 0.0);
            CHECK(p.derivative(eps) == 0.0);
            // Linear branch: slope -2·p0/eps.
            CHECK(p.derivative(0.0) == doctest::Approx(-2.0 * p0 / eps).epsilon(1e-14));
        }
    }
}

TEST_CASE("sampled shape properties") {
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        const auto p = PenaltySpec::build(eps, -1.3);
        const int n = 10000;
        double prev = p(-5.0), prev_d = p.derivative(-5.0);
        for (int i = 1; i < n; ++i) {
            const double y = -5.0 + 10.0 * i / (n - 1);
            const double v = p(y), d = p.derivative(y), d2 = p.second_derivative(y);
            CHECK(v <= 0.0);
            if (y >= eps) CHECK(v == 0.0);
            CHECK(v >= prev - 1e-15);
            CHECK(d >= 0.0);
            CHECK(d <= p.max_derivative() * (1 + 1e-14));
            CHECK(d <= prev_d + 1e-12);
            CHECK(d2 <= 0.0);
            prev = v;
            prev_d = d;
        }
    }
}

TEST_CASE("derivatives match finite differences") {
    const auto p = PenaltySpec::build(0.1, -2.0);
    const double h = 1e-6;
    for (double y = 0.03; y < 0.07; y += 1e-3) {
        CHECK(p.derivative(y) == doctest::Approx((p(y + h) - p(y - h)) / (2 * h)).epsilon(1e-6));
        CHECK(p.second_derivative(y) ==
              doctest::Approx((p.derivative(y + h) - p.derivative(y - h)) / (2 * h)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("pointwise limits as eps shrinks") {
    double prev = 0.0;
    for (double eps = 0.2; eps > 1e-4; eps *= 0.5) {
        const auto p = PenaltySpec::build(eps, -1.0);
        if (eps < 0.3) CHECK(p(0.3) == 0.0);
        const double v = p(-0.3);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < -1e3);
}

TEST_CASE("zero depth is the zero penalty") {
    const auto p = PenaltySpec::build(0.1, 0.0);
    for (double y : {-3.0, 0.0, 0.05, 1.0}) {
        CHECK(p(y) == 0.0);
        CHECK(p.derivative(y) == 0.0);
    }
}

TEST_CASE("build rejects bad input") {
    CHECK_THROWS_AS(PenaltySpec::build(0.1, 0.5), ParameterError);
    CHECK_THROWS_AS(PenaltySpec::build(0.0, -1.0), ParameterError);
    CHECK_THROWS_AS(PenaltySpec::build(1.0, -1.0), ParameterError);
    CHECK_THROWS_AS(PenaltySpec::build(0.1, std::nan("")), ParameterError);
}

TEST_CASE("vector application") {
    const auto p = PenaltySpec::build(0.1, -1.0);
    std::vector<double> v{1.0, 0.5, 0.0}, g{1.0, 0.7, 0.3}, out(3);
    p.apply(v, g, out);
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == doctest::Approx(p(-0.2)));
    CHECK(out[2] == doctest::Approx(p(-0.3)));
}

TEST_CASE("anchor value") {
    const auto grid = unit_grid();
    const auto flat = PayoffSpec::custom({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, 1.0, 1.0});
    const auto c0 = CoefficientField::constant(1.0, 0.0, 0.0);
    CHECK(flat.J_semi() == 0.0);
    CHECK(penalty_anchor(c0, flat, LevyModel::none(), grid) == 0.0);
    CHECK(penalty_anchor(c0, PayoffSpec::put(1.0), LevyModel::none(), grid) == -1.0);

    // N(0, 0.1²) jumps at rate 2: the |y| > 1 tail is 10 standard deviations
    // out, so small_var(1) = 2·0.01 and big_mass = 0 to double precision.
    const auto c = CoefficientField::constant(1.0, 0.1, 0.05);
    const double want = -(1.0 + 0.1 + 0.05 + 0.02);
    CHECK(std::abs(penalty_anchor(c, PayoffSpec::put(1.0), LevyModel::merton(2.0, 0.0, 0.1), grid) - want) <= 1e-12);

    // Non-constant coefficients use maxima over every node, padding included.
    const auto cv = CoefficientField::functions([](double x, double) { return 0.5 + 0.1 * x * x; },
                                                [](double x, double) { return -0.2 * x; },
                                                [](double, double t) { return 0.01 * (1 + t); }, 0.0);
    const auto mx = cv.maxima(grid);
    CHECK(mx.a == doctest::Approx(0.5 + 0.1 * 9.0));
    CHECK(penalty_anchor(cv, PayoffSpec::put(2.0), LevyModel::none(), grid) ==
          doctest::Approx(-(mx.a * 2.0 + mx.abs_b * 2.0 + mx.r * 2.0)));
}

TEST_CASE("fast evaluation matches the bump quadrature") {
    const auto p = PenaltySpec::build(0.08, -1.7);
    const double s = p.slope(), w = p.kernel_width();
    for (int k = 0; k <= 997; ++k) {
        const double t = -1.0 + 2.0 * k / 997.0;
        const double y = 0.04 + w * t;
        CHECK(std::abs(p(y) - s * w * bump::upper_ramp(t)) <= 1e-14 * s);
        CHECK(std::abs(p.derivative(y) - s * (1.0 - bump::cdf(t))) <= 1e-13 * s);
    }
}
