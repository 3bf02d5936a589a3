#include "levystop/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levystop/errors.hpp"
#include "levystop/kernels.hpp"
#include "levystop/quadrature.hpp"

namespace levystop {

namespace {

// Cumulative integrals of the unit hat max(0, 1-|u|): C1 = ∫ hat, C2 = ∫ C1.
double hat_c1(double u) {
    if (u <= -1.0) return 0.0;
    if (u <= 0.0) return 0.5 * (u + 1.0) * (u + 1.0);
    if (u <= 1.0) return 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
    return 1.0;
}

double hat_c2(double u) {
    if (u <= -1.0) return 0.0;
    if (u <= 0.0) return (u + 1.0) * (u + 1.0) * (u + 1.0) / 6.0;
    if (u <= 1.0) return u + (1.0 - u) * (1.0 - u) * (1.0 - u) / 6.0;
    return u;
}

// ∫_0^y (y - s) hat_j(s) ds where hat_j is the nodal hat centred at j·h.
double hat_second_antiderivative(double y, int j, double h) {
    // Polynomial form on the first cell avoids cancellation as y -> 0.
    if (std::abs(y) <= h) {
        const double c = y * y * y / (6.0 * h);
        if (j == 0) return 0.5 * y * y - (y > 0.0 ? c : -c);
        if (j == 1) return y > 0.0 ? c : 0.0;
        if (j == -1) return y < 0.0 ? -c : 0.0;
        return 0.0;
    }
    return h * h * (hat_c2((y - j * h) / h) - hat_c2(-j)) - y * h * hat_c1(-j);
}

struct CellMoments {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;  // ∫ρ, ∫ρ·s, ∫ρ·s² with s = |y| - base
};

// Moments of ρ on the side segment [a, b] (in |y|), measured from `base`.
CellMoments cell_moments(const LevyModel& m, Side side, double a, double b, double base) {
    CellMoments out;
    const double sgn = side == Side::Positive ? 1.0 : -1.0;
    if (a == 0.0) {
        // Only reachable for the reduced operator with α < 1: ∫ρ diverges but
        // its weight multiplies φ_i - φ_i and is dropped.
        out.i0 = std::numeric_limits<double>::quiet_NaN();
        out.i1 = m.side_integral([base](double y) { return std::abs(y) - base; }, 0.0, b, side, 1.0);
        out.i2 = m.side_integral([base](double y) { return (std::abs(y) - base) * (std::abs(y) - base); }, 0.0, b,
                                 side, 2.0);
        return out;
    }
    const auto rule = quad::gauss_legendre(16);
    double lo = a;
    while (lo < b) {
        // Dyadic pieces keep the power singularity at 0 far from each piece.
        const double hi = std::min(b, 2.0 * lo);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double y = mid + half * rule.nodes[k];
            const double rho = m.density(sgn * y) * rule.weights[k] * half;
            const double s = y - base;
            out.i0 += rho;
            out.i1 += rho * s;
            out.i2 += rho * s * s;
        }
        lo = hi;
    }
    return out;
}

// Adds hat weights and the quadratic correction for jumps with |y| in [lo, R].
void add_big_jump_weights(const LevyModel& m, double h, double lo, double R, std::vector<double>& w, int k_min) {
    auto add = [&](int k, double v) { w[static_cast<std::size_t>(k - k_min)] += v; };
    for (Side side : {Side::Negative, Side::Positive}) {
        const int sgn = side == Side::Positive ? 1 : -1;
        const int c_first = static_cast<int>(std::floor(lo / h));
        const int c_last = static_cast<int>(std::ceil(R / h)) - 1;
        for (int c = c_first; c <= c_last; ++c) {
            const double yc = c * h;
            const double a = std::max(lo, yc), b = std::min(R, yc + h);
            if (!(b > a)) continue;
            const CellMoments mo = cell_moments(m, side, a, b, yc);
            if (!(a == 0.0)) add(sgn * c, mo.i0 - mo.i1 / h);
            add(sgn * (c + 1), mo.i1 / h);
            // Linear interpolation misses ½ s(h-s) φ''; subtract it with φ''
            // taken as the mean of the two nodal second differences.
            const double e = 0.5 * (h * mo.i1 - mo.i2);
            const double cw = e / (2.0 * h * h);
            add(sgn * (c - 1), -cw);
            add(sgn * c, cw);
            add(sgn * (c + 1), cw);
            add(sgn * (c + 2), -cw);
        }
    }
}

double resolve_radius(const LevyModel& m, double radius) {
    if (m.family() == LevyFamily::None) return 0.0;
    return radius > 0.0 ? radius : m.truncation_radius(1e-8);
}

double neglected_tail(const LevyModel& m, double R) {
    if (m.family() == LevyFamily::None) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    return m.abs_moment(0, R, inf) + m.abs_moment(1, R, inf);
}

}  // namespace

int NonlocalStencil::reach() const {
    int r = 1;
    if (!w.empty()) r = std::max({r, -k_min, k_max()});
    if (rule == SmallJumpRule::Interpolated) r = std::max(r, j_max + 1);
    return r;
}

double NonlocalStencil::weight_sum() const {
    double s = 0.0;
    for (double v : w) s += std::abs(v);
    return s;
}

double default_eps_split(double h) {
    return std::min(1.0, std::max(h, std::sqrt(h)));
}

NonlocalStencil build_nonlocal_stencil(const LevyModel& model, double h, double eps_split, SmallJumpRule rule,
                                       double radius) {
    if (!(h > 0.0)) throw ParameterError("nonlocal stencil: h must be > 0");
    if (!(eps_split > 0.0 && eps_split <= 1.0)) throw ParameterError("nonlocal stencil: eps_split must be in (0, 1]");
    NonlocalStencil s;
    s.h = h;
    s.eps = eps_split;
    s.rule = rule;
    if (model.family() == LevyFamily::None) return s;

    const double R = std::max(resolve_radius(model, radius), eps_split);
    s.radius = R;
    s.neglected = neglected_tail(model, R);
    const int kmax = static_cast<int>(std::ceil(R / h)) + 2;
    s.k_min = -kmax;
    s.w.assign(static_cast<std::size_t>(2 * kmax + 1), 0.0);
    add_big_jump_weights(model, h, eps_split, R, s.w, s.k_min);

    const TailIntegrals t = tails(model, eps_split);
    s.comp = t.comp_drift;
    s.half_small_var = 0.5 * t.small_var;

    if (rule == SmallJumpRule::Interpolated) {
        const int J = static_cast<int>(std::ceil(eps_split / h));
        s.j_max = J;
        s.q.assign(static_cast<std::size_t>(2 * J + 1), 0.0);
        for (int j = -J; j <= J; ++j) {
            for (Side side : {Side::Negative, Side::Positive}) {
                const int sgn = side == Side::Positive ? 1 : -1;
                if (sgn * j < 0) continue;  // hat lies on the other side of 0
                const double lo = std::max(0.0, (std::abs(j) - 1) * h);
                if (!(lo < eps_split)) continue;
                auto f = [j, h](double y) { return hat_second_antiderivative(y, j, h); };
                s.q[static_cast<std::size_t>(j + J)] += model.side_integral(f, lo, eps_split, side, 2.0);
            }
        }
    }
    return s;
}

NonlocalStencil build_reduced_stencil(const LevyModel& model, double h, double radius) {
    if (!(h > 0.0)) throw ParameterError("reduced stencil: h must be > 0");
    if (!model.finite_variation()) {
        throw UnsupportedOperation("reduced jump operator needs finite-variation jumps (alpha < 1)");
    }
    NonlocalStencil s;
    s.h = h;
    s.reduced = true;
    s.rule = SmallJumpRule::Frozen;
    if (model.family() == LevyFamily::None) return s;

    const double R = resolve_radius(model, radius);
    s.radius = R;
    s.neglected = neglected_tail(model, R);
    const int kmax = static_cast<int>(std::ceil(R / h)) + 2;
    s.k_min = -kmax;
    s.w.assign(static_cast<std::size_t>(2 * kmax + 1), 0.0);
    add_big_jump_weights(model, h, 0.0, R, s.w, s.k_min);
    return s;
}

void apply_stencil(const NonlocalStencil& s, std::span<const double> row, int left, std::span<double> out) {
    const std::size_t n = out.size();
    if (left < s.reach() || row.size() < n + 2 * static_cast<std::size_t>(s.reach())) {
        throw ParameterError("apply_stencil: row lacks extension values");
    }
    const double* p = row.data() + left;  // p[i] is node i
    if (s.w.empty()) {
        std::fill(out.begin(), out.end(), 0.0);
    } else {
        kernels::correlate_centered_diff(p + s.k_min, n, s.w.data(), s.w.size(),
                                         static_cast<std::size_t>(-s.k_min), out.data());
    }
    const double h = s.h, inv2h = 1.0 / (2.0 * h), invh2 = 1.0 / (h * h);
    const long nn = static_cast<long>(n);
    if (s.comp != 0.0) {
        for (long i = 0; i < nn; ++i) out[i] -= s.comp * (p[i + 1] - p[i - 1]) * inv2h;
    }
    if (s.rule == SmallJumpRule::Frozen) {
        if (s.half_small_var != 0.0) {
            for (long i = 0; i < nn; ++i) out[i] += s.half_small_var * (p[i + 1] - 2.0 * p[i] + p[i - 1]) * invh2;
        }
    } else if (!s.q.empty()) {
        const int J = s.j_max;
        std::vector<double> d2(n + 2 * static_cast<std::size_t>(J));
        for (long i = -J; i < nn + J; ++i) d2[i + J] = (p[i + 1] - 2.0 * p[i] + p[i - 1]) * invh2;
        std::vector<double> small(n);
        kernels::correlate(d2.data(), n, s.q.data(), s.q.size(), small.data());
        for (std::size_t i = 0; i < n; ++i) out[i] += small[i];
    }
}

std::vector<double> apply_local(const GridFunction& phi, const CoefficientField& c, int n) {
    const SpaceTimeGrid& g = phi.grid();
    if (g.nx < 5) throw ConfigError("apply_local: grid too small (nx < 5)");
    const double h = g.h(), t = g.t(n);
    std::vector<double> out(static_cast<std::size_t>(g.points()));
    for (int i = 0; i <= g.nx; ++i) {
        const double um = phi.extended(i - 1, n), u0 = phi.at(i, n), up = phi.extended(i + 1, n);
        const double x = g.x(i);
        out[i] = c.a(x, t) * (up - 2.0 * u0 + um) / (h * h) + c.b(x, t) * (up - um) / (2.0 * h);
    }
    return out;
}

namespace {

std::vector<double> apply_on_row(const NonlocalStencil& s, const GridFunction& phi, int n) {
    const int reach = s.reach();
    std::vector<double> row;
    phi.extended_row(n, reach, reach, row);
    std::vector<double> out(static_cast<std::size_t>(phi.grid().points()));
    apply_stencil(s, row, reach, out);
    return out;
}

}  // namespace

std::vector<double> apply_nonlocal(const GridFunction& phi, const LevyModel& model, double eps_split, int n) {
    const auto s = build_nonlocal_stencil(model, phi.grid().h(), eps_split, SmallJumpRule::Interpolated);
    return apply_on_row(s, phi, n);
}

std::vector<double> apply_reduced(const GridFunction& phi, const LevyModel& model, int n) {
    const auto s = build_reduced_stencil(model, phi.grid().h());
    return apply_on_row(s, phi, n);
}

double consistency_check(const LevyModel& model, const GridFunction& phi, int n, double eps_split) {
    if (!model.finite_variation()) {
        throw UnsupportedOperation("consistency_check needs finite-variation jumps (alpha < 1)");
    }
    if (model.family() == LevyFamily::None) return 0.0;
    const SpaceTimeGrid& g = phi.grid();
    const double h = g.h();
    const double eps = eps_split > 0.0 ? eps_split : default_eps_split(h);
    // Both stencils must drop the same far tail.
    const double R = model.truncation_radius(1e-8);
    const auto full = build_nonlocal_stencil(model, h, eps, SmallJumpRule::Interpolated, R);
    const auto red = build_reduced_stencil(model, h, R);
    const double fv = tails(model, 1.0).fv_drift();
    const auto a = apply_on_row(full, phi, n);
    const auto b = apply_on_row(red, phi, n);
    double worst = 0.0;
    for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
        const double dx = (phi.extended(i + 1, n) - phi.extended(i - 1, n)) / (2.0 * h);
        worst = std::max(worst, std::abs(a[i] - (b[i] - fv * dx)));
    }
    return worst;
}

}  // namespace levystop
