#include "levystop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levystop/errors.hpp"

namespace levystop {

std::vector<double> boundary_crossings(std::span<const double> gap, const SpaceTimeGrid& grid, double tol) {
    std::vector<double> out;
    for (int i = 0; i < grid.nx; ++i) {
        const double a = gap[i] - tol, b = gap[i + 1] - tol;
        if ((a <= 0.0) == (b <= 0.0)) continue;
        const double s = a / (a - b);
        out.push_back(grid.x(i) + s * grid.h());
    }
    return out;
}

std::string_view to_string(Region r) { return r == Region::Stopping ? "stopping" : "continuation"; }

RegionPartition partition(const GridFunction& u, const PayoffSpec& g, double tol) {
    const SpaceTimeGrid& grid = u.grid();
    RegionPartition part;
    part.grid = grid;
    part.tol = tol;
    part.obstacle.resize(static_cast<std::size_t>(grid.points()));
    for (int i = 0; i <= grid.nx; ++i) part.obstacle[i] = g(grid.x(i));
    part.gap.resize(u.data().size());
    part.labels.resize(u.data().size());
    part.boundary.resize(static_cast<std::size_t>(grid.nt + 1));

    double worst = std::numeric_limits<double>::infinity();
    int wi = 0, wn = 0;
    for (int n = 0; n <= grid.nt; ++n) {
        const std::size_t off = static_cast<std::size_t>(n) * static_cast<std::size_t>(grid.points());
        for (int i = 0; i <= grid.nx; ++i) {
            const double d = u.at(i, n) - part.obstacle[i];
            part.gap[off + i] = d;
            part.labels[off + i] = d > tol ? Region::Continuation : Region::Stopping;
            if (d < worst) {
                worst = d;
                wi = i;
                wn = n;
            }
        }
        part.boundary[n] = boundary_crossings(std::span(part.gap).subspan(off, grid.points()), grid, tol);
    }
    if (worst < -tol) {
        std::ostringstream msg;
        msg << "u - g = " << worst << " < -" << tol << " at x = " << grid.x(wi) << ", t = " << grid.t(wn);
        throw InvariantViolation("obstacle", msg.str());
    }
    return part;
}

std::vector<SmoothFitSample> smooth_fit_gap(const GridFunction& u, const RegionPartition& part) {
    const SpaceTimeGrid& grid = u.grid();
    const double h = grid.h();
    const int lo = grid.interior_begin(), hi = grid.interior_end();
    std::vector<SmoothFitSample> out;
    for (int n = 0; n < grid.nt; ++n) {
        for (double b : part.boundary[n]) {
            const int i = std::clamp(static_cast<int>(std::floor((b - grid.x(0)) / h)), 0, grid.nx - 1);
            const double s = b - grid.x(i);
            const double gb = part.obstacle[i] + s / h * (part.obstacle[i + 1] - part.obstacle[i]);
            if (gb <= part.tol) continue;  // u and g both vanish there; not an exercise boundary

            SmoothFitSample fs;
            fs.n = n;
            fs.t = grid.t(n);
            fs.b = b;
            fs.unreliable = i - 2 < lo + 3 || i + 4 > hi - 3;
            if (i - 2 >= 0 && i + 4 <= grid.nx) {
                auto v = [&](int k) { return u.at(k, n); };
                auto dplus = [&](int k) { return (v(k + 1) - v(k)) / h; };
                // The first continuation node carries the discrete contact
                // layer, so the right side starts one node further out. Under
                // smooth fit u - g grows quadratically off the contact point,
                // so its square root is locally linear there.
                const double s2 = std::sqrt(std::max(part.gap_at(i + 2, n), 0.0));
                const double s3 = std::sqrt(std::max(part.gap_at(i + 3, n), 0.0));
                double bc = b;
                if (s3 > s2) bc = std::clamp(grid.x(i + 2) - h * s2 / (s3 - s2), grid.x(i) - h, grid.x(i + 2));
                fs.b = bc;
                const double sl = bc - grid.x(i);
                fs.left = dplus(i - 1) + (sl + 0.5 * h) * (dplus(i - 1) - dplus(i - 2)) / h;
                const double mr = grid.x(i + 2) + 0.5 * h;
                fs.right = dplus(i + 2) + (bc - mr) * (dplus(i + 3) - dplus(i + 2)) / h;
                fs.gap = std::abs(fs.left - fs.right);
            } else {
                fs.unreliable = true;
            }
            out.push_back(fs);
        }
    }
    return out;
}

SmoothFitSummary summarize_smooth_fit(std::span<const SmoothFitSample> samples, double t_max) {
    SmoothFitSummary out;
    double ss = 0.0;
    for (const auto& s : samples) {
        if (s.unreliable || s.t > t_max) continue;
        out.max = std::max(out.max, s.gap);
        ss += s.gap * s.gap;
        ++out.count;
    }
    if (out.count > 0) out.rms = std::sqrt(ss / out.count);
    return out;
}

HolderSeminorm holder_seminorm(const GridFunction& f, double exp_x, double exp_t, double window) {
    if (!(exp_x > 0.0 && exp_x <= 1.0) || !(exp_t > 0.0 && exp_t <= 1.0)) {
        throw ParameterError("holder_seminorm: exponents must lie in (0, 1]");
    }
    const SpaceTimeGrid& g = f.grid();
    if (window <= 0.0) window = std::min(1.0, 0.25 * (g.x_hi - g.x_lo));
    const int lo = g.interior_begin(), hi = g.interior_end();
    const int kx = std::max(1, static_cast<int>(std::floor(window / g.h() + 1e-9)));
    const int kt = std::max(1, static_cast<int>(std::floor(window / g.dt() + 1e-9)));

    HolderSeminorm out;
    for (int n = 0; n <= g.nt; ++n) {
        for (int i = lo; i <= hi; ++i) {
            const double fi = f.at(i, n);
            for (int j = i + 1; j <= std::min(hi, i + kx); ++j) {
                const double q = std::abs(f.at(j, n) - fi) / std::pow(g.x(j) - g.x(i), exp_x);
                out.x = std::max(out.x, q);
            }
            for (int m = n + 1; m <= std::min(g.nt, n + kt); ++m) {
                const double q = std::abs(f.at(i, m) - fi) / std::pow(g.t(m) - g.t(n), exp_t);
                out.t = std::max(out.t, q);
            }
        }
    }
    return out;
}

SobolevTable sobolev_stability(std::span<const GridFunction> levels, double p, const NormWindow& w) {
    if (levels.size() < 3) throw ParameterError("sobolev_stability: need at least three refinement levels");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("sobolev_stability: p must be finite and >= 1");
    if (!(w.x_lo < w.x_hi) || !(w.t_lo < w.t_hi)) throw ParameterError("sobolev_stability: empty window");

    SobolevTable tab;
    tab.p = p;
    for (const GridFunction& u : levels) {
        const SpaceTimeGrid& g = u.grid();
        const double h = g.h(), dt = g.dt();
        const int i0 = static_cast<int>(std::ceil((w.x_lo - g.x(0)) / h - 1e-9));
        const int i1 = static_cast<int>(std::floor((w.x_hi - g.x(0)) / h + 1e-9));
        const int n0 = static_cast<int>(std::ceil(w.t_lo / dt - 1e-9));
        const int n1 = static_cast<int>(std::floor(w.t_hi / dt + 1e-9));
        if (i0 - 1 < g.interior_begin() || i1 + 1 > g.interior_end() || n0 < 1 || n1 + 1 > g.nt || i0 > i1 ||
            n0 > n1) {
            throw ParameterError("sobolev_stability: window must lie strictly inside every grid");
        }
        SobolevRow row;
        row.h = h;
        row.dt = dt;
        double st = 0.0, sx = 0.0, sxx = 0.0;
        for (int n = n0; n <= n1; ++n) {
            for (int i = i0; i <= i1; ++i) {
                const double ut = (u.at(i, n + 1) - u.at(i, n - 1)) / (2.0 * dt);
                const double ux = (u.at(i + 1, n) - u.at(i - 1, n)) / (2.0 * h);
                const double uxx = (u.at(i + 1, n) - 2.0 * u.at(i, n) + u.at(i - 1, n)) / (h * h);
                st += std::pow(std::abs(ut), p);
                sx += std::pow(std::abs(ux), p);
                sxx += std::pow(std::abs(uxx), p);
                row.max_xx = std::max(row.max_xx, std::abs(uxx));
            }
        }
        const double cell = h * dt;
        row.norm_t = std::pow(st * cell, 1.0 / p);
        row.norm_x = std::pow(sx * cell, 1.0 / p);
        row.norm_xx = std::pow(sxx * cell, 1.0 / p);
        tab.rows.push_back(row);
    }
    const SobolevRow& c = tab.rows.front();
    const SobolevRow& f = tab.rows.back();
    tab.stable_t = f.norm_t <= 2.0 * c.norm_t;
    tab.stable_x = f.norm_x <= 2.0 * c.norm_x;
    tab.stable_xx = f.norm_xx <= 2.0 * c.norm_xx;
    return tab;
}

bool LemmaSuite::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second.pass; });
}

LemmaSuite lemma_suite(const SolveReport& report, const SolveConfig& cfg, double c) {
    const SpaceTimeGrid& g = cfg.grid;
    LemmaSuite s;
    s.tol = c * (g.h() * g.h() + g.dt()) + 1e-9;
    const double K = cfg.payoff.K_bound(), tol = s.tol;
    constexpr double inf = std::numeric_limits<double>::infinity();

    double v_min = inf, v_max = -inf, gap_min = inf;
    if (!report.eps_stats.empty()) {
        double p_min = inf, p_max = -inf, anchor_slack = inf, grad_lo = inf, grad_hi = 0.0;
        for (const EpsStats& e : report.eps_stats) {
            v_min = std::min(v_min, e.v_min);
            v_max = std::max(v_max, e.v_max);
            gap_min = std::min(gap_min, e.gap_min);
            p_min = std::min(p_min, e.p_min);
            p_max = std::max(p_max, e.p_max);
            anchor_slack = std::min(anchor_slack, e.p_min - e.anchor);
            grad_lo = std::min(grad_lo, e.grad_max);
            grad_hi = std::max(grad_hi, e.grad_max);
        }
        s.checks["penalty_lower"] = {anchor_slack >= -tol, anchor_slack, -tol};
        s.checks["penalty_upper"] = {p_max <= tol, p_max, tol};
        if (report.eps_stats.size() > 1) {
            const double spread = grad_hi > 0.0 ? (grad_hi - grad_lo) / grad_hi : 0.0;
            s.checks["gradient_uniform"] = {spread < 0.2, spread, 0.2};
        }
    } else {
        const GridFunction& u = report.value;
        std::vector<double> obst(static_cast<std::size_t>(g.points()));
        for (int i = 0; i <= g.nx; ++i) obst[i] = report.obstacle(g.x(i));
        for (int n = 0; n <= g.nt; ++n) {
            for (int i = 0; i <= g.nx; ++i) {
                const double v = u.at(i, n);
                v_min = std::min(v_min, v);
                v_max = std::max(v_max, v);
                gap_min = std::min(gap_min, v - obst[i]);
            }
        }
    }
    s.checks["bounds_lower"] = {v_min >= -tol, v_min, -tol};
    s.checks["bounds_upper"] = {v_max <= K + 1.0 + tol, v_max, K + 1.0 + tol};
    if (report.mode != SolveMode::EuropeanCauchy) s.checks["obstacle"] = {gap_min >= -tol, gap_min, -tol};
    return s;
}

}  // namespace levystop
