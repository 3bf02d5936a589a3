#include "levystop/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "levystop/diagnostics.hpp"
#include "levystop/errors.hpp"
#include "levystop/parallel.hpp"

namespace levystop {

std::string_view to_string(SolveMode m) {
    switch (m) {
        case SolveMode::Penalized: return "penalized";
        case SolveMode::ProjectedImplicit: return "projected";
        case SolveMode::EuropeanCauchy: return "european";
    }
    return "?";
}

SolveMode solve_mode_from_string(std::string_view s) {
    if (s == "penalized") return SolveMode::Penalized;
    if (s == "projected") return SolveMode::ProjectedImplicit;
    if (s == "european") return SolveMode::EuropeanCauchy;
    throw ConfigError("unknown solve mode '" + std::string(s) + "' (penalized, projected, european)");
}

double SolveConfig::resolved_eps_split() const {
    return eps_split > 0.0 ? eps_split : default_eps_split(grid.h());
}

namespace {

NonlocalStencil frozen_stencil(const SolveConfig& cfg) {
    const double R = cfg.model.family() == LevyFamily::None ? 0.0 : cfg.model.truncation_radius(cfg.truncation_tol);
    if (cfg.reduced_operator) {
        // I = I^f - fv·∂ₓ, so the finite-variation drift joins the implicit part.
        NonlocalStencil s = build_reduced_stencil(cfg.model, cfg.grid.h(), R);
        s.comp = tails(cfg.model, 1.0).fv_drift();
        return s;
    }
    return build_nonlocal_stencil(cfg.model, cfg.grid.h(), cfg.resolved_eps_split(), SmallJumpRule::Frozen, R);
}

double budget_of(const SolveConfig& cfg, const NonlocalStencil& s) {
    const auto mx = cfg.coeffs.maxima(cfg.grid);
    const double h = cfg.grid.h();
    const double alpha = mx.a + s.half_small_var;
    return cfg.grid.dt() * (s.weight_sum() + (1.0 - cfg.theta) * (2.0 * alpha / (h * h) + mx.r));
}

}  // namespace

double explicit_budget(const SolveConfig& cfg) { return budget_of(cfg, frozen_stencil(cfg)); }

void SolveConfig::validate() const {
    grid.validate();
    coeffs.validate(grid);
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    if (eps_split > 1.0) throw ConfigError("eps_split must be <= 1");
    if (!(truncation_tol > 0.0 && truncation_tol < 1.0)) throw ConfigError("truncation_tol must lie in (0, 1)");
    if (mode == SolveMode::Penalized) {
        if (eps_schedule.empty()) throw ConfigError("eps_schedule is empty");
        for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
            const double e = eps_schedule[k];
            if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps_schedule entries must lie in (0, 1)");
            if (k > 0 && !(e < eps_schedule[k - 1])) throw ConfigError("eps_schedule must be strictly decreasing");
        }
        if (eps_schedule.back() < 1e-4) throw ConfigError("eps_schedule: last entry must be >= 1e-4");
    }
    if (source && mode != SolveMode::EuropeanCauchy) throw ConfigError("a source term needs mode = european");
    if (reduced_operator && !model.finite_variation()) {
        std::ostringstream msg;
        msg << "reduced operator needs finite-variation jumps (alpha < 1); this model has alpha = " << model.alpha();
        throw ConfigError(msg.str());
    }
    const double b = budget_of(*this, frozen_stencil(*this));
    if (!(b <= 0.9)) {
        const double rate = b / grid.dt();
        const int nt_min = static_cast<int>(std::ceil(grid.T * rate / 0.9));
        std::ostringstream msg;
        msg << "explicit jump/local part exceeds its monotonicity budget (dt*rate = " << b
            << " > 0.9); use nt >= " << nt_min;
        throw ConfigError(msg.str());
    }
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const SolveConfig& cfg) : cfg_(cfg) {
    stencil_ = frozen_stencil(cfg);
    half_small_var_ = stencil_.half_small_var;
    comp_ = stencil_.comp;
    // The stepper treats these two implicitly; the stencil keeps only big jumps.
    stencil_.half_small_var = 0.0;
    stencil_.comp = 0.0;
    reach_ = std::max(1, stencil_.reach());
    const std::size_t n = static_cast<std::size_t>(cfg.grid.points());
    far_ext_.assign(n + 2 * static_cast<std::size_t>(reach_), 0.0);
    ext_.resize(far_ext_.size());
    jumps_.resize(n);
    mat_ = Tridiagonal(n - 2);
    rhs_.resize(n - 2);
}

void Stepper::set_far_field(std::vector<double> ext_values, double discount_rate) {
    if (ext_values.size() != far_ext_.size()) throw ParameterError("set_far_field: wrong row length");
    far_ext_ = std::move(ext_values);
    discount_rate_ = discount_rate;
}

double Stepper::far(std::size_t k, double tau) const {
    return discount_rate_ == 0.0 ? far_ext_[k] : far_ext_[k] * std::exp(-discount_rate_ * tau);
}

void Stepper::fill_extended(std::span<const double> v, double tau) {
    const int nx = cfg_.grid.nx, R = reach_;
    std::copy(v.begin(), v.end(), ext_.begin() + R);
    for (int k = 1; k <= R; ++k) {
        const std::size_t lo = static_cast<std::size_t>(R - k), hi = static_cast<std::size_t>(R + nx + k);
        switch (cfg_.extension) {
            case Extension::ClampToPayoff:
                ext_[lo] = far(lo, tau);
                ext_[hi] = far(hi, tau);
                break;
            case Extension::Zero:
                ext_[lo] = ext_[hi] = 0.0;
                break;
            case Extension::LinearExtrapolate:
                ext_[lo] = v[0] - k * (v[1] - v[0]);
                ext_[hi] = v[nx] + k * (v[nx] - v[nx - 1]);
                break;
        }
    }
}

void Stepper::step(std::span<const double> v, int n, const PenaltySpec* penalty, std::span<const double> obstacle,
                   bool project, std::span<double> out) {
    const SpaceTimeGrid& g = cfg_.grid;
    const int nx = g.nx, R = reach_;
    const double h = g.h(), dt = g.dt(), th = cfg_.theta;
    const double tau_old = g.t(n), tau_new = g.t(n + 1);
    const double t_old = g.T - tau_old, t_new = g.T - tau_new;
    const double invh2 = 1.0 / (h * h), inv2h = 1.0 / (2.0 * h);

    fill_extended(v, tau_old);
    apply_stencil(stencil_, ext_, R, jumps_);

    for (int i = 1; i < nx; ++i) {
        const double x = g.x(i);
        const std::size_t r = static_cast<std::size_t>(i - 1);

        double rhs = v[i] + dt * jumps_[i];
        if (th < 1.0) {
            const double a = cfg_.coeffs.a(x, t_old) + half_small_var_;
            const double b = cfg_.coeffs.b(x, t_old) - comp_;
            const double loc = a * (v[i + 1] - 2.0 * v[i] + v[i - 1]) * invh2 + b * (v[i + 1] - v[i - 1]) * inv2h -
                               cfg_.coeffs.r(x, t_old) * v[i];
            rhs += dt * (1.0 - th) * loc;
        }
        if (cfg_.source) rhs += dt * cfg_.source(x, tau_old);

        const double a = cfg_.coeffs.a(x, t_new) + half_small_var_;
        const double b = cfg_.coeffs.b(x, t_new) - comp_;
        double diag = 1.0 + th * dt * (2.0 * a * invh2 + cfg_.coeffs.r(x, t_new));
        if (penalty) {
            // p(y_new) ≈ p(y_old) + p'(y_old)(v_new - v_old)
            const double y = v[i] - obstacle[i];
            const double slope = penalty->derivative(y);
            rhs -= dt * ((*penalty)(y)-slope * v[i]);
            diag += dt * slope;
        }
        mat_.lower[r] = -th * dt * (a * invh2 - b * inv2h);
        mat_.upper[r] = -th * dt * (a * invh2 + b * inv2h);
        mat_.diag[r] = diag;
        rhs_[r] = rhs;
    }

    const double left = far(static_cast<std::size_t>(R), tau_new);
    const double right = far(static_cast<std::size_t>(R + nx), tau_new);
    rhs_.front() -= mat_.lower.front() * left;
    rhs_.back() -= mat_.upper.back() * right;

    if (const long bad = first_non_m_row(mat_); bad >= 0) {
        std::ostringstream msg;
        msg << "implicit step is not an M-matrix at x = " << g.x(static_cast<int>(bad) + 1)
            << " (drift dominates diffusion: refine h or add diffusion)";
        throw NumericalError(msg.str());
    }
    if (project) {
        solve_complementarity(v, obstacle.subspan(1, static_cast<std::size_t>(nx - 1)));
    } else {
        thomas_solve(mat_, rhs_, scratch_);
    }

    out[0] = left;
    out[nx] = right;
    for (int i = 1; i < nx; ++i) out[i] = rhs_[static_cast<std::size_t>(i - 1)];
    if (project) {
        for (int i = 0; i <= nx; ++i) out[i] = std::max(out[i], obstacle[i]);
    }
    for (int i = 0; i <= nx; ++i) {
        if (!std::isfinite(out[i])) {
            throw NumericalError("non-finite value at step " + std::to_string(n + 1) + ", x = " + std::to_string(g.x(i)));
        }
    }
}

// min{M v - rhs, v - g} = 0 by policy iteration: rows where the obstacle
// binds are replaced by v = g, the rest solved with M, until the split stops
// changing. Every iterate is an M-matrix solve; at most one pass per row.
void Stepper::solve_complementarity(std::span<const double> v_old, std::span<const double> g) {
    const std::size_t m = rhs_.size();
    active_.resize(m);
    for (std::size_t r = 0; r < m; ++r) active_[r] = v_old[r + 1] <= g[r];
    sol_.resize(m);
    for (std::size_t it = 0; it <= m + 1; ++it) {
        work_ = mat_;
        std::copy(rhs_.begin(), rhs_.end(), sol_.begin());
        for (std::size_t r = 0; r < m; ++r) {
            if (!active_[r]) continue;
            work_.lower[r] = work_.upper[r] = 0.0;
            work_.diag[r] = 1.0;
            sol_[r] = g[r];
        }
        thomas_solve(work_, sol_, scratch_);

        bool changed = false;
        for (std::size_t r = 0; r < m; ++r) {
            double res = mat_.diag[r] * sol_[r] - rhs_[r];
            if (r > 0) res += mat_.lower[r] * sol_[r - 1];
            if (r + 1 < m) res += mat_.upper[r] * sol_[r + 1];
            const bool bind = res > sol_[r] - g[r];
            if (bind != static_cast<bool>(active_[r])) {
                active_[r] = bind;
                changed = true;
            }
        }
        if (!changed) {
            std::copy(sol_.begin(), sol_.end(), rhs_.begin());
            return;
        }
    }
    throw NumericalError("projected step: policy iteration did not settle");
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> extended_samples(const SpaceTimeGrid& g, int reach, const PayoffSpec& f) {
    std::vector<double> out(static_cast<std::size_t>(g.points() + 2 * reach));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(g.x(static_cast<int>(k) - reach));
    return out;
}

// March on forward-time rows; rows[n] is τ_n.
struct March {
    std::vector<std::vector<double>> rows;
    long steps = 0;
};

March march(const SolveConfig& cfg, Stepper& st, const std::vector<double>& v0, const PenaltySpec* p,
            std::span<const double> obstacle, bool project) {
    March m;
    m.rows.reserve(static_cast<std::size_t>(cfg.grid.nt + 1));
    m.rows.push_back(v0);
    for (int n = 0; n < cfg.grid.nt; ++n) {
        std::vector<double> next(v0.size());
        st.step(m.rows.back(), n, p, obstacle, project, next);
        m.rows.push_back(std::move(next));
        ++m.steps;
    }
    return m;
}

// Calendar-time surface u(x, t_n) = v(x, T - t_n).
GridFunction to_calendar(const SpaceTimeGrid& g, const March& m, GridFunction::FarField far) {
    GridFunction u(g, Extension::ClampToPayoff, std::move(far));
    for (int n = 0; n <= g.nt; ++n) {
        const auto& src = m.rows[static_cast<std::size_t>(g.nt - n)];
        std::copy(src.begin(), src.end(), u.row(n).begin());
    }
    return u;
}

double truncation_mass(const SolveConfig& cfg, const NonlocalStencil& s) {
    return cfg.model.family() == LevyFamily::None ? 0.0 : s.neglected;
}

void fill_boundary(SolveReport& rep, const PayoffSpec& g, double tol) {
    const GridFunction& u = rep.value;
    const SpaceTimeGrid& grid = u.grid();
    rep.boundary.assign(static_cast<std::size_t>(grid.nt + 1), {});
    std::vector<double> gap(static_cast<std::size_t>(grid.points()));
    for (int n = 0; n <= grid.nt; ++n) {
        for (int i = 0; i <= grid.nx; ++i) gap[i] = u.at(i, n) - g(grid.x(i));
        rep.boundary[n] = boundary_crossings(gap, grid, tol);
    }
}

EpsStats stats_for(const SolveConfig& cfg, const March& m, const PenaltySpec& p, std::span<const double> obstacle) {
    const SpaceTimeGrid& g = cfg.grid;
    EpsStats s;
    s.eps = p.eps();
    s.anchor = p.p0();
    s.v_min = s.gap_min = s.p_min = std::numeric_limits<double>::infinity();
    s.v_max = s.p_max = -std::numeric_limits<double>::infinity();
    const double inv2h = 1.0 / (2.0 * g.h());
    for (const auto& row : m.rows) {
        for (int i = 0; i <= g.nx; ++i) {
            const double v = row[i], y = v - obstacle[i], pv = p(y);
            s.v_min = std::min(s.v_min, v);
            s.v_max = std::max(s.v_max, v);
            s.gap_min = std::min(s.gap_min, y);
            s.p_min = std::min(s.p_min, pv);
            s.p_max = std::max(s.p_max, pv);
        }
        for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
            s.grad_max = std::max(s.grad_max, std::abs(row[i + 1] - row[i - 1]) * inv2h);
        }
    }
    return s;
}

double default_gap_tol(const SolveConfig& cfg) {
    if (cfg.mode == SolveMode::Penalized) return cfg.eps_schedule.back();
    return 1e-8 * std::max(1.0, cfg.payoff.K_bound());
}

}  // namespace

std::vector<double> step_penalized(std::span<const double> v_now, int n, double eps, const PenaltySpec& p,
                                   const SolveConfig& cfg) {
    Stepper st(cfg);
    const auto ge = cfg.payoff.mollify(eps);
    auto far = extended_samples(cfg.grid, st.reach(), ge);
    std::vector<double> obstacle(far.begin() + st.reach(), far.begin() + st.reach() + cfg.grid.points());
    st.set_far_field(std::move(far));
    std::vector<double> out(v_now.size());
    st.step(v_now, n, &p, obstacle, false, out);
    return out;
}

SolveReport solve_penalized(const SolveConfig& cfg, double eps) {
    const auto t0 = Clock::now();
    Stepper st(cfg);
    const PayoffSpec ge = cfg.payoff.mollify(eps);
    const double p0 = penalty_anchor(cfg.coeffs, cfg.payoff, cfg.model, cfg.grid);
    const PenaltySpec p = PenaltySpec::build(eps, p0);

    auto far = extended_samples(cfg.grid, st.reach(), ge);
    const std::vector<double> obstacle(far.begin() + st.reach(), far.begin() + st.reach() + cfg.grid.points());
    st.set_far_field(far);

    const March m = march(cfg, st, obstacle, &p, obstacle, false);

    SolveReport rep;
    rep.mode = SolveMode::Penalized;
    rep.obstacle = ge;
    rep.anchor = p0;
    rep.eps_split = cfg.resolved_eps_split();
    rep.truncation_mass = truncation_mass(cfg, st.stencil());
    rep.steps = m.steps;
    rep.eps_stats.push_back(stats_for(cfg, m, p, obstacle));
    rep.value = to_calendar(cfg.grid, m, [ge](double x, int) { return ge(x); });
    rep.wallclock_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

SolveReport solve_european(const SolveConfig& cfg) {
    const auto t0 = Clock::now();
    Stepper st(cfg);
    const PayoffSpec g = cfg.payoff;
    const double r = cfg.coeffs.maxima(cfg.grid).r;
    auto far = extended_samples(cfg.grid, st.reach(), g);
    const std::vector<double> v0(far.begin() + st.reach(), far.begin() + st.reach() + cfg.grid.points());
    st.set_far_field(far, r);

    const March m = march(cfg, st, v0, nullptr, {}, false);

    SolveReport rep;
    rep.mode = SolveMode::EuropeanCauchy;
    rep.obstacle = g;
    rep.eps_split = cfg.resolved_eps_split();
    rep.truncation_mass = truncation_mass(cfg, st.stencil());
    rep.steps = m.steps;
    const double T = cfg.grid.T;
    const SpaceTimeGrid grid = cfg.grid;
    rep.value = to_calendar(cfg.grid, m, [g, r, T, grid](double x, int n) { return g(x) * std::exp(-r * (T - grid.t(n))); });
    rep.boundary.assign(static_cast<std::size_t>(cfg.grid.nt + 1), {});
    rep.wallclock_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

SolveReport solve_vi(const SolveConfig& cfg) {
    cfg.validate();
    if (cfg.mode == SolveMode::EuropeanCauchy) return solve_european(cfg);

    const auto t0 = Clock::now();
    SolveReport rep;
    if (cfg.mode == SolveMode::ProjectedImplicit) {
        Stepper st(cfg);
        auto far = extended_samples(cfg.grid, st.reach(), cfg.payoff);
        const std::vector<double> obstacle(far.begin() + st.reach(), far.begin() + st.reach() + cfg.grid.points());
        st.set_far_field(far);
        const March m = march(cfg, st, obstacle, nullptr, obstacle, true);
        rep.mode = SolveMode::ProjectedImplicit;
        rep.obstacle = cfg.payoff;
        rep.eps_split = cfg.resolved_eps_split();
        rep.truncation_mass = truncation_mass(cfg, st.stencil());
        rep.steps = m.steps;
        rep.anchor = penalty_anchor(cfg.coeffs, cfg.payoff, cfg.model, cfg.grid);
        const PayoffSpec g = cfg.payoff;
        rep.value = to_calendar(cfg.grid, m, [g](double x, int) { return g(x); });
    } else {
        // Each ε starts from its own g^ε at τ = 0, so the solves are independent.
        const std::size_t k = cfg.eps_schedule.size();
        std::vector<SolveReport> runs(k);
        parallel_for(k, [&](std::size_t j) { runs[j] = solve_penalized(cfg, cfg.eps_schedule[j]); });

        const SpaceTimeGrid& g = cfg.grid;
        for (std::size_t j = 1; j < k; ++j) {
            double d = 0.0;
            for (int n = 0; n <= g.nt; ++n) {
                for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
                    d = std::max(d, std::abs(runs[j].value.at(i, n) - runs[j - 1].value.at(i, n)));
                }
            }
            rep.eps_trace.push_back(d);
        }
        for (std::size_t j = 2; j < rep.eps_trace.size() + 1 && j < k; ++j) {
            if (!(rep.eps_trace[j - 1] < rep.eps_trace[j - 2])) {
                rep.warnings.push_back("eps_trace not decreasing at eps = " + std::to_string(cfg.eps_schedule[j]));
            }
        }
        for (auto& r : runs) rep.eps_stats.push_back(r.eps_stats.front());
        rep.steps = 0;
        for (auto& r : runs) rep.steps += r.steps;
        SolveReport& last = runs.back();
        rep.mode = SolveMode::Penalized;
        rep.obstacle = last.obstacle;
        rep.anchor = last.anchor;
        rep.eps_split = last.eps_split;
        rep.truncation_mass = last.truncation_mass;
        rep.value = std::move(last.value);
    }
    fill_boundary(rep, cfg.payoff, default_gap_tol(cfg));
    rep.wallclock_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

GridFunction residual_vi(const GridFunction& u, const SolveConfig& cfg, double gap_tol, int collar,
                         double terminal_layer) {
    const SpaceTimeGrid& g = u.grid();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    GridFunction res(g, Extension::Zero);
    for (int n = 0; n <= g.nt; ++n) {
        for (double& v : res.row(n)) v = nan;
    }
    if (g.nt < 2) return res;

    // Measured with stencils one order finer than the march (five-point in x,
    // three-level in t) so the residual exposes the scheme's own error.
    const double R = cfg.model.family() == LevyFamily::None ? 0.0 : cfg.model.truncation_radius(cfg.truncation_tol);
    const auto s = build_nonlocal_stencil(cfg.model, g.h(), cfg.resolved_eps_split(), SmallJumpRule::Interpolated, R);
    const int reach = std::max(2, s.reach());
    const double h = g.h(), dt = g.dt();
    std::vector<double> gv(static_cast<std::size_t>(g.points()));
    for (int i = 0; i <= g.nx; ++i) gv[i] = cfg.payoff(g.x(i));
    auto stopping = [&](int i, int n) { return u.at(std::clamp(i, 0, g.nx), n) - gv[std::clamp(i, 0, g.nx)] <= gap_tol; };

    std::vector<double> row, jumps(static_cast<std::size_t>(g.points()));
    for (int n = 0; n + 2 <= g.nt; ++n) {
        const double t = g.t(n);
        if (g.T - t < terminal_layer) break;
        u.extended_row(n, reach, reach, row);
        apply_stencil(s, row, reach, jumps);
        const double* p = row.data() + reach;
        for (int i = g.interior_begin(); i <= g.interior_end(); ++i) {
            const bool here = stopping(i, n);
            bool near = false;
            for (int m = n; m <= n + 2 && !near; ++m) {
                for (int k = i - collar; k <= i + collar; ++k) near = near || stopping(k, m) != here;
            }
            if (near) continue;
            const double x = g.x(i);
            const double d2 = (-p[i + 2] + 16.0 * p[i + 1] - 30.0 * p[i] + 16.0 * p[i - 1] - p[i - 2]) / (12.0 * h * h);
            const double d1 = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
            const double ut = (-3.0 * u.at(i, n) + 4.0 * u.at(i, n + 1) - u.at(i, n + 2)) / (2.0 * dt);
            const double pde = -ut - cfg.coeffs.a(x, t) * d2 - cfg.coeffs.b(x, t) * d1 - jumps[i] +
                               cfg.coeffs.r(x, t) * p[i];
            res.at(i, n) = std::min(pde, p[i] - gv[i]);
        }
    }
    return res;
}

}  // namespace levystop
