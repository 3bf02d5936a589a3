#include "levystop/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "levystop/errors.hpp"
#include "levystop/parallel.hpp"
#include "levystop/rng.hpp"

namespace levystop {

namespace {

// Inverse-CDF sampler for jumps with |y| > lo, tabulated per side on cells
// (uniform from 0, geometric otherwise) and uniform within a cell.
class JumpSampler {
public:
    JumpSampler(const LevyModel& m, double lo) {
        if (m.family() == LevyFamily::None) return;
        const double R = std::max(m.truncation_radius(1e-10), 2.0 * std::max(lo, 1e-3));
        constexpr int kCells = 4096;
        for (int s = 0; s < 2; ++s) {
            const Side side = s == 0 ? Side::Negative : Side::Positive;
            auto& e = edges_[s];
            auto& c = cum_[s];
            e.resize(kCells + 1);
            for (int k = 0; k <= kCells; ++k) {
                const double f = static_cast<double>(k) / kCells;
                e[k] = lo == 0.0 ? R * f : lo * std::pow(R / lo, f);
            }
            c.assign(kCells + 1, 0.0);
            for (int k = 0; k < kCells; ++k) c[k + 1] = c[k] + m.side_moment(0, e[k], e[k + 1], side);
            mass_[s] = c.back();
        }
    }

    double intensity() const { return mass_[0] + mass_[1]; }

    double sample(PhiloxStream& rng) const {
        double u = rng.uniform() * intensity();
        const int s = u < mass_[0] ? 0 : 1;
        if (s == 1) u -= mass_[0];
        const auto& c = cum_[s];
        const auto it = std::upper_bound(c.begin(), c.end(), u);
        const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - c.begin(), 1), c.size() - 1) - 1;
        const double y = edges_[s][k] + rng.uniform() * (edges_[s][k + 1] - edges_[s][k]);
        return s == 0 ? -y : y;
    }

private:
    std::vector<double> edges_[2], cum_[2];
    double mass_[2] = {0.0, 0.0};
};

McEstimate mean_and_stderr(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo == *hi) return {*lo, 0.0};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

PathBatch simulate(const LevyModel& m, const CoefficientField& c, double x0, double T, int n_paths, int n_steps,
                   std::uint64_t seed, const McOptions& opt) {
    if (n_paths < 1 || n_steps < 1) throw ParameterError("simulate: need n_paths >= 1 and n_steps >= 1");
    if (!(T > 0.0)) throw ParameterError("simulate: T must be > 0");

    PathBatch b;
    b.n_paths = n_paths;
    b.n_steps = n_steps;
    b.T = T;
    b.seed = seed;
    b.batch = opt.batch;

    double comp = 0.0;
    const bool jumps = m.family() != LevyFamily::None;
    if (jumps) {
        b.eps_mc = opt.eps_mc >= 0.0 ? opt.eps_mc : (m.finite_activity() ? 0.0 : 0.01);
        if (b.eps_mc > 1.0) throw ParameterError("simulate: eps_mc must be <= 1");
        if (b.eps_mc == 0.0 && !m.finite_activity()) {
            throw ParameterError("simulate: infinite-activity jumps need eps_mc > 0");
        }
        if (b.eps_mc > 0.0) {
            const auto t = tails(m, b.eps_mc);
            comp = t.comp_drift;
            b.small_var_mc = t.small_var;
        } else {
            comp = m.moment(1, 0.0, 1.0);
        }
    }
    const JumpSampler sampler(m, b.eps_mc);
    b.jump_intensity = sampler.intensity();
    if (b.jump_intensity > opt.intensity_cap) {
        std::ostringstream msg;
        msg << "simulate: big-jump intensity " << b.jump_intensity << " exceeds the cap " << opt.intensity_cap
            << "; raise eps_mc above " << b.eps_mc;
        throw ParameterError(msg.str());
    }

    const std::size_t row = static_cast<std::size_t>(n_steps + 1);
    b.states.assign(static_cast<std::size_t>(n_paths) * row, 0.0);
    b.discounts.assign(b.states.size(), 1.0);
    b.jump_counts.assign(static_cast<std::size_t>(n_paths), 0);
    const double dt = T / n_steps, sv = b.small_var_mc;
    const double lam_dt = b.jump_intensity * dt;

    constexpr std::size_t kChunk = 1024;
    const std::size_t chunks = (static_cast<std::size_t>(n_paths) + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t ch) {
        const std::size_t p_end = std::min<std::size_t>((ch + 1) * kChunk, static_cast<std::size_t>(n_paths));
        for (std::size_t p = ch * kChunk; p < p_end; ++p) {
            PhiloxStream rng(seed, (opt.batch << 40) + p);
            double* xs = b.states.data() + p * row;
            double* ds = b.discounts.data() + p * row;
            double x = x0, d = 1.0;
            xs[0] = x;
            std::uint32_t count = 0;
            for (int s = 0; s < n_steps; ++s) {
                const double t = s * dt;
                const double a = c.a(x, t), drift = c.b(x, t) - comp, r = c.r(x, t);
                double dx = drift * dt;
                const double var = (2.0 * a + sv) * dt;
                if (var > 0.0) dx += std::sqrt(var) * rng.normal();
                if (jumps && lam_dt > 0.0) {
                    const std::uint32_t k = rng.poisson(lam_dt);
                    for (std::uint32_t j = 0; j < k; ++j) dx += sampler.sample(rng);
                    count += k;
                }
                d *= std::exp(-r * dt);
                x += dx;
                xs[s + 1] = x;
                ds[s + 1] = d;
            }
            b.jump_counts[p] = count;
        }
    });
    return b;
}

McEstimate european_estimate(const PathBatch& batch, const PayoffSpec& g) {
    std::vector<double> v(static_cast<std::size_t>(batch.n_paths));
    for (int p = 0; p < batch.n_paths; ++p) {
        v[p] = batch.discount(p, batch.n_steps) * g(batch.x(p, batch.n_steps));
    }
    return mean_and_stderr(v);
}

namespace {

// Polynomial basis in the standardized state.
struct Basis {
    double center = 0.0, scale = 1.0;
    int degree = 3;

    void row(double x, double* out) const {
        const double z = (x - center) / scale;
        double zk = 1.0;
        for (int k = 0; k <= degree; ++k) {
            out[k] = zk;
            zk *= z;
        }
    }
};

struct StepRule {
    bool active = false;
    Basis basis;
    Eigen::VectorXd coef;

    double continuation(double x) const {
        Eigen::VectorXd phi(coef.size());
        basis.row(x, phi.data());
        return phi.dot(coef);
    }
};

}  // namespace

PolicyEstimate stopping_lower_bound(const PathBatch& fit, const PathBatch& eval, const PayoffSpec& g, int degree) {
    if (degree < 0 || degree > 8) throw ParameterError("stopping_lower_bound: degree must be in [0, 8]");
    if (fit.n_steps != eval.n_steps || fit.T != eval.T) {
        throw ParameterError("stopping_lower_bound: batches must share the exercise dates");
    }
    if (fit.seed == eval.seed && fit.batch == eval.batch) {
        throw ParameterError("stopping_lower_bound: evaluation batch must be independent of the fit batch");
    }
    const int N = fit.n_steps, P = fit.n_paths, nb = degree + 1;
    PolicyEstimate out;

    // Backward induction on the fit batch. cash[p] is the discounted (to 0)
    // payoff of the current policy from the date being processed onwards.
    std::vector<double> cash(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) cash[p] = fit.discount(p, N) * g(fit.x(p, N));
    std::vector<StepRule> rules(static_cast<std::size_t>(N));
    std::vector<int> itm;
    for (int s = N - 1; s >= 1; --s) {
        itm.clear();
        for (int p = 0; p < P; ++p) {
            if (g(fit.x(p, s)) > 0.0) itm.push_back(p);
        }
        StepRule& rule = rules[s];
        if (static_cast<int>(itm.size()) < 4 * nb) {
            if (!itm.empty()) out.degenerate = true;
            continue;
        }
        double mean = 0.0, sq = 0.0;
        for (int p : itm) mean += fit.x(p, s);
        mean /= static_cast<double>(itm.size());
        for (int p : itm) sq += (fit.x(p, s) - mean) * (fit.x(p, s) - mean);
        rule.basis = {mean, std::max(std::sqrt(sq / static_cast<double>(itm.size())), 1e-12), degree};

        Eigen::MatrixXd A(static_cast<Eigen::Index>(itm.size()), nb);
        Eigen::VectorXd y(static_cast<Eigen::Index>(itm.size()));
        for (std::size_t k = 0; k < itm.size(); ++k) {
            const int p = itm[k];
            Eigen::VectorXd phi(nb);
            rule.basis.row(fit.x(p, s), phi.data());
            A.row(static_cast<Eigen::Index>(k)) = phi.transpose();
            y[static_cast<Eigen::Index>(k)] = cash[p] / fit.discount(p, s);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < nb) {
            out.degenerate = true;
            continue;
        }
        rule.coef = qr.solve(y);
        rule.active = true;
        for (int p : itm) {
            const double x = fit.x(p, s), gx = g(x);
            if (gx >= rule.continuation(x)) cash[p] = fit.discount(p, s) * gx;
        }
    }
    const double g0 = g(fit.x(0, 0));
    const double cont0 = std::accumulate(cash.begin(), cash.end(), 0.0) / P;
    const bool stop_now = g0 > 0.0 && g0 >= cont0;

    // Forward evaluation on the independent batch.
    std::vector<double> v(static_cast<std::size_t>(eval.n_paths));
    for (int p = 0; p < eval.n_paths; ++p) {
        if (stop_now) {
            v[p] = g(eval.x(p, 0));
            continue;
        }
        double value = eval.discount(p, N) * g(eval.x(p, N));
        for (int s = 1; s < N; ++s) {
            const StepRule& rule = rules[s];
            if (!rule.active) continue;
            const double x = eval.x(p, s), gx = g(x);
            if (gx > 0.0 && gx >= rule.continuation(x)) {
                value = eval.discount(p, s) * gx;
                break;
            }
        }
        v[p] = value;
    }
    const McEstimate e = mean_and_stderr(v);
    out.price = e.price;
    out.std_error = e.std_error;
    return out;
}

}  // namespace levystop
