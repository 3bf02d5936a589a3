#include "levystop/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levystop/errors.hpp"

namespace levystop::quad {

namespace {

struct RuleStorage {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Newton iteration on the Legendre recurrence; accurate to ~1 ulp for n <= 256.
RuleStorage compute_rule(int n) {
    RuleStorage r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

GaussRule gauss_legendre(int n) {
    if (n < 1 || n > 256) throw ParameterError("gauss_legendre: n must be in [1, 256]");
    static std::array<RuleStorage, 257> cache;
    static std::array<std::once_flag, 257> once;
    std::call_once(once[n], [n] { cache[n] = compute_rule(n); });
    return {cache[n].nodes, cache[n].weights};
}

double gauss64(const Integrand& f, double a, double b) {
    const auto rule = gauss_legendre(64);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

double adaptive(const Integrand& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Semi-infinite range: y = a + t/(1-t) on t in [0, 1).
    Integrand g = f;
    double lo = a, hi = b;
    if (std::isinf(b)) {
        g = [&f, a](double t) {
            if (t >= 1.0) return 0.0;
            const double u = 1.0 - t;
            return f(a + t / u) / (u * u);
        };
        lo = 0.0;
        hi = 1.0;
    }
    struct Piece {
        double a, b, value, error, l1;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto eval = [&](double pa, double pb) {
        Piece p{pa, pb, 0.0, 0.0, 0.0};
        p.value = GK::integrate(g, pa, pb, 0, 0.0, &p.error, &p.l1);
        return p;
    };
    // Global bisection of the piece with the largest error estimate.
    std::priority_queue<Piece> heap;
    Piece first = eval(lo, hi);
    double value = first.value, error = first.error, l1 = first.l1;
    heap.push(first);
    constexpr int kMaxPieces = 4000;
    const double floor_tol = 64.0 * std::numeric_limits<double>::epsilon();
    for (int n = 1; n < kMaxPieces; ++n) {
        if (error <= std::max(rel_tol, floor_tol) * l1) break;
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        Piece left = eval(worst.a, mid), right = eval(mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to avoid drift from the running updates.
    double total = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        heap.pop();
    }
    return total;
}

double dyadic(const Integrand& f, double lo, double hi, double rel_tol) {
    if (!(lo > 0.0) || !(hi > lo) || std::isinf(hi)) {
        throw ParameterError("quad::dyadic: require 0 < lo < hi < inf");
    }
    double sum = 0.0;
    double a = lo;
    while (a < hi) {
        const double b = std::min(2.0 * a, hi);
        sum += adaptive(f, a, b, rel_tol);
        a = b;
    }
    return sum;
}

double power_singular(const Integrand& f, double hi, double power, double rel_tol) {
    if (!(power > -1.0)) throw ParameterError("quad::power_singular: integrand not integrable at 0");
    if (!(hi > 0.0)) return 0.0;
    const double m = 1.0 / (power + 1.0);
    auto g = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double y = hi * std::pow(s, m);
        if (!(y > 0.0)) return 0.0;
        return f(y) * hi * m * std::pow(s, m - 1.0);
    };
    return adaptive(g, 0.0, 1.0, rel_tol);
}

}  // namespace levystop::quad
