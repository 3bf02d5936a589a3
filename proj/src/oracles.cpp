#include "levystop/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "levystop/errors.hpp"

namespace levystop::oracle {

namespace {

double ncdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double risk_neutral_drift(const LevyModel& model, double r, double a, double q) {
    const double jc = model.family() == LevyFamily::None ? 0.0 : model.exp_compensator();
    if (!std::isfinite(jc)) throw ParameterError("risk-neutral drift: e^y is not integrable under the jump measure");
    return r - q - a - jc;
}

double bs_put(double S, double K, double T, double r, double q, double sigma) {
    if (!(S > 0 && K > 0 && T >= 0 && sigma >= 0)) throw ParameterError("bs_put: invalid arguments");
    const double dq = std::exp(-q * T), dr = std::exp(-r * T);
    if (T == 0.0 || sigma == 0.0) return std::max(K * dr - S * dq, 0.0);
    const double sd = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r - q + 0.5 * sigma * sigma) * T) / sd;
    return K * dr * ncdf(-(d1 - sd)) - S * dq * ncdf(-d1);
}

double bs_call(double S, double K, double T, double r, double q, double sigma) {
    return bs_put(S, K, T, r, q, sigma) + S * std::exp(-q * T) - K * std::exp(-r * T);
}

double merton_put(double S, double K, double T, double r, double sigma, double lambda, double mu, double delta,
                  int terms) {
    const double k = std::exp(mu + 0.5 * delta * delta) - 1.0;
    const double lt = lambda * (1.0 + k) * T;
    double sum = 0.0, logw = -lt;  // log of e^{-lt} lt^n / n!
    for (int n = 0; n < terms; ++n) {
        if (n > 0) logw += std::log(lt) - std::log(static_cast<double>(n));
        const double sn = std::sqrt(sigma * sigma + n * delta * delta / T);
        const double rn = r - lambda * k + n * std::log1p(k) / T;
        sum += std::exp(logw) * bs_put(S, K, T, rn, 0.0, sn);
    }
    return sum;
}

double crr_american_put(double S, double K, double T, double r, double q, double sigma, int steps) {
    if (steps < 1) throw ParameterError("crr_american_put: steps must be >= 1");
    const double dt = T / steps;
    const double u = std::exp(sigma * std::sqrt(dt)), d = 1.0 / u;
    const double disc = std::exp(-r * dt);
    const double p = (std::exp((r - q) * dt) - d) / (u - d);
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("crr_american_put: too few steps for these rates");
    std::vector<double> v(static_cast<std::size_t>(steps + 1));
    for (int j = 0; j <= steps; ++j) v[j] = std::max(K - S * std::pow(u, 2 * j - steps), 0.0);
    for (int n = steps - 1; n >= 0; --n) {
        for (int j = 0; j <= n; ++j) {
            const double cont = disc * (p * v[j + 1] + (1.0 - p) * v[j]);
            v[j] = std::max(cont, K - S * std::pow(u, 2 * j - n));
        }
    }
    return v[0];
}

}  // namespace levystop::oracle
