#include "levystop/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "levystop/errors.hpp"
#include "levystop/quadrature.hpp"

namespace levystop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int idx(Side s) { return s == Side::Positive ? 1 : 0; }

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// P(za < Z <= zb) for standard normal Z, computed on the side that avoids cancellation.
double normal_mass(double za, double zb) {
    if (za >= 0.0) return 0.5 * (std::erfc(za / std::numbers::sqrt2) - std::erfc(zb / std::numbers::sqrt2));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb / std::numbers::sqrt2) - std::erfc(-za / std::numbers::sqrt2));
    return 1.0 - 0.5 * std::erfc(-za / std::numbers::sqrt2) - 0.5 * std::erfc(zb / std::numbers::sqrt2);
}

// ∫_lo^hi y^k φ((y-μ)/s)/s dy, k in {0,1,2}.
double normal_partial_moment(int k, double mu, double s, double lo, double hi) {
    const double za = (lo - mu) / s;
    const double zb = std::isinf(hi) ? kInf : (hi - mu) / s;
    const double d = normal_mass(za, zb);
    const double pa = phi(za);
    const double pb = std::isinf(zb) ? 0.0 : phi(zb);
    const double e = pa - pb;
    switch (k) {
        case 0: return d;
        case 1: return mu * d + s * e;
        case 2: {
            const double zpb = std::isinf(zb) ? 0.0 : zb * pb;
            return mu * mu * d + 2.0 * mu * s * e + s * s * (d + za * pa - zpb);
        }
        default: throw ParameterError("normal_partial_moment: k must be 0, 1 or 2");
    }
}

// ∫_lo^hi y^k η e^{-ηy} dy, k in {0,1,2}.
double exp_partial_moment(int k, double eta, double lo, double hi) {
    auto anti = [&](double y) -> double {
        if (std::isinf(y)) return 0.0;
        const double e = std::exp(-eta * y);
        switch (k) {
            case 0: return -e;
            case 1: return -(y + 1.0 / eta) * e;
            case 2: return -(y * y + 2.0 * y / eta + 2.0 / (eta * eta)) * e;
            default: throw ParameterError("exp_partial_moment: k must be 0, 1 or 2");
        }
    };
    return anti(hi) - anti(lo);
}

double require(const LevyModel::Params& p, const char* name) {
    auto it = p.find(name);
    if (it == p.end()) throw ParameterError(std::string("missing Lévy parameter '") + name + "'");
    if (!std::isfinite(it->second)) throw ParameterError(std::string("non-finite Lévy parameter '") + name + "'");
    return it->second;
}

void reject_unknown(const LevyModel::Params& p, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ParameterError("unknown Lévy parameter '" + k + "'");
    }
}

}  // namespace

std::string_view to_string(LevyFamily f) {
    switch (f) {
        case LevyFamily::None: return "none";
        case LevyFamily::Merton: return "merton";
        case LevyFamily::Kou: return "kou";
        case LevyFamily::VarianceGamma: return "variance_gamma";
        case LevyFamily::NIG: return "nig";
        case LevyFamily::TemperedStable: return "tempered_stable";
    }
    return "none";
}

LevyFamily levy_family_from_string(std::string_view name) {
    for (auto f : {LevyFamily::None, LevyFamily::Merton, LevyFamily::Kou, LevyFamily::VarianceGamma,
                   LevyFamily::NIG, LevyFamily::TemperedStable}) {
        if (to_string(f) == name) return f;
    }
    throw ParameterError("unknown Lévy family '" + std::string(name) + "'");
}

LevyModel::LevyModel() = default;

LevyModel LevyModel::merton(double intensity, double mean, double stdev) {
    return from_params(LevyFamily::Merton, {{"intensity", intensity}, {"mean", mean}, {"stdev", stdev}});
}

LevyModel LevyModel::kou(double intensity, double p_up, double eta_up, double eta_down) {
    return from_params(LevyFamily::Kou,
                       {{"intensity", intensity}, {"p_up", p_up}, {"eta_up", eta_up}, {"eta_down", eta_down}});
}

LevyModel LevyModel::variance_gamma(double sigma, double nu, double theta) {
    return from_params(LevyFamily::VarianceGamma, {{"sigma", sigma}, {"nu", nu}, {"theta", theta}});
}

LevyModel LevyModel::nig(double alpha, double beta, double delta) {
    return from_params(LevyFamily::NIG, {{"alpha", alpha}, {"beta", beta}, {"delta", delta}});
}

LevyModel LevyModel::tempered_stable(double c_minus, double c_plus, double alpha_minus, double alpha_plus,
                                     double lambda_minus, double lambda_plus) {
    return from_params(LevyFamily::TemperedStable, {{"c_minus", c_minus},
                                                    {"c_plus", c_plus},
                                                    {"alpha_minus", alpha_minus},
                                                    {"alpha_plus", alpha_plus},
                                                    {"lambda_minus", lambda_minus},
                                                    {"lambda_plus", lambda_plus}});
}

LevyModel LevyModel::from_params(LevyFamily family, const Params& p) {
    LevyModel m;
    m.family_ = family;
    m.params_ = p;
    switch (family) {
        case LevyFamily::None:
            reject_unknown(p, {});
            break;
        case LevyFamily::Merton: {
            reject_unknown(p, {"intensity", "mean", "stdev"});
            const double lam = require(p, "intensity");
            require(p, "mean");
            const double s = require(p, "stdev");
            if (!(lam > 0.0)) throw ParameterError("merton: intensity must be > 0");
            if (!(s > 0.0)) throw ParameterError("merton: stdev must be > 0");
            m.q_[0] = lam;
            m.q_[1] = p.at("mean");
            m.q_[2] = s;
            m.alpha_ = 0.0;
            m.sing_const_ = lam / (s * std::sqrt(2.0 * std::numbers::pi));
            break;
        }
        case LevyFamily::Kou: {
            reject_unknown(p, {"intensity", "p_up", "eta_up", "eta_down"});
            const double lam = require(p, "intensity");
            const double pu = require(p, "p_up");
            const double e1 = require(p, "eta_up");
            const double e2 = require(p, "eta_down");
            if (!(lam > 0.0)) throw ParameterError("kou: intensity must be > 0");
            if (!(pu >= 0.0 && pu <= 1.0)) throw ParameterError("kou: p_up must be in [0, 1]");
            if (!(e1 > 0.0) || !(e2 > 0.0)) throw ParameterError("kou: eta_up and eta_down must be > 0");
            m.q_[0] = lam;
            m.q_[1] = pu;
            m.q_[2] = e1;
            m.q_[3] = e2;
            m.alpha_ = 0.0;
            m.sing_const_ = lam * std::max(pu * e1, (1.0 - pu) * e2);
            break;
        }
        case LevyFamily::VarianceGamma: {
            reject_unknown(p, {"sigma", "nu", "theta"});
            const double sig = require(p, "sigma");
            const double nu = require(p, "nu");
            const double th = require(p, "theta");
            if (!(sig > 0.0)) throw ParameterError("variance_gamma: sigma must be > 0");
            if (!(nu > 0.0)) throw ParameterError("variance_gamma: nu must be > 0");
            const double root = std::sqrt(th * th * nu * nu / 4.0 + sig * sig * nu / 2.0);
            m.c_[0] = m.c_[1] = 1.0 / nu;
            m.a_[0] = m.a_[1] = 0.0;
            m.lam_[0] = 1.0 / (root - th * nu / 2.0);
            m.lam_[1] = 1.0 / (root + th * nu / 2.0);
            m.alpha_ = 0.0;
            m.sing_const_ = 1.0 / nu;
            break;
        }
        case LevyFamily::NIG: {
            reject_unknown(p, {"alpha", "beta", "delta"});
            const double a = require(p, "alpha");
            const double b = require(p, "beta");
            const double d = require(p, "delta");
            if (!(a > 0.0)) throw ParameterError("nig: alpha must be > 0");
            if (!(std::abs(b) < a)) throw ParameterError("nig: |beta| must be < alpha");
            if (!(d > 0.0)) throw ParameterError("nig: delta must be > 0");
            // Subordinated Brownian motion with β = 1/2: ρ ~ δ/(π y²) at 0.
            m.q_[0] = a;
            m.q_[1] = b;
            m.q_[2] = d;
            m.alpha_ = 1.0;
            // z K_1(z) <= 1 for z > 0.
            m.sing_const_ = d / std::numbers::pi * std::exp(std::abs(b));
            break;
        }
        case LevyFamily::TemperedStable: {
            reject_unknown(p, {"c_minus", "c_plus", "alpha_minus", "alpha_plus", "lambda_minus", "lambda_plus"});
            m.c_[0] = require(p, "c_minus");
            m.c_[1] = require(p, "c_plus");
            m.a_[0] = require(p, "alpha_minus");
            m.a_[1] = require(p, "alpha_plus");
            m.lam_[0] = require(p, "lambda_minus");
            m.lam_[1] = require(p, "lambda_plus");
            for (int s = 0; s < 2; ++s) {
                if (!(m.c_[s] >= 0.0)) throw ParameterError("tempered_stable: c_minus, c_plus must be >= 0");
                if (!(m.a_[s] >= 0.0 && m.a_[s] < 2.0))
                    throw ParameterError("tempered_stable: alpha_minus, alpha_plus must be in [0, 2)");
                if (!(m.lam_[s] > 0.0))
                    throw ParameterError("tempered_stable: lambda_minus, lambda_plus must be > 0");
            }
            if (!(m.c_[0] + m.c_[1] > 0.0)) throw ParameterError("tempered_stable: c_minus + c_plus must be > 0");
            m.alpha_ = 0.0;
            m.sing_const_ = 0.0;
            for (int s = 0; s < 2; ++s) {
                if (m.c_[s] > 0.0) {
                    m.alpha_ = std::max(m.alpha_, m.a_[s]);
                    m.sing_const_ = std::max(m.sing_const_, m.c_[s]);
                }
            }
            break;
        }
    }
    return m;
}

bool LevyModel::finite_activity() const {
    switch (family_) {
        case LevyFamily::None:
        case LevyFamily::Merton:
        case LevyFamily::Kou: return true;
        default: return false;
    }
}

double LevyModel::density(double y) const {
    if (y == 0.0) throw DomainError("Lévy density evaluated at the singular point y = 0");
    if (!std::isfinite(y)) return 0.0;
    switch (family_) {
        case LevyFamily::None: return 0.0;
        case LevyFamily::Merton: {
            const double lam = q_[0], mu = q_[1], s = q_[2];
            return lam * phi((y - mu) / s) / s;
        }
        case LevyFamily::Kou: {
            const double lam = q_[0], pu = q_[1];
            if (y > 0.0) {
                const double e = q_[2];
                return lam * pu * e * std::exp(-e * y);
            }
            const double e = q_[3];
            return lam * (1.0 - pu) * e * std::exp(e * y);
        }
        case LevyFamily::NIG: {
            const double a = q_[0], b = q_[1], d = q_[2];
            const double ay = a * std::abs(y);
            if (ay > 700.0) return 0.0;
            // z K_1(z) = 1 + O(z² log z) as z -> 0.
            if (ay < 1e-10) return d / (std::numbers::pi * y * y) * std::exp(b * y);
            return a * d / (std::numbers::pi * std::abs(y)) * std::exp(b * y) * boost::math::cyl_bessel_k(1, ay);
        }
        case LevyFamily::VarianceGamma:
        case LevyFamily::TemperedStable: {
            const int s = y > 0.0 ? 1 : 0;
            const double m = std::abs(y);
            if (c_[s] == 0.0) return 0.0;
            return c_[s] * std::exp(-lam_[s] * m) / std::pow(m, 1.0 + a_[s]);
        }
    }
    return 0.0;
}

double LevyModel::side_alpha(Side side) const {
    switch (family_) {
        case LevyFamily::None:
        case LevyFamily::Merton:
        case LevyFamily::Kou: return -1.0;  // bounded density
        case LevyFamily::NIG: return 1.0;
        case LevyFamily::VarianceGamma:
        case LevyFamily::TemperedStable: return c_[idx(side)] > 0.0 ? a_[idx(side)] : -1.0;
    }
    return -1.0;
}

double LevyModel::numeric_side_integral(const std::function<double(double)>& g, double lo, double hi,
                                        double power_at_zero, double rel_tol) const {
    if (!(lo >= 0.0) || !(hi > lo)) return 0.0;
    double sum = 0.0;
    const double inner_hi = std::min(hi, 1.0);
    if (lo < inner_hi) {
        if (lo == 0.0) {
            if (!(power_at_zero > -1.0)) {
                throw UnsupportedOperation("jump integral diverges at y = 0 for this Lévy measure");
            }
            const double y0 = inner_hi / 1024.0;
            sum += quad::power_singular(g, y0, power_at_zero, rel_tol);
            sum += quad::dyadic(g, y0, inner_hi, rel_tol);
        } else {
            sum += quad::dyadic(g, lo, inner_hi, rel_tol);
        }
    }
    if (hi > 1.0) {
        const double a = std::max(lo, 1.0);
        if (std::isinf(hi)) {
            sum += quad::adaptive(g, a, kInf, rel_tol);
        } else {
            sum += quad::dyadic(g, a, hi, rel_tol);
        }
    }
    return sum;
}

double LevyModel::side_moment(int k, double lo, double hi, Side side, double rel_tol) const {
    if (!(hi > lo)) return 0.0;
    switch (family_) {
        case LevyFamily::None: return 0.0;
        case LevyFamily::Merton: {
            const double lam = params_.at("intensity"), mu = params_.at("mean"), s = params_.at("stdev");
            const double m = side == Side::Positive ? mu : -mu;
            return lam * normal_partial_moment(k, m, s, lo, hi);
        }
        case LevyFamily::Kou: {
            const double lam = params_.at("intensity"), pu = params_.at("p_up");
            if (side == Side::Positive) return lam * pu * exp_partial_moment(k, params_.at("eta_up"), lo, hi);
            return lam * (1.0 - pu) * exp_partial_moment(k, params_.at("eta_down"), lo, hi);
        }
        default: {
            if (family_ != LevyFamily::NIG && c_[idx(side)] == 0.0) return 0.0;
            return side_integral([k](double y) { return std::pow(std::abs(y), k); }, lo, hi, side,
                                 static_cast<double>(k), rel_tol);
        }
    }
}

double LevyModel::moment(int k, double lo, double hi, double rel_tol) const {
    const double pos = side_moment(k, lo, hi, Side::Positive, rel_tol);
    const double neg = side_moment(k, lo, hi, Side::Negative, rel_tol);
    return (k % 2 == 0) ? pos + neg : pos - neg;
}

double LevyModel::abs_moment(int k, double lo, double hi, double rel_tol) const {
    return side_moment(k, lo, hi, Side::Positive, rel_tol) + side_moment(k, lo, hi, Side::Negative, rel_tol);
}

namespace {

// e^y - 1 - y without cancellation near 0.
double exp_minus_linear(double y) {
    if (std::abs(y) > 0.1) return std::expm1(y) - y;
    double term = y * y / 2.0, sum = 0.0;
    for (int k = 3; k < 20 && term != 0.0; ++k) {
        sum += term;
        term *= y / k;
    }
    return sum;
}

}  // namespace

double LevyModel::exp_compensator() const {
    switch (family_) {
        case LevyFamily::None: return 0.0;
        case LevyFamily::Kou:
            if (!(params_.at("eta_up") > 1.0)) return kInf;
            break;
        case LevyFamily::NIG:
            if (!(params_.at("alpha") - params_.at("beta") > 1.0)) return kInf;
            break;
        case LevyFamily::VarianceGamma:
        case LevyFamily::TemperedStable:
            if (c_[1] > 0.0 && !(lam_[1] > 1.0)) return kInf;
            break;
        default: break;
    }
    double sum = 0.0;
    for (Side s : {Side::Negative, Side::Positive}) {
        sum += side_integral(exp_minus_linear, 0.0, 1.0, s, 2.0);
        sum += side_integral([](double y) { return std::expm1(y); }, 1.0, kInf, s, 0.0);
    }
    return sum;
}

double LevyModel::truncation_radius(double tol) const {
    if (family_ == LevyFamily::None) return 0.0;
    auto tail = [&](double r) { return abs_moment(0, r, kInf) + abs_moment(1, r, kInf); };
    double hi = 1.0;
    while (tail(hi) > tol) {
        hi *= 2.0;
        if (hi > 1e6) throw ParameterError("Lévy tail too heavy for jump-domain truncation");
    }
    double lo = 0.0;
    while (hi - lo > 1e-6 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double TailIntegrals::fv_drift() const {
    if (!fv_drift_value) {
        throw UnsupportedOperation("fv_drift requires finite-variation jumps (alpha < 1)");
    }
    return *fv_drift_value;
}

double small_var(const LevyModel& model, double eps, double rel_tol) {
    if (!(eps > 0.0)) throw ParameterError("small_var: eps must be > 0");
    return model.abs_moment(2, 0.0, eps, rel_tol);
}

TailIntegrals tails(const LevyModel& model, double eps, double rel_tol) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("tails: eps must be in (0, 1]");
    TailIntegrals t;
    t.eps = eps;
    if (model.family() == LevyFamily::None) {
        t.fv_drift_value = 0.0;
        return t;
    }
    t.small_var = model.abs_moment(2, 0.0, eps, rel_tol);
    t.comp_drift = model.moment(1, eps, 1.0, rel_tol);
    t.big_mass = model.abs_moment(0, 1.0, kInf, rel_tol);
    t.big_mean_abs = model.abs_moment(1, 1.0, kInf, rel_tol);
    t.big_mean = model.moment(1, 1.0, kInf, rel_tol);
    if (model.finite_variation()) t.fv_drift_value = model.moment(1, 0.0, 1.0, rel_tol);
    return t;
}

}  // namespace levystop
