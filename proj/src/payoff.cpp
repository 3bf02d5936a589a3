#include "levystop/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <math.h>  // pchip.hpp in Boost 1.74 calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>

#include "levystop/errors.hpp"
#include "levystop/mollifier.hpp"

namespace levystop {

struct PayoffSpec::Custom {
    std::vector<double> x, g;
    boost::math::interpolators::pchip<std::vector<double>> spline;
    bool flat;

    Custom(std::vector<double> xs, std::vector<double> gs)
        : x(xs), g(gs), spline(std::move(xs), std::move(gs), 0.0, 0.0),
          flat(std::all_of(g.begin(), g.end(), [&](double v) { return v == g.front(); })) {}

    double eval(double t) const {
        if (flat || t <= x.front()) return g.front();
        if (t >= x.back()) return g.back();
        return spline(t);
    }
    double prime(double t) const {
        if (t <= x.front() || t >= x.back()) return 0.0;
        return spline.prime(t);
    }
};

std::string_view to_string(PayoffKind k) {
    switch (k) {
        case PayoffKind::Put: return "put";
        case PayoffKind::CappedCall: return "capped_call";
        case PayoffKind::Custom: return "custom";
    }
    return "put";
}

PayoffKind payoff_kind_from_string(std::string_view name) {
    for (auto k : {PayoffKind::Put, PayoffKind::CappedCall, PayoffKind::Custom}) {
        if (to_string(k) == name) return k;
    }
    throw ParameterError("unknown payoff kind '" + std::string(name) + "'");
}

PayoffSpec PayoffSpec::put(double strike) {
    if (!(strike > 0.0) || !std::isfinite(strike)) throw ParameterError("put: strike must be > 0");
    PayoffSpec p;
    p.kind_ = PayoffKind::Put;
    p.strike_ = strike;
    // g'' = -e^x >= -strike left of the kink; the kink itself adds a positive mass.
    p.k_bound_ = p.l_lip_ = p.j_semi_ = strike;
    p.kinks_ = {std::log(strike)};
    return p;
}

PayoffSpec PayoffSpec::capped_call(double strike, double cap, double curvature) {
    if (!(strike > 0.0)) throw ParameterError("capped_call: strike must be > 0");
    if (!(cap > strike)) throw ParameterError("capped_call: cap must exceed strike");
    if (!(curvature > 0.0)) throw ParameterError("capped_call: curvature must be > 0");
    // Leave the exponential branch at s = e^{x1} with slope s and bend with
    // g'' = -J until the slope vanishes: s + s²/(2J) = cap.
    const double s = curvature * (std::sqrt(1.0 + 2.0 * cap / curvature) - 1.0);
    if (!(s > strike)) {
        throw ParameterError("capped_call: curvature too small for the cap; need a larger curvature");
    }
    PayoffSpec p;
    p.kind_ = PayoffKind::CappedCall;
    p.strike_ = strike;
    p.cap_ = cap;
    p.x1_ = std::log(s);
    p.x2_ = p.x1_ + s / curvature;
    p.k_bound_ = cap - strike;
    p.l_lip_ = s;
    p.j_semi_ = curvature;
    p.kinks_ = {std::log(strike), p.x1_, p.x2_};
    return p;
}

PayoffSpec PayoffSpec::custom(std::vector<double> x, std::vector<double> g) {
    if (x.size() != g.size()) throw ParameterError("custom payoff: x and g differ in length");
    if (x.size() < 4) throw ParameterError("custom payoff: need at least 4 points");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(g[i])) throw ParameterError("custom payoff: non-finite value");
        if (g[i] < 0.0) throw ParameterError("custom payoff: values must be >= 0");
        if (i > 0 && !(x[i] > x[i - 1])) throw ParameterError("custom payoff: x must be strictly increasing");
    }
    PayoffSpec p;
    p.kind_ = PayoffKind::Custom;
    p.strike_ = std::numeric_limits<double>::quiet_NaN();
    p.custom_ = std::make_shared<const Custom>(x, g);
    const Custom& c = *p.custom_;

    p.k_bound_ = *std::max_element(g.begin(), g.end());

    // Hermite cubic per segment: g' is quadratic, g'' linear; both extremes are
    // attained at segment ends or at the vertex of g'.
    double lip = 0.0, j = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        const double d0 = c.spline.prime(x[i]);
        const double d1 = c.spline.prime(x[i + 1]);
        const double delta = (g[i + 1] - g[i]) / h;
        const double s0 = (6.0 * delta - 4.0 * d0 - 2.0 * d1) / h;
        const double s1 = (-6.0 * delta + 2.0 * d0 + 4.0 * d1) / h;
        j = std::max({j, -s0, -s1});
        lip = std::max({lip, std::abs(d0), std::abs(d1)});
        if (s0 * s1 < 0.0) {
            const double tau = s0 / (s0 - s1);
            lip = std::max(lip, std::abs(d0 + s0 * tau * h / 2.0));
        }
    }
    p.l_lip_ = std::max(lip, 1e-300);
    p.j_semi_ = j;
    p.kinks_ = x;
    return p;
}

PayoffSpec PayoffSpec::custom_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open payoff CSV '" + path + "'");
    std::vector<double> xs, gs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a = 0.0, b = 0.0;
        if (!(row >> a >> b)) {
            if (xs.empty()) continue;  // header
            throw ConfigError("payoff CSV '" + path + "' line " + std::to_string(lineno) + ": expected two numbers");
        }
        xs.push_back(a);
        gs.push_back(b);
    }
    try {
        return custom(std::move(xs), std::move(gs));
    } catch (const ParameterError& e) {
        throw ConfigError("payoff CSV '" + path + "': " + e.what());
    }
}

double PayoffSpec::raw_eval(double x) const {
    switch (kind_) {
        case PayoffKind::Put: return std::max(strike_ - std::exp(x), 0.0);
        case PayoffKind::CappedCall: {
            if (x >= x2_) return cap_ - strike_;
            if (x <= x1_) return std::max(std::exp(x) - strike_, 0.0);
            const double s = std::exp(x1_), d = x - x1_;
            return s - strike_ + s * d - 0.5 * j_semi_ * d * d;
        }
        case PayoffKind::Custom: return custom_->eval(x);
    }
    return 0.0;
}

double PayoffSpec::raw_derivative(double x) const {
    switch (kind_) {
        case PayoffKind::Put: return x < kinks_[0] ? -std::exp(x) : 0.0;
        case PayoffKind::CappedCall: {
            if (x >= x2_) return 0.0;
            if (x <= x1_) return x > kinks_[0] ? std::exp(x) : 0.0;
            return std::exp(x1_) - j_semi_ * (x - x1_);
        }
        case PayoffKind::Custom: return custom_->prime(x);
    }
    return 0.0;
}

double PayoffSpec::eval(double x) const {
    if (eps_ == 0.0) return raw_eval(x);
    return bump::convolve([this](double z) { return raw_eval(z); }, x, eps_, kinks_);
}

double PayoffSpec::derivative(double x) const {
    if (eps_ == 0.0) return raw_derivative(x);
    return bump::convolve([this](double z) { return raw_derivative(z); }, x, eps_, kinks_);
}

PayoffSpec PayoffSpec::mollify(double eps) const {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("mollify: eps must lie in (0, 1)");
    PayoffSpec p = raw();
    p.eps_ = eps;
    return p;
}

PayoffSpec PayoffSpec::raw() const {
    PayoffSpec p = *this;
    p.eps_ = 0.0;
    return p;
}

}  // namespace levystop
