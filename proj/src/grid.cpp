#include "levystop/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levystop/errors.hpp"

namespace levystop {

int SpaceTimeGrid::interior_begin() const {
    return static_cast<int>(std::ceil(pad / h() - 1e-9));
}

int SpaceTimeGrid::interior_end() const {
    return static_cast<int>(std::floor((x_hi - x_lo + pad) / h() + 1e-9));
}

int SpaceTimeGrid::index_of(double x) const {
    const long i = std::lround((x - (x_lo - pad)) / h());
    return static_cast<int>(std::clamp<long>(i, 0, nx));
}

void SpaceTimeGrid::validate() const {
    if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_hi > x_lo)) {
        throw ConfigError("grid: need finite x_lo < x_hi");
    }
    if (!(pad >= 1.0)) throw ConfigError("grid: pad must be >= 1 so the |y| <= 1 split fits in the padding");
    if (nx < 5) throw ConfigError("grid: nx must be >= 5");
    if (nt < 1) throw ConfigError("grid: nt must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("grid: horizon T must be > 0");
    if (interior_end() - interior_begin() < 2) throw ConfigError("grid: too few nodes inside [x_lo, x_hi]");
}

SpaceTimeGrid SpaceTimeGrid::refined(int k) const {
    if (k < 0) throw ConfigError("grid: refinement level must be >= 0");
    SpaceTimeGrid g = *this;
    g.nx = nx << k;
    g.nt = nt << k;
    return g;
}

std::string_view to_string(Extension e) {
    switch (e) {
        case Extension::ClampToPayoff: return "clamp_to_payoff";
        case Extension::LinearExtrapolate: return "linear_extrapolate";
        case Extension::Zero: return "zero";
    }
    return "zero";
}

Extension extension_from_string(std::string_view name) {
    for (auto e : {Extension::ClampToPayoff, Extension::LinearExtrapolate, Extension::Zero}) {
        if (to_string(e) == name) return e;
    }
    throw ConfigError("unknown extension rule '" + std::string(name) + "'");
}

GridFunction::GridFunction(const SpaceTimeGrid& grid, Extension ext, FarField far)
    : grid_(grid), values_(static_cast<std::size_t>(grid.points()) * static_cast<std::size_t>(grid.nt + 1), 0.0) {
    set_extension(ext, std::move(far));
}

GridFunction GridFunction::sample(const SpaceTimeGrid& grid, const std::function<double(double, double)>& f,
                                  Extension ext, FarField far) {
    GridFunction g(grid, ext, std::move(far));
    for (int n = 0; n <= grid.nt; ++n) {
        for (int i = 0; i <= grid.nx; ++i) g.at(i, n) = f(grid.x(i), grid.t(n));
    }
    return g;
}

void GridFunction::set_extension(Extension ext, FarField far) {
    if (ext == Extension::ClampToPayoff && !far) {
        throw ParameterError("ClampToPayoff extension needs a far-field function");
    }
    ext_ = ext;
    far_ = std::move(far);
}

std::span<double> GridFunction::row(int n) {
    return {values_.data() + index(0, n), static_cast<std::size_t>(grid_.points())};
}

std::span<const double> GridFunction::row(int n) const {
    return {values_.data() + index(0, n), static_cast<std::size_t>(grid_.points())};
}

double GridFunction::extended(int i, int n) const {
    const int nx = grid_.nx;
    if (i >= 0 && i <= nx) return at(i, n);
    switch (ext_) {
        case Extension::Zero: return 0.0;
        case Extension::ClampToPayoff: return far_(grid_.x(i), n);
        case Extension::LinearExtrapolate:
            if (i < 0) return at(0, n) + i * (at(1, n) - at(0, n));
            return at(nx, n) + (i - nx) * (at(nx, n) - at(nx - 1, n));
    }
    return 0.0;
}

void GridFunction::extended_row(int n, int left, int right, std::vector<double>& out) const {
    const int nx = grid_.nx;
    out.resize(static_cast<std::size_t>(left + nx + 1 + right));
    for (int j = 0; j < left; ++j) out[j] = extended(j - left, n);
    auto r = row(n);
    std::copy(r.begin(), r.end(), out.begin() + left);
    for (int j = 1; j <= right; ++j) out[left + nx + j] = extended(nx + j, n);
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

CoefficientField CoefficientField::constant(double a, double b, double r, double lambda_floor) {
    CoefficientField c;
    c.a0_ = a;
    c.b0_ = b;
    c.r0_ = r;
    c.lambda_ = lambda_floor;
    return c;
}

CoefficientField CoefficientField::functions(Fn a, Fn b, Fn r, double lambda_floor) {
    CoefficientField c;
    c.a_ = std::move(a);
    c.b_ = std::move(b);
    c.r_ = std::move(r);
    c.a_const_ = c.b_const_ = c.r_const_ = false;
    c.lambda_ = lambda_floor;
    return c;
}

void CoefficientField::validate(const SpaceTimeGrid& grid) const {
    if (!(lambda_ >= 0.0)) throw ConfigError("coefficients: lambda_floor must be >= 0");
    for (int n = 0; n <= grid.nt; ++n) {
        const double t = grid.t(n);
        for (int i = 0; i <= grid.nx; ++i) {
            const double x = grid.x(i);
            const double av = a(x, t), bv = b(x, t), rv = r(x, t);
            if (!std::isfinite(av) || !std::isfinite(bv) || !std::isfinite(rv)) {
                throw ConfigError("coefficients: non-finite value on the grid");
            }
            if (av < lambda_) throw ConfigError("coefficients: a falls below the ellipticity floor lambda");
            if (rv < 0.0) throw ConfigError("coefficients: r must be >= 0");
        }
        if (is_constant()) break;
    }
}

CoefficientField::Maxima CoefficientField::maxima(const SpaceTimeGrid& grid) const {
    Maxima m;
    for (int n = 0; n <= grid.nt; ++n) {
        const double t = grid.t(n);
        for (int i = 0; i <= grid.nx; ++i) {
            const double x = grid.x(i);
            m.a = std::max(m.a, a(x, t));
            m.abs_b = std::max(m.abs_b, std::abs(b(x, t)));
            m.r = std::max(m.r, r(x, t));
        }
        if (is_constant()) break;
    }
    return m;
}

CoefficientField CoefficientField::with_drift_shift(double shift) const {
    CoefficientField c = *this;
    if (b_const_) {
        c.b0_ = b0_ + shift;
    } else {
        c.b_ = [b = b_, shift](double x, double t) { return b(x, t) + shift; };
    }
    return c;
}

}  // namespace levystop
