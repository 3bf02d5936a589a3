#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace levystop {

/// Uniform grid on the padded interval [x_lo - pad, x_hi + pad] × [0, T].
/// Nodes x_i = x_lo - pad + i·h for i = 0..nx, times t_n = n·Δt for n = 0..nt.
struct SpaceTimeGrid {
    double x_lo = -1.0;
    double x_hi = 1.0;
    double pad = 1.0;
    int nx = 400;
    int nt = 200;
    double T = 1.0;

    double h() const { return (x_hi - x_lo + 2.0 * pad) / nx; }
    double dt() const { return T / nt; }
    int points() const { return nx + 1; }
    double x(int i) const { return x_lo - pad + i * h(); }
    double t(int n) const { return n * dt(); }

    /// First and last node index inside [x_lo, x_hi].
    int interior_begin() const;
    int interior_end() const;  // inclusive

    /// Nearest node index to x, clamped to the grid.
    int index_of(double x) const;

    /// Throws ConfigError when an invariant fails (h, Δt > 0, pad >= 1, nx >= 5).
    void validate() const;

    /// h and Δt halved k times.
    SpaceTimeGrid refined(int k) const;

    bool operator==(const SpaceTimeGrid&) const = default;
};

enum class Extension { ClampToPayoff, LinearExtrapolate, Zero };

std::string_view to_string(Extension e);
Extension extension_from_string(std::string_view name);

/// Values on a SpaceTimeGrid, row-major in time: row n holds the spatial
/// slice at time index n.
class GridFunction {
public:
    using FarField = std::function<double(double x, int n)>;

    GridFunction() = default;
    explicit GridFunction(const SpaceTimeGrid& grid, Extension ext = Extension::LinearExtrapolate,
                          FarField far = {});

    /// Samples f(x_i, t_n) on every node.
    static GridFunction sample(const SpaceTimeGrid& grid, const std::function<double(double, double)>& f,
                               Extension ext = Extension::LinearExtrapolate, FarField far = {});

    const SpaceTimeGrid& grid() const { return grid_; }
    Extension extension() const { return ext_; }
    void set_extension(Extension ext, FarField far = {});

    double& at(int i, int n) { return values_[index(i, n)]; }
    double at(int i, int n) const { return values_[index(i, n)]; }
    std::span<double> row(int n);
    std::span<const double> row(int n) const;
    const std::vector<double>& data() const { return values_; }

    /// Value at node index i, which may lie outside [0, nx]; reads beyond the
    /// padded grid follow the extension rule.
    double extended(int i, int n) const;

    /// Row n with `left` extension nodes before index 0 and `right` after nx.
    void extended_row(int n, int left, int right, std::vector<double>& out) const;

    /// True if every value is finite.
    bool all_finite() const;

private:
    std::size_t index(int i, int n) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(grid_.points()) + static_cast<std::size_t>(i);
    }

    SpaceTimeGrid grid_;
    Extension ext_ = Extension::LinearExtrapolate;
    FarField far_;
    std::vector<double> values_;
};

/// Coefficients of the local operator a ∂²ₓ + b ∂ₓ - r, with a >= lambda_floor
/// and r >= 0. Time arguments are calendar time t of the stopping problem.
class CoefficientField {
public:
    using Fn = std::function<double(double x, double t)>;

    static CoefficientField constant(double a, double b, double r, double lambda_floor = 0.0);
    static CoefficientField functions(Fn a, Fn b, Fn r, double lambda_floor);

    double a(double x, double t) const { return a_const_ ? a0_ : a_(x, t); }
    double b(double x, double t) const { return b_const_ ? b0_ : b_(x, t); }
    double r(double x, double t) const { return r_const_ ? r0_ : r_(x, t); }
    double lambda_floor() const { return lambda_; }

    bool is_constant() const { return a_const_ && b_const_ && r_const_; }

    /// Throws ConfigError if a < lambda_floor or r < 0 at some node.
    void validate(const SpaceTimeGrid& grid) const;

    struct Maxima {
        double a = 0.0, abs_b = 0.0, r = 0.0;
    };
    /// Maxima of a, |b|, r over every node of the grid.
    Maxima maxima(const SpaceTimeGrid& grid) const;

    /// Copy with b replaced by b + shift.
    CoefficientField with_drift_shift(double shift) const;

private:
    Fn a_, b_, r_;
    double a0_ = 0.0, b0_ = 0.0, r0_ = 0.0;
    bool a_const_ = true, b_const_ = true, r_const_ = true;
    double lambda_ = 0.0;
};

}  // namespace levystop
