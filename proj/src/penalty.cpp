#include "levystop/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "levystop/errors.hpp"
#include "levystop/mollifier.hpp"

namespace levystop {

namespace {

// cdf and upper_ramp of the bump on [-1, 1], tabulated once and read back by
// cubic Hermite interpolation with exact end derivatives. Interpolation error
// is below 1e-14, far under the quadrature it replaces per call.
class BumpTable {
public:
    static constexpr int kCells = 4096;

    BumpTable() {
        for (int k = 0; k <= kCells; ++k) {
            const double t = node(k);
            eta_[k] = bump::kernel(t);
            cdf_[k] = bump::cdf(t);
            ramp_[k] = bump::upper_ramp(t);
        }
    }

    static const BumpTable& get() {
        static const BumpTable table;
        return table;
    }

    double cdf(double t) const {
        if (t <= -1.0) return 0.0;
        if (t >= 1.0) return 1.0;
        return hermite(t, cdf_, eta_, false);
    }

    double upper_ramp(double t) const {
        if (t <= -1.0) return t;
        if (t >= 1.0) return 0.0;
        return hermite(t, ramp_, cdf_, true);
    }

private:
    static constexpr double kStep = 2.0 / kCells;
    static double node(int k) { return -1.0 + k * kStep; }

    // f on the cell holding t from values f and slopes df (or 1 - df when
    // `complement`, for upper_ramp whose slope is 1 - cdf).
    double hermite(double t, const std::array<double, kCells + 1>& f, const std::array<double, kCells + 1>& df,
                   bool complement) const {
        int k = static_cast<int>((t + 1.0) / kStep);
        k = std::min(std::max(k, 0), kCells - 1);
        const double s = (t - node(k)) / kStep;
        const double d0 = complement ? 1.0 - df[k] : df[k];
        const double d1 = complement ? 1.0 - df[k + 1] : df[k + 1];
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * f[k] + h10 * kStep * d0 + h01 * f[k + 1] + h11 * kStep * d1;
    }

    std::array<double, kCells + 1> eta_{}, cdf_{}, ramp_{};
};

}  // namespace

PenaltySpec PenaltySpec::build(double eps, double p0) {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("penalty: eps must be in (0, 1), got " + std::to_string(eps));
    if (!(p0 <= 0.0) || !std::isfinite(p0)) throw ParameterError("penalty: p0 must be finite and <= 0");
    PenaltySpec p;
    p.eps_ = eps;
    p.p0_ = p0;
    p.width_ = eps / 8.0;
    p.slope_ = -2.0 * p0 / eps;
    return p;
}

// With u = y - eps/2 the template is s·min(u, 0). At y = 0 the argument of
// upper_ramp is -4, where it returns its argument exactly, so p(0) = p0.
double PenaltySpec::operator()(double y) const {
    if (slope_ == 0.0) return 0.0;
    const double t = (y - 0.5 * eps_) / width_;
    if (t <= -1.0) return slope_ * (y - 0.5 * eps_);
    return slope_ * width_ * BumpTable::get().upper_ramp(t);
}

double PenaltySpec::derivative(double y) const {
    const double t = (y - 0.5 * eps_) / width_;
    return slope_ * (1.0 - BumpTable::get().cdf(t));
}

double PenaltySpec::second_derivative(double y) const {
    const double t = (y - 0.5 * eps_) / width_;
    return -slope_ * bump::kernel(t) / width_;
}

void PenaltySpec::apply(std::span<const double> v, std::span<const double> g, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(v[i] - g[i]);
}

double penalty_anchor(const CoefficientField& c, const PayoffSpec& g, const LevyModel& m, const SpaceTimeGrid& grid) {
    const auto mx = c.maxima(grid);
    const double K = g.K_bound(), L = g.L_lip(), J = g.J_semi();
    double p0 = -mx.a * J - mx.abs_b * L - mx.r * K;
    if (m.family() != LevyFamily::None) {
        const TailIntegrals t = tails(m, 1.0);
        p0 -= J * t.small_var + K * t.big_mass;
    }
    return p0;
}

}  // namespace levystop
