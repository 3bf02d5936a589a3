#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace levystop {

enum class LevyFamily { None, Merton, Kou, VarianceGamma, NIG, TemperedStable };

std::string_view to_string(LevyFamily f);
LevyFamily levy_family_from_string(std::string_view name);

/// Side of the real line a jump integral is taken over.
enum class Side { Negative, Positive };

/// A one-dimensional Lévy measure with a density ρ satisfying
///   ρ(y) <= M / |y|^{1+α} on |y| <= 1,   ∫_{|y|>1} |y| ν(dy) < ∞.
///
/// Parameters are validated at construction, and α, M are derived from the
/// family parameters. Instances are immutable.
///
/// Parameter names per family:
///   Merton          intensity, mean, stdev            (jump size ~ N(mean, stdev²))
///   Kou             intensity, p_up, eta_up, eta_down
///   VarianceGamma   sigma, nu, theta
///   NIG             alpha, beta, delta
///   TemperedStable  c_minus, c_plus, alpha_minus, alpha_plus, lambda_minus, lambda_plus
class LevyModel {
public:
    using Params = std::map<std::string, double>;

    LevyModel();  // family None

    static LevyModel none() { return {}; }
    static LevyModel merton(double intensity, double mean, double stdev);
    static LevyModel kou(double intensity, double p_up, double eta_up, double eta_down);
    static LevyModel variance_gamma(double sigma, double nu, double theta);
    static LevyModel nig(double alpha, double beta, double delta);
    static LevyModel tempered_stable(double c_minus, double c_plus, double alpha_minus, double alpha_plus,
                                     double lambda_minus, double lambda_plus);
    /// Builds a model from named parameters; unknown or missing names are rejected.
    static LevyModel from_params(LevyFamily family, const Params& params);

    LevyFamily family() const { return family_; }
    const Params& params() const { return params_; }

    /// Singularity exponent α in [0, 2).
    double alpha() const { return alpha_; }
    /// Constant M with ρ(y)|y|^{1+α} <= M on 0 < |y| <= 1.
    double sing_const() const { return sing_const_; }

    bool finite_activity() const;
    bool finite_variation() const { return alpha_ < 1.0; }

    /// Density ρ(y). Throws DomainError at y = 0.
    double density(double y) const;

    /// Local exponent of ρ at 0 on one side: ρ(y) ~ |y|^{-1-a} as y -> 0.
    double side_alpha(Side side) const;

    /// ∫ |y|^k ρ(y) dy over lo < |y| <= hi on one side (hi may be +inf).
    /// Uses closed forms for Merton and Kou, adaptive quadrature otherwise.
    double side_moment(int k, double lo, double hi, Side side, double rel_tol = 1e-12) const;

    /// ∫ f(y) ρ(y) dy over lo < |y| <= hi on one side, f given in signed y.
    /// `power_at_zero` is the exponent p with f(y) ~ |y|^p as y -> 0 (used only when lo == 0).
    template <class F>
    double side_integral(F&& f, double lo, double hi, Side side, double power_at_zero,
                         double rel_tol = 1e-12) const;

    /// Signed moment ∫ y^k ν(dy) over lo < |y| <= hi, both sides.
    double moment(int k, double lo, double hi, double rel_tol = 1e-12) const;
    /// ∫ |y|^k ν(dy) over lo < |y| <= hi, both sides.
    double abs_moment(int k, double lo, double hi, double rel_tol = 1e-12) const;

    /// ∫ (e^y - 1 - y 1{|y|<=1}) ν(dy); the drift correction that makes e^X a
    /// discounted martingale. Infinite when the positive tail is too heavy.
    double exp_compensator() const;

    /// Smallest R with ∫_{|y|>R} (1 + |y|) ν(dy) <= tol (0 for family None).
    double truncation_radius(double tol = 1e-8) const;

private:
    double numeric_side_integral(const std::function<double(double)>& f, double lo, double hi,
                                 double power_at_zero, double rel_tol) const;

    LevyFamily family_ = LevyFamily::None;
    Params params_;
    double alpha_ = 0.0;
    double sing_const_ = 0.0;
    // Tempered-stable form used by VG and TS: c/|y|^{1+a} e^{-λ|y|} per side.
    double c_[2] = {0.0, 0.0};
    double a_[2] = {0.0, 0.0};
    double lam_[2] = {0.0, 0.0};
    double q_[4] = {0.0, 0.0, 0.0, 0.0};  // unpacked Merton/Kou/NIG parameters
};

/// Jump integrals consumed by the ε-split of the integral operator.
struct TailIntegrals {
    double eps = 0.0;
    double small_var = 0.0;     ///< ∫_{|y|<=ε} y² ν(dy)
    double comp_drift = 0.0;    ///< ∫_{ε<|y|<=1} y ν(dy)
    double big_mass = 0.0;      ///< ∫_{|y|>1} ν(dy)
    double big_mean_abs = 0.0;  ///< ∫_{|y|>1} |y| ν(dy)
    double big_mean = 0.0;      ///< ∫_{|y|>1} y ν(dy)
    std::optional<double> fv_drift_value;  ///< ∫_{|y|<=1} y ν(dy), present iff α < 1

    /// Throws UnsupportedOperation when jumps have infinite variation.
    double fv_drift() const;
};

/// Computes every TailIntegrals field at split level ε in (0, 1].
TailIntegrals tails(const LevyModel& model, double eps, double rel_tol = 1e-10);

/// ∫_{|y|<=ε} y² ν(dy) alone.
double small_var(const LevyModel& model, double eps, double rel_tol = 1e-12);

/// Singularity exponent α (2β for subordinated Brownian motions).
inline double singularity_exponent(const LevyModel& model) { return model.alpha(); }

// ---------------------------------------------------------------------------

template <class F>
double LevyModel::side_integral(F&& f, double lo, double hi, Side side, double power_at_zero,
                                double rel_tol) const {
    if (family_ == LevyFamily::None) return 0.0;
    const double sgn = side == Side::Positive ? 1.0 : -1.0;
    // Far out the density underflows first; skip f there so inf * 0 cannot occur.
    std::function<double(double)> g = [&](double m) {
        const double d = density(sgn * m);
        return d == 0.0 ? 0.0 : f(sgn * m) * d;
    };
    return numeric_side_integral(g, lo, hi, power_at_zero - 1.0 - side_alpha(side), rel_tol);
}

}  // namespace levystop
