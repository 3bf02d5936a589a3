#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace levystop {

enum class PayoffKind { Put, CappedCall, Custom };

std::string_view to_string(PayoffKind k);
PayoffKind payoff_kind_from_string(std::string_view name);

/// A bounded, Lipschitz, semiconvex obstacle g on the log-price axis with
///   0 <= g <= K,   |g'| <= L,   g'' >= -J  (distributionally).
/// A spec may carry a mollification width; eval() then returns g ⋆ η_ε.
class PayoffSpec {
public:
    /// (strike - e^x)^+. K = L = J = strike.
    static PayoffSpec put(double strike);

    /// min((e^x - strike)^+, cap - strike) with the cap corner replaced by a
    /// parabola of curvature -J so that g'' >= -J holds.
    static PayoffSpec capped_call(double strike, double cap, double curvature);

    /// Monotone cubic (PCHIP) through (x_i, g_i), flat beyond the data.
    static PayoffSpec custom(std::vector<double> x, std::vector<double> g);
    /// Two-column CSV (x, g) with strictly increasing x; '#' lines and a
    /// non-numeric header row are skipped.
    static PayoffSpec custom_from_csv(const std::string& path);

    PayoffKind kind() const { return kind_; }
    double K_bound() const { return k_bound_; }
    double L_lip() const { return l_lip_; }
    double J_semi() const { return j_semi_; }
    /// Mollification width, 0 for the raw obstacle.
    double eps() const { return eps_; }
    /// Strike for Put and CappedCall, NaN for Custom.
    double strike() const { return strike_; }

    double eval(double x) const;
    double operator()(double x) const { return eval(x); }
    /// g'(x), a.e. for the raw obstacle.
    double derivative(double x) const;

    /// Points where the raw obstacle is not C².
    const std::vector<double>& kinks() const { return kinks_; }

    /// g ⋆ η_ε with the same K, L, J. ε must lie in (0, 1).
    PayoffSpec mollify(double eps) const;
    /// The underlying unmollified obstacle.
    PayoffSpec raw() const;

private:
    struct Custom;

    double raw_eval(double x) const;
    double raw_derivative(double x) const;

    PayoffKind kind_ = PayoffKind::Put;
    double strike_ = 1.0;
    double cap_ = 0.0;
    // CappedCall corner: e^x - strike up to x1, parabola on [x1, x2], flat after.
    double x1_ = 0.0, x2_ = 0.0;
    double k_bound_ = 1.0, l_lip_ = 1.0, j_semi_ = 1.0;
    double eps_ = 0.0;
    std::vector<double> kinks_;
    std::shared_ptr<const Custom> custom_;
};

}  // namespace levystop
