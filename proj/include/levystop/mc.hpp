#pragma once

#include <cstdint>
#include <vector>

#include "levystop/grid.hpp"
#include "levystop/levy.hpp"
#include "levystop/payoff.hpp"

namespace levystop {

struct McOptions {
    /// Jumps with |y| <= eps_mc become a Gaussian of variance small_var(eps_mc)
    /// per unit time. Negative: 0 for finite-activity families, 0.01 otherwise.
    double eps_mc = -1.0;
    /// Largest admissible big-jump intensity ∫_{|y|>eps_mc} ν.
    double intensity_cap = 1e4;
    /// Separates independent batches drawn with the same seed.
    std::uint64_t batch = 0;
};

/// Euler paths of dX = b dt + √(2a) dW + dJ on n_steps equal steps, with
/// the discount factor exp(-∫ r dt) carried along each path.
struct PathBatch {
    int n_paths = 0;
    int n_steps = 0;
    double T = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t batch = 0;
    double eps_mc = 0.0;
    double small_var_mc = 0.0;
    double jump_intensity = 0.0;
    std::vector<double> states;      // [path][step], n_steps + 1 per path
    std::vector<double> discounts;   // same layout
    std::vector<std::uint32_t> jump_counts;

    double x(int path, int step) const { return states[idx(path, step)]; }
    double discount(int path, int step) const { return discounts[idx(path, step)]; }
    double dt() const { return T / n_steps; }

private:
    std::size_t idx(int p, int s) const {
        return static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(s);
    }
};

/// Throws ParameterError for n_paths or n_steps < 1, and when the big-jump
/// intensity exceeds the cap (the message suggests a larger eps_mc).
PathBatch simulate(const LevyModel& m, const CoefficientField& c, double x0, double T, int n_paths, int n_steps,
                   std::uint64_t seed, const McOptions& opt = {});

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error of the discounted payoff at T.
McEstimate european_estimate(const PathBatch& batch, const PayoffSpec& g);

struct PolicyEstimate {
    double price = 0.0;
    double std_error = 0.0;
    /// True when some exercise date had too few in-the-money paths or a
    /// rank-deficient regression; those dates never exercise.
    bool degenerate = false;
};

/// Value of the least-squares (polynomial, `degree`) exercise policy fitted
/// on `fit` and evaluated on the independent batch `eval`, over the dates
/// of the batches. Any policy is admissible, so this bounds the American
/// value from below up to Monte Carlo error.
PolicyEstimate stopping_lower_bound(const PathBatch& fit, const PathBatch& eval, const PayoffSpec& g, int degree = 3);

}  // namespace levystop
