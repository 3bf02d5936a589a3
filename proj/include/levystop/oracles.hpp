#pragma once

#include "levystop/levy.hpp"

namespace levystop::oracle {

/// Drift b of X = log S that makes e^{-(r-q)t} S a martingale when the
/// local part is a ∂²ₓ + b ∂ₓ (so σ² = 2a) and jumps follow `model`.
double risk_neutral_drift(const LevyModel& model, double r, double a, double q = 0.0);

/// Black–Scholes European put and call on spot S.
double bs_put(double S, double K, double T, double r, double q, double sigma);
double bs_call(double S, double K, double T, double r, double q, double sigma);

/// Merton jump-diffusion European put as a Poisson mixture of Black–Scholes
/// prices with lognormal jumps N(mu, delta²) at rate lambda.
double merton_put(double S, double K, double T, double r, double sigma, double lambda, double mu, double delta,
                  int terms = 50);

/// Cox–Ross–Rubinstein binomial American put.
double crr_american_put(double S, double K, double T, double r, double q, double sigma, int steps = 5000);

}  // namespace levystop::oracle
