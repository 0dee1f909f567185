#pragma once

#include <vector>

#include "collar/fourier.hpp"

namespace collar {

// Constant optimal risky weight absent incentives: (1/gamma)(mu0 - r)/sigma^2
// with mu0 = r + sigma*pi0.
double merton_level(const ModelParams& m, const UtilityParams& u, double pi0);

// Optimal fraction of wealth in the risky asset:
// theta = beta + (dV/dzeta * zeta * (gamma*beta*sigma - pi) + dV/dpi * k_t) / (sigma * V).
double optimal_theta(const FourierEngine& e, double t, double zeta, double pi);

// The myopic manager believes the current estimate of the market price of
// risk is exact: same pipeline with a zero-variance prior (r0 = 0, sigma_x = 0).
Config myopic_config(Config cfg);

struct StrategyPoint {
    double t = 0.0;
    double zeta = 0.0;
    double relative_return = 0.0;  // ln V_t = R^W - R^Y (since Y_0 = W_0)
    double theta = 0.0;
    double theta_myopic = 0.0;
    double theta_merton = 0.0;
};

// Solves ln V(t, zeta, pi) = target for zeta (V is decreasing in zeta).
double zeta_for_relative_return(const FourierEngine& e, double t, double target,
                                double pi);

// Traces the optimal and myopic strategies over a relative-return range
// (both curves parameterized by their own zeta and re-coordinatized by ln V).
std::vector<StrategyPoint> strategy_curve(const FourierEngine& opt,
                                          const FourierEngine& myo,
                                          double t, double pi, double pi_myopic,
                                          int n_points, double span = 0.5);

}  // namespace collar
