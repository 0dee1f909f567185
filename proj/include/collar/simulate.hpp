#pragma once

#include <cstdint>
#include <vector>

#include "collar/fourier.hpp"
#include "collar/model.hpp"
#include "collar/numerics.hpp"

namespace collar {

struct SimSpec {
    long n_paths = 100000;
    int steps_per_year = 500;
    std::uint64_t seed = 1;
    enum class Measure { physical, benchmarked_q } measure = Measure::physical;
    bool antithetic = false;
};

// Snapshots of the (ln zeta, pi) state under the benchmarked measure Q.
struct QSnapshot {
    double t_mid = 0.0;
    std::vector<double> ln_zeta_mid, pi_mid;
    std::vector<double> ln_zeta_end, pi_end;
};
QSnapshot simulate_q(const Config& cfg, const SimSpec& spec, double t_mid);

struct MgfEstimate {
    cplx mean{};
    double se_re = 0.0, se_im = 0.0;  // block jackknife standard errors
};
// Monte Carlo estimate of E^Q[zeta_T^z] from the initial state.
MgfEstimate estimate_mgf(const Config& cfg, cplx z, const SimSpec& spec);

// Physical-measure ensemble with the latent market price of risk simulated
// alongside the filter (X_0 drawn from the prior). Used for the statistical
// filter/martingale checks.
struct LatentEnsemble {
    double t_mid = 0.0, t_end = 0.0;
    std::vector<double> innovation_end;            // I_T per path
    std::vector<double> sq_err_mid, sq_err_end;    // (X - pi)^2
    std::vector<double> xi_y_mid, xi_y_end;        // xi * Y (theta = beta wealth)
    std::vector<double> zeta_identity_gap;         // relative gap of zeta vs xi*Y^gamma
};
LatentEnsemble simulate_latent(const Config& cfg, const SimSpec& spec);

struct BudgetReport {
    double mean = 0.0;  // sample mean of xi_T * W_T
    double se = 0.0;
};
// Budget closed loop: simulates the observation-filtration dynamics under the
// physical measure and prices the calibrated terminal wealth.
BudgetReport budget_check(const Config& cfg, const FourierEngine& engine,
                          const SimSpec& spec);

struct ReplicationReport {
    double rms = 0.0;
    double max_abs = 0.0;
    double median_abs = 0.0;  // robust to the heavy-tailed errors of paths
                              // that finish near a payoff kink
    long n_paths = 0;
    int steps_per_year = 0;
};
// Trades the optimal strategy along simulated paths and compares terminal
// wealth with Y_T * V_T(zeta_T) pathwise. Increments are drawn at
// steps_per_year * fine_multiple and aggregated, so runs at different
// resolutions share Brownian paths and the self-convergence ratio measures
// the discretization order rather than sampling noise.
ReplicationReport replicate_strategy(const Config& cfg, const FourierEngine& engine,
                                     const SimSpec& spec, int fine_multiple = 1);

}  // namespace collar
