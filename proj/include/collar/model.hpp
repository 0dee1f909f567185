#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace collar {

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Market and latent-factor coefficients. The risky asset's drift is
// mu_t = r + sigma * X_t, where X mean-reverts to x_bar at speed lambda with
// volatility sigma_x and correlation rho against the stock's own noise.
struct ModelParams {
    double r = 0.0;        // risk-free rate (per year)
    double sigma = 0.0;    // stock volatility (> 0)
    double lambda = 0.0;   // mean-reversion speed of X (>= 0)
    double x_bar = 0.0;    // long-run mean of the market price of risk
    double sigma_x = 0.0;  // volatility of the market price of risk (>= 0)
    double rho = 0.0;      // correlation in [-1, 1]
    double beta = 0.0;     // benchmark's constant risky weight

    double drift(double x) const { return r + sigma * x; }
};

// Collar fund-flow schedule: flat at f_low below eta_low, linear with slope
// psi inside [eta_low, eta_high], flat at f_high above.
struct FlowSchedule {
    double f_low = 0.0;
    double psi = 0.0;
    double eta_low = 0.0;
    double eta_high = 0.0;

    double f_high() const { return f_low + psi * (eta_high - eta_low); }
    // Degenerate "flat collar": constant flow, no incentive kinks.
    bool flat() const { return psi * (eta_high - eta_low) == 0.0; }

    static FlowSchedule from_levels(double f_low, double f_high,
                                    double eta_low, double eta_high);
    static FlowSchedule from_slope(double f_low, double psi,
                                   double eta_low, double eta_high);
};

struct UtilityParams {
    double gamma = 0.0;  // relative risk aversion, > 0 and != 1
};

struct InitialConditions {
    double w0 = 1.0;         // initial wealth (> 0)
    double y0 = 1.0;         // initial benchmark value (forced equal to w0)
    double pi0 = 0.0;        // prior mean of the market price of risk
    double r0 = 0.0;         // prior variance (>= 0)
    double horizon_T = 1.0;  // terminal time in years (> 0)
};

struct Config {
    ModelParams model;
    FlowSchedule schedule;
    UtilityParams util;
    InitialConditions init;
};

double flow_rate(const FlowSchedule& s, double tracking_error);

// Power utility x^(1-gamma)/(1-gamma).
double utility(const UtilityParams& u, double x);

// Returns every violated invariant (empty when the configuration is valid).
std::vector<std::string> validate(const Config& cfg);

// Throws InvalidInput listing all violations.
Config validated_or_throw(Config cfg);

// Flat key=value file ('#' comments, blank lines ignored).
std::map<std::string, std::string> parse_kv_file(const std::string& path);

// Build and validate a Config from a key=value file. Recognized keys:
// r, sigma, lambda, x_bar, sigma_x, rho, beta, gamma,
// f_low, f_high or psi, eta_low, eta_high, w0, pi0, r0, horizon_T.
Config load_config(const std::string& path);

}  // namespace collar
