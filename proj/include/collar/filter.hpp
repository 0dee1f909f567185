#pragma once

#include <vector>

#include "collar/model.hpp"

namespace collar {

// Deterministic conditional-variance path R_t of the latent market price of
// risk, solving dR/dt = sigma_x^2 - 2*lambda*R - (R + rho*sigma_x)^2 from R_0.
// Uses the closed form R_t = R_0/(R_0 t + 1) when lambda = sigma_x = 0,
// otherwise an adaptive embedded Runge-Kutta integration sampled onto a
// uniform grid (linear interpolation between nodes).
class VariancePath {
  public:
    VariancePath(const ModelParams& m, double r0, double horizon_T,
                 int grid_steps = 2000);

    double r_var(double t) const;
    // Filter gain k_t = R_t + rho*sigma_x: the loading of both the filter
    // mean and the Riccati coefficients on the innovation process.
    double k(double t) const;
    double horizon() const { return T_; }

  private:
    double rho_sigma_x_ = 0.0;
    double r0_ = 0.0;
    double T_ = 0.0;
    bool closed_form_ = false;
    std::vector<double> grid_vals_;  // uniform nodes when !closed_form_
    double dt_ = 0.0;
};

// R_0/(R_0 t + 1); valid only in the lambda = sigma_x = 0 configuration.
double variance_closed_form(const ModelParams& m, double r0, double t);

struct FilterState {
    double t = 0.0;
    double pi = 0.0;
    double r_var = 0.0;
};

// One Euler step of the filter mean against an innovation increment dI:
// dpi = -lambda (pi - x_bar) dt + k_t dI. The variance advances along the
// deterministic path.
FilterState filter_step(const FilterState& st, const ModelParams& m,
                        const VariancePath& vp, double d_innovation, double dt);

}  // namespace collar
