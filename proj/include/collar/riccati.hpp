#pragma once

#include <vector>

#include "collar/filter.hpp"
#include "collar/model.hpp"
#include "collar/numerics.hpp"

namespace collar {

// Coefficients (A, B, C) of the exponentially affine moment generating
// function H(t, zeta, pi; z) = zeta^z exp(A + B pi + C pi^2 / 2) of ln zeta_T
// under the benchmarked measure, solved backward from A(T)=B(T)=C(T)=0.
struct RiccatiSolution {
    cplx z;
    std::vector<double> grid;  // ascending, grid.front()=0, grid.back()=T
    std::vector<cplx> a, b, c;
    bool blew_up = false;
    double blow_time = 0.0;

    // Linear interpolation between grid nodes (exact on nodes).
    void abc(double t, cplx& a_out, cplx& b_out, cplx& c_out) const;
};

struct AbcState {
    cplx a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0};
};

// Advances (A,B,C) backward from t_hi to t_lo with fixed-step RK4; the step
// count scales with |z| so strongly oscillatory exponents stay resolved.
// Returns false if the blow-up guard (|C| > 1e8) tripped.
bool riccati_step_back(const ModelParams& m, const UtilityParams& u,
                       const VariancePath& vp, cplx z, double t_hi, double t_lo,
                       AbcState& st, int min_substeps = 1);

RiccatiSolution solve_riccati(const ModelParams& m, const UtilityParams& u,
                              const VariancePath& vp, cplx z, int nsteps = 2000);

// Homogeneous companion system (constant coefficients in the filter variance):
// used as an independent cross-check of solve_riccati through the transform
// C = C0/(1 + C0 R_t / z), B = B0/(1 + C0 R_t / z).
struct HomogeneousSolution {
    cplx z;
    std::vector<double> grid;
    std::vector<cplx> b0, c0;
    bool blew_up = false;
    double blow_time = 0.0;
};

HomogeneousSolution solve_homogeneous(const ModelParams& m, const UtilityParams& u,
                                      cplx z, double horizon_T, int nsteps = 2000);

// Applies the transform above on the homogeneous solution's grid.
void homogeneous_to_direct(const HomogeneousSolution& hs, const VariancePath& vp,
                           std::vector<cplx>& b_out, std::vector<cplx>& c_out);

// Closed-form terminal-anchored coefficients for the lambda = sigma_x = 0
// model (pure estimation risk): the homogeneous companion system is linear
// with constant coefficients there, so B and C are rational in t and A is a
// smooth quadrature. Returns false when the configuration does not qualify.
bool riccati_learning_closed(const ModelParams& m, const UtilityParams& u,
                             double r0, cplx z, double t, double T, AbcState& st);

cplx eval_H(const RiccatiSolution& sol, double t, double zeta, double pi);

// Integrates the coefficient system from T down to the exact requested t
// (no grid interpolation); used where finite differences in t are taken.
cplx eval_H_exact(const ModelParams& m, const UtilityParams& u,
                  const VariancePath& vp, cplx z, double t, double zeta,
                  double pi, int nsteps = 2000);

}  // namespace collar
