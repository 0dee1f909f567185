#pragma once

#include <optional>
#include <utility>

#include "collar/model.hpp"

namespace collar {

// Optimal terminal wealth relative to the benchmark, after concavifying the
// manager's non-concave objective u(V * f(ln V)). The map zeta -> V_T is
// piecewise: a power branch below zeta1, the flat cap exp(eta_high) on
// [zeta1, zeta2), the interior branch h(zeta) on [zeta2, zeta3), and a power
// branch from zeta3 on. It is continuous at zeta1 and zeta2 but genuinely
// JUMPS at zeta3 (by v_upper - v_lower when the interior branch is active):
// the chord region of the concavification is never attained.
struct ConcavifiedPayoff {
    double y = 0.0;  // Lagrange multiplier of the budget constraint
    double zeta1 = 0.0, zeta2 = 0.0, zeta3 = 0.0;
    bool condition_a_holds = false;
    std::optional<double> v_lower, v_upper;  // double-tangency bounds
};

struct ConditionA {
    bool holds = false;
    double lhs = 0.0;
};

// Sign condition deciding whether the interior branch h is needed:
// gamma/(1-gamma) ((f_H+psi)/f_L)^(1-1/gamma) + (f_H+psi)/f_H - 1/(1-gamma).
ConditionA condition_a(const FlowSchedule& s, const UtilityParams& u);

// Double-tangency bounds (V_lower, V_upper): the chord of the objective
// between them is tangent at both ends. Only defined when condition A fails.
std::pair<double, double> tangent_bounds(const FlowSchedule& s, const UtilityParams& u);

// Thresholds and tangency data for a given multiplier y (no calibration).
ConcavifiedPayoff make_payoff(const FlowSchedule& s, const UtilityParams& u, double y);

// Interior branch: solves (V q(V))^(-gamma) (q(V) + psi) = y zeta for V on
// (v_upper, exp(eta_high)], where q(V) = f_L + psi (ln V - eta_low).
double solve_h(const FlowSchedule& s, const UtilityParams& u, double y, double zeta);

double terminal_wealth(const ConcavifiedPayoff& p, const FlowSchedule& s,
                       const UtilityParams& u, double zeta);

// Objective pieces used by the tangency construction (exposed for tests).
double objective_low(const FlowSchedule& s, const UtilityParams& u, double v);
double objective_mid(const FlowSchedule& s, const UtilityParams& u, double v);
double objective_mid_deriv(const FlowSchedule& s, const UtilityParams& u, double v);

}  // namespace collar
