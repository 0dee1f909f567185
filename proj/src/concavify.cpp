#include "collar/concavify.hpp"

#include <array>
#include <cmath>
#include <iostream>

#include "collar/numerics.hpp"

namespace collar {

namespace {

double q_mid(const FlowSchedule& s, double v) {
    return s.f_low + s.psi * (std::log(v) - s.eta_low);
}

}  // namespace

double objective_low(const FlowSchedule& s, const UtilityParams& u, double v) {
    return utility(u, v * s.f_low);
}

double objective_mid(const FlowSchedule& s, const UtilityParams& u, double v) {
    return utility(u, v * q_mid(s, v));
}

double objective_mid_deriv(const FlowSchedule& s, const UtilityParams& u, double v) {
    const double q = q_mid(s, v);
    return std::pow(v * q, -u.gamma) * (q + s.psi);
}

ConditionA condition_a(const FlowSchedule& s, const UtilityParams& u) {
    const double g = u.gamma;
    if (g <= 0.0 || g == 1.0) throw InvalidInput("condition_a: gamma must be positive and != 1");
    const double fh_psi = s.f_high() + s.psi;
    const double lhs = g / (1.0 - g) * std::pow(fh_psi / s.f_low, 1.0 - 1.0 / g) +
                       fh_psi / s.f_high() - 1.0 / (1.0 - g);
    return {lhs >= 0.0, lhs};
}

std::pair<double, double> tangent_bounds(const FlowSchedule& s, const UtilityParams& u) {
    if (condition_a(s, u).holds)
        throw InvalidInput("tangent_bounds: interior region is empty when condition A holds");
    // Two-equation double-tangency system: the chord from (V_l, U_low(V_l)) to
    // (V_u, U_mid(V_u)) has slope U_low'(V_l) = U_mid'(V_u).
    auto low_deriv = [&](double v) { return std::pow(v * s.f_low, -u.gamma) * s.f_low; };
    auto residual = [&](double vl, double vu, double& r0, double& r1) {
        const double sl = low_deriv(vl);
        r0 = sl - objective_mid_deriv(s, u, vu);
        r1 = sl * (vu - vl) - (objective_mid(s, u, vu) - objective_low(s, u, vl));
    };

    double vl = 0.8 * std::exp(s.eta_low), vu = 1.0;
    double r0, r1;
    residual(vl, vu, r0, r1);
    double norm = std::abs(r0) + std::abs(r1);
    for (int it = 0; it < 200 && norm > 1e-13; ++it) {
        // Finite-difference Jacobian.
        const double h0 = 1e-7 * vl, h1 = 1e-7 * vu;
        double a0, a1, b0, b1;
        residual(vl + h0, vu, a0, a1);
        residual(vl, vu + h1, b0, b1);
        const double j00 = (a0 - r0) / h0, j10 = (a1 - r1) / h0;
        const double j01 = (b0 - r0) / h1, j11 = (b1 - r1) / h1;
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0) throw NumericsError("tangent_bounds: singular Jacobian");
        const double dl = (j01 * r1 - j11 * r0) / det;
        const double du = (j10 * r0 - j00 * r1) / det;
        // Damped update keeping both iterates positive.
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            const double nl = vl + step * dl, nu = vu + step * du;
            if (nl > 0.0 && nu > 0.0 && q_mid(s, nu) > 0.0) {
                double t0, t1;
                residual(nl, nu, t0, t1);
                const double nnorm = std::abs(t0) + std::abs(t1);
                if (nnorm < norm || nnorm < 1e-13) {
                    vl = nl; vu = nu; r0 = t0; r1 = t1; norm = nnorm;
                    break;
                }
            }
            step *= 0.5;
            if (ls == 59)
                throw NumericsError("tangent_bounds: line search stalled at (" +
                                    std::to_string(vl) + ", " + std::to_string(vu) + ")");
        }
    }
    if (norm > 1e-9)
        throw NumericsError("tangent_bounds: no convergence; last iterate (" +
                            std::to_string(vl) + ", " + std::to_string(vu) + ")");
    if (!(vl < vu)) throw NumericsError("tangent_bounds: expected V_lower < V_upper");
    return {vl, vu};
}

ConcavifiedPayoff make_payoff(const FlowSchedule& s, const UtilityParams& u, double y) {
    if (y <= 0.0) throw InvalidInput("make_payoff: y must be positive");
    const double g = u.gamma;
    ConcavifiedPayoff p;
    p.y = y;
    p.zeta1 = std::pow(s.f_high(), 1.0 - g) * std::exp(-g * s.eta_high) / y;
    if (s.flat()) {
        // Constant flow: a single power branch, all thresholds coincide.
        p.zeta2 = p.zeta3 = p.zeta1;
        p.condition_a_holds = true;
        return p;
    }
    const auto cond = condition_a(s, u);
    p.condition_a_holds = cond.holds;
    if (cond.holds) {
        const double cap = std::pow(s.f_high() * std::exp(s.eta_high), 1.0 - g);
        auto gfun = [&](double zeta) {
            return (g * std::pow(y * zeta / s.f_low, 1.0 - 1.0 / g) - cap) / (1.0 - g) +
                   std::exp(s.eta_high) * y * zeta;
        };
        double a = p.zeta1 * (1.0 + 1e-12);
        double fa = gfun(a);
        double b = a, fb = fa;
        bool found = false;
        for (int i = 0; i < 60 && !found; ++i) {
            b *= 2.0;
            fb = gfun(b);
            if (std::isfinite(fb) && fa * fb <= 0.0) { found = true; break; }
            a = b;
            fa = fb;
        }
        if (!found)
            throw NumericsError("make_payoff: no sign change of g on (zeta1, 2^60 zeta1)");
        p.zeta3 = brent([&](double x) { return gfun(x); }, a, b, 1e-15 * b);
        p.zeta2 = p.zeta3;
        // The relevant root should be unique; scan onward and report otherwise.
        double prev = gfun(p.zeta3 * (1.0 + 1e-9));
        for (double x = p.zeta3 * 2.0; x < p.zeta3 * 1e6; x *= 4.0) {
            const double fx = gfun(x);
            if (std::isfinite(fx) && prev * fx < 0.0) {
                std::cerr << "make_payoff: additional sign change of g near zeta = " << x << "\n";
                break;
            }
            prev = fx;
        }
    } else {
        const auto [vl, vu] = tangent_bounds(s, u);
        p.v_lower = vl;
        p.v_upper = vu;
        p.zeta2 = std::pow(std::exp(s.eta_high) * s.f_high(), -g) * (s.f_high() + s.psi) / y;
        p.zeta3 = std::pow(s.f_low * vl, -g) * s.f_low / y;
    }
    return p;
}

double solve_h(const FlowSchedule& s, const UtilityParams& u, double y, double zeta) {
    const auto [vl, vu] = tangent_bounds(s, u);
    (void)vl;
    const double target = y * zeta;
    auto f = [&](double v) { return objective_mid_deriv(s, u, v) - target; };
    const double lo = vu * (1.0 + 1e-13), hi = std::exp(s.eta_high);
    return brent(f, lo, hi, 1e-15);
}

double terminal_wealth(const ConcavifiedPayoff& p, const FlowSchedule& s,
                       const UtilityParams& u, double zeta) {
    if (zeta <= 0.0) throw InvalidInput("terminal_wealth: zeta must be positive");
    const double g = u.gamma;
    if (zeta < p.zeta1)
        return std::pow(s.f_high(), 1.0 / g - 1.0) * std::pow(p.y, -1.0 / g) *
               std::pow(zeta, -1.0 / g);
    if (zeta < p.zeta2) return std::exp(s.eta_high);
    if (zeta < p.zeta3) return solve_h(s, u, p.y, zeta);
    return std::pow(s.f_low, 1.0 / g - 1.0) * std::pow(p.y, -1.0 / g) *
           std::pow(zeta, -1.0 / g);
}

}  // namespace collar
