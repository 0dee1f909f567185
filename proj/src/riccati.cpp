#include "collar/riccati.hpp"

#include <cmath>

namespace collar {

namespace {

constexpr double kBlowUpGuard = 1e8;

struct Rhs {
    const ModelParams& m;
    double gamma;
    const VariancePath& vp;
    cplx z;

    void operator()(double t, const AbcState& s, AbcState& d) const {
        const double k = vp.k(t);
        const cplx one_z = 1.0 + z;
        const cplx coupling = m.lambda * m.x_bar + (1.0 + z * gamma) * m.beta * m.sigma * k;
        const cplx src_b = z * (1.0 + z * gamma) * m.beta * m.sigma;
        d.c = -(k * k) * s.c * s.c + 2.0 * (m.lambda + one_z * k) * s.c - z * (z + 1.0);
        d.b = (m.lambda + one_z * k - k * k * s.c) * s.b - coupling * s.c + src_b;
        d.a = z * m.r * (1.0 - gamma) -
              0.5 * z * gamma * (1.0 + z * gamma) * m.beta * m.beta * m.sigma * m.sigma -
              0.5 * k * k * s.b * s.b - coupling * s.b - 0.5 * k * k * s.c;
    }
};

bool rk4_back(const Rhs& rhs, double t_hi, double t_lo, AbcState& st, int steps) {
    const double h = -(t_hi - t_lo) / steps;
    AbcState k1, k2, k3, k4, tmp;
    for (int i = 0; i < steps; ++i) {
        const double t = t_hi + i * h;
        rhs(t, st, k1);
        tmp = {st.a + 0.5 * h * k1.a, st.b + 0.5 * h * k1.b, st.c + 0.5 * h * k1.c};
        rhs(t + 0.5 * h, tmp, k2);
        tmp = {st.a + 0.5 * h * k2.a, st.b + 0.5 * h * k2.b, st.c + 0.5 * h * k2.c};
        rhs(t + 0.5 * h, tmp, k3);
        tmp = {st.a + h * k3.a, st.b + h * k3.b, st.c + h * k3.c};
        rhs(t + h, tmp, k4);
        st.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        st.b += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
        st.c += h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
        if (std::abs(st.c) > kBlowUpGuard) return false;
    }
    return true;
}

int substeps_for(cplx z, double span, int min_substeps) {
    const int osc = static_cast<int>(std::ceil(std::abs(z) * span / 0.15));
    return std::max({1, min_substeps, osc});
}

}  // namespace

bool riccati_step_back(const ModelParams& m, const UtilityParams& u,
                       const VariancePath& vp, cplx z, double t_hi, double t_lo,
                       AbcState& st, int min_substeps) {
    if (t_lo > t_hi) throw InvalidInput("riccati_step_back: t_lo must not exceed t_hi");
    if (t_lo == t_hi) return true;
    const Rhs rhs{m, u.gamma, vp, z};
    return rk4_back(rhs, t_hi, t_lo, st, substeps_for(z, t_hi - t_lo, min_substeps));
}

RiccatiSolution solve_riccati(const ModelParams& m, const UtilityParams& u,
                              const VariancePath& vp, cplx z, int nsteps) {
    const double T = vp.horizon();
    RiccatiSolution sol;
    sol.z = z;
    sol.grid.resize(static_cast<std::size_t>(nsteps) + 1);
    sol.a.assign(sol.grid.size(), cplx{});
    sol.b.assign(sol.grid.size(), cplx{});
    sol.c.assign(sol.grid.size(), cplx{});
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
        sol.grid[i] = T * static_cast<double>(i) / nsteps;

    AbcState st;
    for (int i = nsteps; i > 0; --i) {
        const double t_hi = sol.grid[static_cast<std::size_t>(i)];
        const double t_lo = sol.grid[static_cast<std::size_t>(i) - 1];
        if (!riccati_step_back(m, u, vp, z, t_hi, t_lo, st)) {
            sol.blew_up = true;
            sol.blow_time = t_lo;
            // Fill the unreached prefix with the last finite state.
            for (int j = i - 1; j >= 0; --j) {
                sol.a[static_cast<std::size_t>(j)] = st.a;
                sol.b[static_cast<std::size_t>(j)] = st.b;
                sol.c[static_cast<std::size_t>(j)] = st.c;
            }
            return sol;
        }
        sol.a[static_cast<std::size_t>(i) - 1] = st.a;
        sol.b[static_cast<std::size_t>(i) - 1] = st.b;
        sol.c[static_cast<std::size_t>(i) - 1] = st.c;
    }
    return sol;
}

void RiccatiSolution::abc(double t, cplx& a_out, cplx& b_out, cplx& c_out) const {
    const double T = grid.back();
    if (t <= 0.0) {
        a_out = a.front(); b_out = b.front(); c_out = c.front();
        return;
    }
    if (t >= T) {
        a_out = a.back(); b_out = b.back(); c_out = c.back();
        return;
    }
    const double s = t / T * static_cast<double>(grid.size() - 1);
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    a_out = a[i] * (1.0 - w) + a[i + 1] * w;
    b_out = b[i] * (1.0 - w) + b[i + 1] * w;
    c_out = c[i] * (1.0 - w) + c[i + 1] * w;
}

cplx eval_H(const RiccatiSolution& sol, double t, double zeta, double pi) {
    if (zeta <= 0.0) throw InvalidInput("eval_H: zeta must be positive");
    if (sol.blew_up && t <= sol.blow_time)
        throw NumericsError("eval_H: solution blew up at t = " + std::to_string(sol.blow_time));
    cplx a, b, c;
    sol.abc(t, a, b, c);
    return std::exp(sol.z * std::log(zeta) + a + b * pi + 0.5 * c * pi * pi);
}

cplx eval_H_exact(const ModelParams& m, const UtilityParams& u,
                  const VariancePath& vp, cplx z, double t, double zeta,
                  double pi, int nsteps) {
    if (zeta <= 0.0) throw InvalidInput("eval_H_exact: zeta must be positive");
    const double T = vp.horizon();
    if (t < 0.0 || t > T) throw InvalidInput("eval_H_exact: t outside [0, T]");
    AbcState st;
    const int min_sub = std::max(1, static_cast<int>(std::ceil(nsteps * (T - t) / T)));
    if (!riccati_step_back(m, u, vp, z, T, t, st, min_sub))
        throw NumericsError("eval_H_exact: blow-up during integration");
    return std::exp(z * std::log(zeta) + st.a + st.b * pi + 0.5 * st.c * pi * pi);
}

HomogeneousSolution solve_homogeneous(const ModelParams& m, const UtilityParams& u,
                                      cplx z, double horizon_T, int nsteps) {
    if (z == cplx{0.0, 0.0})
        throw InvalidInput("solve_homogeneous: z = 0 is excluded (transform divides by z)");
    HomogeneousSolution hs;
    hs.z = z;
    hs.grid.resize(static_cast<std::size_t>(nsteps) + 1);
    hs.b0.assign(hs.grid.size(), cplx{});
    hs.c0.assign(hs.grid.size(), cplx{});
    for (std::size_t i = 0; i < hs.grid.size(); ++i)
        hs.grid[i] = horizon_T * static_cast<double>(i) / nsteps;

    const double sx2 = m.sigma_x * m.sigma_x;
    const double rsx = m.rho * m.sigma_x;
    const cplx co = ((1.0 / z) * (1.0 - m.rho * m.rho) - m.rho * m.rho) * sx2;
    const cplx lin_c = 2.0 * (m.lambda + (1.0 + z) * rsx);
    const cplx coupling = m.lambda * m.x_bar + (1.0 + z * u.gamma) * m.beta * m.sigma * rsx;
    const cplx src_b = z * (1.0 + z * u.gamma) * m.beta * m.sigma;

    cplx b0{}, c0{};
    const double h = -horizon_T / nsteps;
    const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(z) * (-h) / 0.15)));
    const double hs_step = h / sub;
    auto d_c = [&](cplx c) { return co * c * c + lin_c * c - z * (z + 1.0); };
    auto d_b = [&](cplx b, cplx c) {
        return (m.lambda + (z + 1.0) * rsx + co * c) * b - coupling * c + src_b;
    };
    for (int i = nsteps; i > 0; --i) {
        for (int s = 0; s < sub; ++s) {
            const cplx kc1 = d_c(c0), kb1 = d_b(b0, c0);
            const cplx kc2 = d_c(c0 + 0.5 * hs_step * kc1), kb2 = d_b(b0 + 0.5 * hs_step * kb1, c0 + 0.5 * hs_step * kc1);
            const cplx kc3 = d_c(c0 + 0.5 * hs_step * kc2), kb3 = d_b(b0 + 0.5 * hs_step * kb2, c0 + 0.5 * hs_step * kc2);
            const cplx kc4 = d_c(c0 + hs_step * kc3), kb4 = d_b(b0 + hs_step * kb3, c0 + hs_step * kc3);
            c0 += hs_step / 6.0 * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4);
            b0 += hs_step / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
        }
        if (std::abs(c0) > kBlowUpGuard) {
            hs.blew_up = true;
            hs.blow_time = hs.grid[static_cast<std::size_t>(i) - 1];
            for (int j = i - 1; j >= 0; --j) {
                hs.b0[static_cast<std::size_t>(j)] = b0;
                hs.c0[static_cast<std::size_t>(j)] = c0;
            }
            return hs;
        }
        hs.b0[static_cast<std::size_t>(i) - 1] = b0;
        hs.c0[static_cast<std::size_t>(i) - 1] = c0;
    }
    return hs;
}

bool riccati_learning_closed(const ModelParams& m, const UtilityParams& u,
                             double r0, cplx z, double t, double T, AbcState& st) {
    if (m.lambda != 0.0 || m.sigma_x != 0.0) return false;
    if (t < 0.0 || t > T) throw InvalidInput("riccati_learning_closed: t outside [0, T]");
    const double g = u.gamma;
    const double bs = m.beta * m.sigma;
    const cplx zg1 = 1.0 + z * g;
    auto r_of = [&](double s) { return r0 / (r0 * s + 1.0); };
    auto bc_of = [&](double s, cplx& b, cplx& c) {
        const double tau = T - s;
        const cplx denom = 1.0 + (z + 1.0) * tau * r_of(s);
        c = z * (z + 1.0) * tau / denom;
        b = -z * zg1 * bs * tau / denom;
    };
    cplx b, c;
    bc_of(t, b, c);
    // A by quadrature of the non-oscillatory source. The source has a
    // boundary layer of width ~ 1/(|z| k) at s = T (where the b/c
    // denominator relaxes back to 1), so integrate in tau = T - s over
    // dyadically graded panels starting at the layer scale.
    static const auto gl = gauss_legendre(24);
    const cplx const_term = -z * m.r * (1.0 - g) + 0.5 * z * g * zg1 * bs * bs;
    const double span = T - t;
    cplx a{};
    if (span > 0.0) {
        const double layer = 1.0 / ((std::abs(z) + 1.0) * std::max(r_of(t), 1e-12));
        double tau_lo = 0.0;
        double tau_hi = std::min(span, 0.25 * layer);
        while (tau_lo < span) {
            for (int i = 0; i < 24; ++i) {
                const double tau = 0.5 * (tau_lo + tau_hi) + 0.5 * (tau_hi - tau_lo) * gl.nodes[i];
                const double w = 0.5 * (tau_hi - tau_lo) * gl.weights[i];
                const double s = T - tau;
                const double k = r_of(s);
                cplx bb, cc;
                bc_of(s, bb, cc);
                a += w * (const_term + 0.5 * k * k * (bb * bb + cc) + zg1 * bs * k * bb);
            }
            tau_lo = tau_hi;
            tau_hi = std::min(span, 2.0 * tau_hi);
        }
    }
    st.a = a;
    st.b = b;
    st.c = c;
    return true;
}

void homogeneous_to_direct(const HomogeneousSolution& hs, const VariancePath& vp,
                           std::vector<cplx>& b_out, std::vector<cplx>& c_out) {
    b_out.resize(hs.grid.size());
    c_out.resize(hs.grid.size());
    for (std::size_t i = 0; i < hs.grid.size(); ++i) {
        const cplx denom = 1.0 + hs.c0[i] * vp.r_var(hs.grid[i]) / hs.z;
        b_out[i] = hs.b0[i] / denom;
        c_out[i] = hs.c0[i] / denom;
    }
}

}  // namespace collar
