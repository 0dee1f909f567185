#include "collar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "collar/concavify.hpp"
#include "collar/riccati.hpp"

namespace collar {

namespace {

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_id) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(path_id + 1)));
}

// Q-measure drift of ln zeta as a function of the filter mean.
double ln_zeta_drift_q(const ModelParams& m, double gamma, double pi) {
    const double v = gamma * m.beta * m.sigma - pi;
    return m.r * (gamma - 1.0) + 0.5 * gamma * (gamma + 1.0) * m.beta * m.beta * m.sigma * m.sigma -
           (gamma + 1.0) * m.beta * m.sigma * pi + pi * pi - 0.5 * v * v;
}

// Grouped (delete-block) jackknife standard error of a sample mean.
double jackknife_se(const std::vector<double>& xs, int blocks = 100) {
    const auto n = static_cast<long>(xs.size());
    if (n < 2) return 0.0;
    const int nb = static_cast<int>(std::min<long>(blocks, n));
    double total = 0.0;
    for (double x : xs) total += x;
    std::vector<double> leave_out(static_cast<std::size_t>(nb));
    double jk_mean = 0.0;
    for (int b = 0; b < nb; ++b) {
        const long lo = n * b / nb, hi = n * (b + 1) / nb;
        double s = 0.0;
        for (long i = lo; i < hi; ++i) s += xs[static_cast<std::size_t>(i)];
        leave_out[static_cast<std::size_t>(b)] = (total - s) / static_cast<double>(n - (hi - lo));
        jk_mean += leave_out[static_cast<std::size_t>(b)];
    }
    jk_mean /= nb;
    double ss = 0.0;
    for (double v : leave_out) ss += (v - jk_mean) * (v - jk_mean);
    return std::sqrt((nb - 1.0) / nb * ss);
}

}  // namespace

QSnapshot simulate_q(const Config& cfg, const SimSpec& spec, double t_mid) {
    const auto& m = cfg.model;
    const double gamma = cfg.util.gamma;
    const double T = cfg.init.horizon_T;
    const int n_steps = std::max(1, static_cast<int>(std::llround(spec.steps_per_year * T)));
    const double dt = T / n_steps;
    const double sq_dt = std::sqrt(dt);
    const int mid_idx = std::clamp(static_cast<int>(std::llround(t_mid / dt)), 0, n_steps);
    const VariancePath vp(m, cfg.init.r0, T);

    QSnapshot snap;
    snap.t_mid = mid_idx * dt;
    snap.ln_zeta_mid.resize(static_cast<std::size_t>(spec.n_paths));
    snap.pi_mid.resize(static_cast<std::size_t>(spec.n_paths));
    snap.ln_zeta_end.resize(static_cast<std::size_t>(spec.n_paths));
    snap.pi_end.resize(static_cast<std::size_t>(spec.n_paths));
    const double ln_zeta0 = gamma * std::log(cfg.init.w0);

#pragma omp parallel for schedule(static)
    for (long p = 0; p < spec.n_paths; ++p) {
        const std::uint64_t stream = spec.antithetic ? static_cast<std::uint64_t>(p) / 2
                                                     : static_cast<std::uint64_t>(p);
        const double sign = (spec.antithetic && (p & 1)) ? -1.0 : 1.0;
        auto rng = path_rng(spec.seed, stream);
        std::normal_distribution<double> nd;
        double pi = cfg.init.pi0, ln_zeta = ln_zeta0;
        for (int i = 0; i < n_steps; ++i) {
            if (i == mid_idx) {
                snap.ln_zeta_mid[static_cast<std::size_t>(p)] = ln_zeta;
                snap.pi_mid[static_cast<std::size_t>(p)] = pi;
            }
            const double t = i * dt;
            const double k = vp.k(t);
            const double dw = sign * nd(rng) * sq_dt;
            ln_zeta += ln_zeta_drift_q(m, gamma, pi) * dt + (gamma * m.beta * m.sigma - pi) * dw;
            pi += (m.lambda * (m.x_bar - pi) + k * (m.beta * m.sigma - pi)) * dt + k * dw;
        }
        if (mid_idx == n_steps) {
            snap.ln_zeta_mid[static_cast<std::size_t>(p)] = ln_zeta;
            snap.pi_mid[static_cast<std::size_t>(p)] = pi;
        }
        snap.ln_zeta_end[static_cast<std::size_t>(p)] = ln_zeta;
        snap.pi_end[static_cast<std::size_t>(p)] = pi;
    }
    return snap;
}

MgfEstimate estimate_mgf(const Config& cfg, cplx z, const SimSpec& spec) {
    const auto snap = simulate_q(cfg, spec, cfg.init.horizon_T);
    std::vector<double> re(snap.ln_zeta_end.size()), im(snap.ln_zeta_end.size());
    for (std::size_t p = 0; p < snap.ln_zeta_end.size(); ++p) {
        const cplx v = std::exp(z * snap.ln_zeta_end[p]);
        re[p] = v.real();
        im[p] = v.imag();
    }
    MgfEstimate est;
    double sr = 0.0, si = 0.0;
    for (std::size_t p = 0; p < re.size(); ++p) {
        sr += re[p];
        si += im[p];
    }
    est.mean = cplx{sr / static_cast<double>(re.size()), si / static_cast<double>(im.size())};
    est.se_re = jackknife_se(re);
    est.se_im = jackknife_se(im);
    return est;
}

LatentEnsemble simulate_latent(const Config& cfg, const SimSpec& spec) {
    const auto& m = cfg.model;
    const double gamma = cfg.util.gamma;
    const double T = cfg.init.horizon_T;
    const int n_steps = std::max(1, static_cast<int>(std::llround(spec.steps_per_year * T)));
    const double dt = T / n_steps;
    const double sq_dt = std::sqrt(dt);
    const int mid_idx = n_steps / 2;
    const VariancePath vp(m, cfg.init.r0, T);

    LatentEnsemble ens;
    ens.t_mid = mid_idx * dt;
    ens.t_end = T;
    const auto np = static_cast<std::size_t>(spec.n_paths);
    ens.innovation_end.resize(np);
    ens.sq_err_mid.resize(np);
    ens.sq_err_end.resize(np);
    ens.xi_y_mid.resize(np);
    ens.xi_y_end.resize(np);
    ens.zeta_identity_gap.resize(np);

#pragma omp parallel for schedule(static)
    for (long p = 0; p < spec.n_paths; ++p) {
        auto rng = path_rng(spec.seed, static_cast<std::uint64_t>(p));
        std::normal_distribution<double> nd;
        double x = cfg.init.pi0 + std::sqrt(cfg.init.r0) * nd(rng);  // prior draw
        double pi = cfg.init.pi0;
        double ln_y = std::log(cfg.init.w0), ln_xi = 0.0, ln_zeta = gamma * std::log(cfg.init.w0);
        double innov = 0.0;
        const double rho_c = std::sqrt(std::max(0.0, 1.0 - m.rho * m.rho));
        for (int i = 0; i < n_steps; ++i) {
            const auto idx = static_cast<std::size_t>(p);
            if (i == mid_idx) {
                ens.sq_err_mid[idx] = (x - pi) * (x - pi);
                ens.xi_y_mid[idx] = std::exp(ln_xi + ln_y);
            }
            const double t = i * dt;
            const double k = vp.k(t);
            const double dzs = nd(rng) * sq_dt;
            const double dzp = nd(rng) * sq_dt;
            const double d_innov = dzs + (x - pi) * dt;  // observation surprise
            innov += d_innov;
            ln_y += (m.r + m.beta * m.sigma * pi - 0.5 * m.beta * m.beta * m.sigma * m.sigma) * dt +
                    m.beta * m.sigma * d_innov;
            ln_xi += (-m.r - 0.5 * pi * pi) * dt - pi * d_innov;
            ln_zeta += (-m.r - 0.5 * pi * pi + gamma * (m.r + m.beta * m.sigma * pi -
                         0.5 * m.beta * m.beta * m.sigma * m.sigma)) * dt +
                       (gamma * m.beta * m.sigma - pi) * d_innov;
            pi += -m.lambda * (pi - m.x_bar) * dt + k * d_innov;
            x += -m.lambda * (x - m.x_bar) * dt + m.sigma_x * (m.rho * dzs + rho_c * dzp);
        }
        const auto idx = static_cast<std::size_t>(p);
        ens.innovation_end[idx] = innov;
        ens.sq_err_end[idx] = (x - pi) * (x - pi);
        ens.xi_y_end[idx] = std::exp(ln_xi + ln_y);
        ens.zeta_identity_gap[idx] =
            std::abs(std::exp(ln_zeta) - std::exp(ln_xi + gamma * ln_y)) /
            std::exp(ln_xi + gamma * ln_y);
    }
    return ens;
}

BudgetReport budget_check(const Config& cfg, const FourierEngine& engine,
                          const SimSpec& spec) {
    const auto& m = cfg.model;
    const double gamma = cfg.util.gamma;
    const double T = cfg.init.horizon_T;
    const int n_steps = std::max(1, static_cast<int>(std::llround(spec.steps_per_year * T)));
    const double dt = T / n_steps;
    const double sq_dt = std::sqrt(dt);
    const VariancePath vp(m, cfg.init.r0, T);
    const auto& payoff = engine.payoff();

    std::vector<double> vals(static_cast<std::size_t>(spec.n_paths));
#pragma omp parallel for schedule(static)
    for (long p = 0; p < spec.n_paths; ++p) {
        const std::uint64_t stream = spec.antithetic ? static_cast<std::uint64_t>(p) / 2
                                                     : static_cast<std::uint64_t>(p);
        const double sign = (spec.antithetic && (p & 1)) ? -1.0 : 1.0;
        auto rng = path_rng(spec.seed, stream);
        std::normal_distribution<double> nd;
        double pi = cfg.init.pi0;
        double ln_y = std::log(cfg.init.w0), ln_xi = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const double t = i * dt;
            const double k = vp.k(t + 0.5 * dt);
            const double d_innov = sign * nd(rng) * sq_dt;
            // Strong-order-1 stepping: the terminal payoff has a jump in
            // zeta, so the plain Euler scheme's O(sqrt(dt)) pathwise error
            // would bias the mean through jump-crossing misclassification.
            // Within the step pi_s ~ pi + k (I_s - I_n); integrating the
            // pi-dependent terms against that linearization gives the
            // Milstein term for the pi dI integral and conditional-mean
            // corrections for the pi dt integrals.
            const double iota = 0.5 * d_innov * dt;            // ~ int (I_s - I_n) ds
            const double mil = 0.5 * (d_innov * d_innov - dt); // = int (I_s - I_n) dI_s
            ln_y += (m.r + m.beta * m.sigma * pi - 0.5 * m.beta * m.beta * m.sigma * m.sigma) * dt +
                    m.beta * m.sigma * d_innov + m.beta * m.sigma * k * iota;
            ln_xi += (-m.r - 0.5 * pi * pi) * dt - pi * d_innov - k * mil - pi * k * iota;
            pi += -m.lambda * (pi - m.x_bar) * dt + k * d_innov - m.lambda * k * iota;
        }
        const double zeta_T = std::exp(ln_xi + gamma * ln_y);
        const double v_T = terminal_wealth(payoff, cfg.schedule, cfg.util, zeta_T);
        vals[static_cast<std::size_t>(p)] = std::exp(ln_xi + ln_y) * v_T;
    }
    BudgetReport rep;
    double s = 0.0;
    for (double v : vals) s += v;
    rep.mean = s / static_cast<double>(vals.size());
    rep.se = jackknife_se(vals);
    return rep;
}

ReplicationReport replicate_strategy(const Config& cfg, const FourierEngine& engine,
                                     const SimSpec& spec, int fine_multiple) {
    const auto& m = cfg.model;
    const double gamma = cfg.util.gamma;
    const double T = cfg.init.horizon_T;
    const int n_steps = std::max(1, static_cast<int>(std::llround(spec.steps_per_year * T)));
    const double dt = T / n_steps;
    const double dt_f = dt / fine_multiple;
    const double sq_dt_f = std::sqrt(dt_f);
    const VariancePath& vp = engine.variance();
    const auto np = static_cast<std::size_t>(spec.n_paths);
    const auto ns = static_cast<std::size_t>(n_steps);

    // Pass 1: state paths (strategy-independent) and their increments.
    std::vector<double> ln_zetas(np * ns), pis(np * ns), d_innovs(np * ns);
    std::vector<double> ln_y_T(np), ln_zeta_T(np);
#pragma omp parallel for schedule(static)
    for (long p = 0; p < spec.n_paths; ++p) {
        auto rng = path_rng(spec.seed, static_cast<std::uint64_t>(p));
        std::normal_distribution<double> nd;
        double pi = cfg.init.pi0;
        double ln_y = std::log(cfg.init.w0), ln_xi = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const auto idx = static_cast<std::size_t>(p) * ns + static_cast<std::size_t>(i);
            ln_zetas[idx] = ln_xi + gamma * ln_y;
            pis[idx] = pi;
            double d_innov = 0.0;
            for (int f = 0; f < fine_multiple; ++f) d_innov += nd(rng) * sq_dt_f;
            d_innovs[idx] = d_innov;
            const double t = i * dt;
            const double k = vp.k(t);
            ln_y += (m.r + m.beta * m.sigma * pi - 0.5 * m.beta * m.beta * m.sigma * m.sigma) * dt +
                    m.beta * m.sigma * d_innov;
            ln_xi += (-m.r - 0.5 * pi * pi) * dt - pi * d_innov;
            pi += -m.lambda * (pi - m.x_bar) * dt + k * d_innov;
        }
        ln_y_T[static_cast<std::size_t>(p)] = ln_y;
        ln_zeta_T[static_cast<std::size_t>(p)] = ln_xi + gamma * ln_y;
    }

    // Pass 2: the strategy at every (path, step). For the general collar the
    // Riccati contour states are streamed backward across the simulation's own
    // step times, so no dense coefficient tables are ever materialized.
    std::vector<double> thetas(np * ns);
    if (engine.degenerate()) {
#pragma omp parallel for schedule(static)
        for (long p = 0; p < spec.n_paths; ++p)
            for (int i = 0; i < n_steps; ++i) {
                const auto idx = static_cast<std::size_t>(p) * ns + static_cast<std::size_t>(i);
                const double t = i * dt;
                const auto pr = engine.value_and_partials(t, std::exp(ln_zetas[idx]), pis[idx]);
                thetas[idx] = m.beta +
                              (pr.dv_dzeta * std::exp(ln_zetas[idx]) *
                                   (gamma * m.beta * m.sigma - pis[idx]) +
                               pr.dv_dpi * vp.k(t)) /
                                  (m.sigma * pr.v);
            }
    } else {
        const int half = engine.half_nodes();
        std::vector<AbcState> states[2];
        states[0].assign(static_cast<std::size_t>(half) + 1, AbcState{});
        states[1].assign(static_cast<std::size_t>(half) + 1, AbcState{});
        for (int i = n_steps - 1; i >= 0; --i) {
            const double t_hi = (i + 1) * dt, t_lo = i * dt;
            for (int which = 0; which < 2; ++which) {
#pragma omp parallel for schedule(static)
                for (int j = 0; j <= half; ++j)
                    if (!riccati_step_back(m, cfg.util, vp, engine.contour_z(which, j), t_hi,
                                           t_lo, states[which][static_cast<std::size_t>(j)]))
                        throw NumericsError("replicate: Riccati blow-up on the contour");
            }
            // Envelope truncation: beyond j_eff the integrand is below 1e-15
            // of its peak for every path at this step.
            double pi_min = pis[static_cast<std::size_t>(i)], pi_max = pi_min;
            for (std::size_t p = 0; p < np; ++p) {
                const double v = pis[p * ns + static_cast<std::size_t>(i)];
                pi_min = std::min(pi_min, v);
                pi_max = std::max(pi_max, v);
            }
            int j_eff[2];
            for (int which = 0; which < 2; ++which) {
                const auto& f = engine.contour_f(which);
                double peak = 0.0;
                int last = 64;
                for (int j = 0; j <= half; ++j) {
                    const auto& st = states[which][static_cast<std::size_t>(j)];
                    const double ca = st.c.real();
                    double expo = st.a.real() +
                                  std::max(st.b.real() * pi_min + 0.5 * ca * pi_min * pi_min,
                                           st.b.real() * pi_max + 0.5 * ca * pi_max * pi_max);
                    if (ca < 0.0) {
                        const double vertex = -st.b.real() / ca;
                        if (vertex > pi_min && vertex < pi_max)
                            expo = std::max(expo, st.a.real() + st.b.real() * vertex +
                                                      0.5 * ca * vertex * vertex);
                    }
                    const double env = std::abs(f[static_cast<std::size_t>(j)]) * std::exp(expo);
                    peak = std::max(peak, env);
                    if (env > 1e-15 * peak) last = std::max(last, j);
                }
                j_eff[which] = std::min(last, half);
            }
            const double k = vp.k(t_lo);
            const double r_contour[2] = {engine.strips().r1, engine.strips().r4};
#pragma omp parallel for schedule(static)
            for (long p = 0; p < spec.n_paths; ++p) {
                const auto idx = static_cast<std::size_t>(p) * ns + static_cast<std::size_t>(i);
                const double ln_zeta = ln_zetas[idx], pi = pis[idx];
                double acc_v = 0.0, acc_dz = 0.0, acc_dp = 0.0;
                for (int which = 0; which < 2; ++which) {
                    const auto& f = engine.contour_f(which);
                    const double du = engine.du();
                    for (int j = 0; j <= j_eff[which]; ++j) {
                        const auto& st = states[which][static_cast<std::size_t>(j)];
                        const cplx z{r_contour[which], -j * du};
                        const cplx g = f[static_cast<std::size_t>(j)] *
                                       std::exp(z * ln_zeta + st.a + st.b * pi +
                                                0.5 * st.c * pi * pi);
                        const double w = (j == 0 || j == half) ? 1.0 : 2.0;
                        acc_v += w * g.real();
                        acc_dz += w * (g * z).real();
                        acc_dp += w * (g * (st.b + st.c * pi)).real();
                    }
                }
                if (!(acc_v > 0.0))
                    throw NumericsError("replicate: non-positive value along a path");
                thetas[idx] = m.beta + (acc_dz * (gamma * m.beta * m.sigma - pi) + acc_dp * k) /
                                           (m.sigma * acc_v);
            }
        }
    }

    // Pass 3: wealth accumulation and the pathwise comparison.
    ReplicationReport rep;
    rep.n_paths = spec.n_paths;
    rep.steps_per_year = spec.steps_per_year;
    double sum_sq = 0.0, max_abs = 0.0;
    std::vector<double> abs_errs(np);
#pragma omp parallel for schedule(static) reduction(+ : sum_sq) reduction(max : max_abs)
    for (long p = 0; p < spec.n_paths; ++p) {
        double ln_w = std::log(cfg.init.w0);
        for (int i = 0; i < n_steps; ++i) {
            const auto idx = static_cast<std::size_t>(p) * ns + static_cast<std::size_t>(i);
            const double th = thetas[idx];
            const double pi = pis[idx];
            ln_w += (m.r + th * m.sigma * pi - 0.5 * th * th * m.sigma * m.sigma) * dt +
                    th * m.sigma * d_innovs[idx];
        }
        const double target =
            std::exp(ln_y_T[static_cast<std::size_t>(p)]) *
            terminal_wealth(engine.payoff(), cfg.schedule, cfg.util,
                            std::exp(ln_zeta_T[static_cast<std::size_t>(p)]));
        const double err = std::exp(ln_w) / target - 1.0;
        sum_sq += err * err;
        max_abs = std::max(max_abs, std::abs(err));
        abs_errs[static_cast<std::size_t>(p)] = std::abs(err);
    }
    rep.max_abs = max_abs;
    rep.rms = std::sqrt(sum_sq / static_cast<double>(spec.n_paths));
    const auto mid = abs_errs.begin() + static_cast<std::ptrdiff_t>(np / 2);
    std::nth_element(abs_errs.begin(), mid, abs_errs.end());
    rep.median_abs = *mid;
    return rep;
}

}  // namespace collar
