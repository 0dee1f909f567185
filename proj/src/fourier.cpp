#include "collar/fourier.hpp"

#include <algorithm>
#include <cmath>

#include "collar/riccati.hpp"

namespace collar {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTimeSnap = 1e-9;

// Mollifier scale for the terminal (t = T) inversion of the discontinuous
// payoff: Gaussian damping exp(-s^2 u^2 / 2) in frequency, equivalently a
// Gaussian smoothing of width s in log-zeta. s is far below the curve
// resolution anywhere a test point keeps a small log-distance from the
// payoff thresholds.
constexpr double kTerminalSigma = 2e-4;
constexpr double kTerminalDu = 0.02;

}  // namespace

StripChoice StripChoice::defaults(double gamma) {
    StripChoice s;
    const double anchor = -1.0 / gamma;
    s.r1 = anchor - 0.75;
    double off = 0.75;
    // Keep the shared contour of pieces 2-4 away from the u = 0 pole of the
    // cap piece's transform.
    while (std::abs(anchor + off) < 0.05) off += 0.1;
    s.r4 = anchor + off;
    s.r2 = s.r3 = s.r4;
    return s;
}

struct FourierEngine::Tables {
    Config cfg;
    VariancePath vp;
    StripChoice strips;
    QuadratureSpec quad;
    int riccati_steps = 0;
    bool degenerate = false;

    double du = 0.0;
    int half = 0;                // j = 0..half
    std::vector<double> times;   // ascending, all < T
    // rows[contour][row * (half+1) + j]
    std::vector<cplx> a[2], b[2], c[2];
    RiccatiSolution pow_sol;     // degenerate single-exponent path

    Tables(const Config& cfg_in, StripChoice strips_in, QuadratureSpec quad_in,
           int steps, std::vector<double> eval_times)
        : cfg(cfg_in),
          vp(cfg_in.model, cfg_in.init.r0, cfg_in.init.horizon_T, steps),
          strips(strips_in),
          quad(quad_in),
          riccati_steps(steps) {
        const double T = cfg.init.horizon_T;
        const double gamma = cfg.util.gamma;
        degenerate = cfg.schedule.flat();
        if (degenerate) {
            pow_sol = solve_riccati(cfg.model, cfg.util, vp, cplx{-1.0 / gamma, 0.0}, steps);
            if (pow_sol.blew_up)
                throw NumericsError("fourier: single-exponent solution blew up");
            return;
        }

        // Validate the strips: the coefficient system must stay finite at the
        // real contour anchors; on blow-up shrink the offset toward -1/gamma.
        auto validated = [&](double anchor, double off, int sign) {
            for (int tries = 0; tries < 6; ++tries) {
                const double r = anchor + sign * off;
                auto sol = solve_riccati(cfg.model, cfg.util, vp, cplx{r, 0.0},
                                         std::max(200, steps / 10));
                if (!sol.blew_up) return r;
                off *= 0.5;
            }
            throw NumericsError("fourier: no admissible strip found");
        };
        const double anchor = -1.0 / gamma;
        strips.r1 = validated(anchor, anchor - strips.r1, -1);
        strips.r4 = validated(anchor, strips.r4 - anchor, +1);
        strips.r2 = strips.r3 = strips.r4;

        du = 2.0 * quad.u_max / quad.nodes;
        half = quad.nodes / 2;

        std::sort(eval_times.begin(), eval_times.end());
        eval_times.erase(std::unique(eval_times.begin(), eval_times.end()), eval_times.end());
        for (double t : eval_times)
            if (t < 0.0 || t >= T - kTimeSnap)
                throw InvalidInput("fourier: tabulated times must lie in [0, T)");
        times = eval_times;

        const auto rows = times.size();
        for (int which = 0; which < 2; ++which) {
            a[which].assign(rows * (half + 1), cplx{});
            b[which].assign(rows * (half + 1), cplx{});
            c[which].assign(rows * (half + 1), cplx{});
        }
        const double contour_r[2] = {strips.r1, strips.r4};
        const bool closed =
            cfg.model.lambda == 0.0 && cfg.model.sigma_x == 0.0;
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j <= half; ++j) {
            for (int which = 0; which < 2; ++which) {
                const cplx z{contour_r[which], -j * du};
                if (closed) {
                    for (std::size_t rr = 0; rr < rows; ++rr) {
                        AbcState st;
                        if (!riccati_learning_closed(cfg.model, cfg.util, cfg.init.r0,
                                                     z, times[rr], T, st))
                            throw NumericsError("fourier: closed-form coefficients failed");
                        const auto off = rr * (half + 1) + static_cast<std::size_t>(j);
                        a[which][off] = st.a;
                        b[which][off] = st.b;
                        c[which][off] = st.c;
                    }
                    continue;
                }
                AbcState st;
                double t_hi = T;
                for (std::size_t rr = rows; rr-- > 0;) {
                    const double t_lo = times[rr];
                    const int min_sub = std::max(
                        1, static_cast<int>(std::ceil(riccati_steps * (t_hi - t_lo) / T)));
                    if (!riccati_step_back(cfg.model, cfg.util, vp, z, t_hi, t_lo, st, min_sub))
                        throw NumericsError("fourier: Riccati blow-up on the contour");
                    const auto off = rr * (half + 1) + static_cast<std::size_t>(j);
                    a[which][off] = st.a;
                    b[which][off] = st.b;
                    c[which][off] = st.c;
                    t_hi = t_lo;
                }
            }
        }
    }

    std::size_t row_of(double t) const {
        for (std::size_t rr = 0; rr < times.size(); ++rr)
            if (std::abs(times[rr] - t) <= kTimeSnap) return rr;
        throw NumericsError("fourier: time not tabulated: " + std::to_string(t));
    }
};

struct FourierEngine::TerminalCache {
    double du = kTerminalDu;
    int half = 0;
    std::vector<cplx> f1, f4;  // closed-form phi-hats with the mollifier applied
};

FourierEngine::FourierEngine(const Config& cfg, double y,
                             StripChoice strips, QuadratureSpec quad,
                             int riccati_steps, std::vector<double> eval_times)
    : tables_(std::make_shared<const Tables>(validated_or_throw(cfg), strips, quad,
                                             riccati_steps, std::move(eval_times))),
      cfg_(tables_->cfg),
      y_(y) {
    build_phihat();
}

FourierEngine::FourierEngine(const FourierEngine& base, double y)
    : tables_(base.tables_), cfg_(base.cfg_), y_(y) {
    build_phihat();
}

const VariancePath& FourierEngine::variance() const { return tables_->vp; }
const StripChoice& FourierEngine::strips() const { return tables_->strips; }
bool FourierEngine::degenerate() const { return tables_->degenerate; }
const std::vector<double>& FourierEngine::eval_times() const { return tables_->times; }
double FourierEngine::du() const { return tables_->du; }
int FourierEngine::half_nodes() const { return tables_->half; }

cplx FourierEngine::contour_z(int which, int j) const {
    const double r = which == 0 ? tables_->strips.r1 : tables_->strips.r4;
    return {r, -j * tables_->du};
}

const std::vector<cplx>& FourierEngine::contour_f(int which) const {
    return which == 0 ? f1_ : f4_;
}

void FourierEngine::build_phihat() {
    const double gamma = cfg_.util.gamma;
    payoff_ = make_payoff(cfg_.schedule, cfg_.util, y_);
    pow_const_ = std::pow(cfg_.schedule.f_high(), 1.0 / gamma - 1.0) * std::pow(y_, -1.0 / gamma);
    if (tables_->degenerate) return;

    const auto& s = cfg_.schedule;
    const double ln_z1 = std::log(payoff_.zeta1);
    const double ln_z2 = std::log(payoff_.zeta2);
    const double ln_z3 = std::log(payoff_.zeta3);
    const double c1 = std::pow(s.f_high(), 1.0 / gamma - 1.0) * std::pow(y_, -1.0 / gamma);
    const double c4 = std::pow(s.f_low, 1.0 / gamma - 1.0) * std::pow(y_, -1.0 / gamma);
    const bool cap_piece = payoff_.zeta2 > payoff_.zeta1 * (1.0 + 1e-14);
    const bool interior = !payoff_.condition_a_holds && payoff_.zeta3 > payoff_.zeta2;

    // Interior piece: Gauss-Legendre panels over [ln zeta2, ln zeta3] sized to
    // the oscillation at the grid's largest frequency; h solved once per node.
    std::vector<double> xs, ws, hv;
    if (interior) {
        const double span = ln_z3 - ln_z2;
        const int panels = std::max(22, static_cast<int>(std::ceil(span * tables_->quad.u_max / 4.0)));
        const auto gl = gauss_legendre(12);
        xs.reserve(static_cast<std::size_t>(panels) * 12);
        for (int p = 0; p < panels; ++p) {
            const double lo = ln_z2 + span * p / panels;
            const double hi = ln_z2 + span * (p + 1) / panels;
            for (int m = 0; m < 12; ++m) {
                xs.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[m]);
                ws.push_back(0.5 * (hi - lo) * gl.weights[m]);
            }
        }
        hv.resize(xs.size());
        for (std::size_t m = 0; m < xs.size(); ++m)
            hv[m] = solve_h(s, cfg_.util, y_, std::exp(xs[m]));
    }

    const int half = tables_->half;
    f1_.assign(half + 1, cplx{});
    f4_.assign(half + 1, cplx{});
    const double r1 = tables_->strips.r1, r4 = tables_->strips.r4;
#pragma omp parallel for schedule(static)
    for (int j = 0; j <= half; ++j) {
        const double u = j * tables_->du;
        {
            const cplx z{u, r1};
            const cplx ex = -1.0 / gamma + kI * z;
            f1_[j] = c1 * std::exp(ex * ln_z1) / ex;
        }
        {
            const cplx z{u, r4};
            const cplx ex = -1.0 / gamma + kI * z;
            cplx v = -c4 * std::exp(ex * ln_z3) / ex;
            if (cap_piece)
                v += std::exp(s.eta_high) *
                     (std::exp(kI * z * ln_z2) - std::exp(kI * z * ln_z1)) / (kI * z);
            if (interior) {
                cplx acc{};
                for (std::size_t m = 0; m < xs.size(); ++m)
                    acc += ws[m] * hv[m] * std::exp(kI * z * xs[m]);
                v += acc;
            }
            f4_[j] = v;
        }
        if (tables_->quad.taper > 0.0) {
            const double start = (1.0 - tables_->quad.taper) * tables_->quad.u_max;
            if (u > start) {
                const double frac = (u - start) / (tables_->quad.u_max - start);
                const double wnd = 0.5 * (1.0 + std::cos(M_PI * frac));
                f1_[j] *= wnd;
                f4_[j] *= wnd;
            }
        }
    }
}

QuadratureSpec recommended_quadrature(const Config& cfg, const StripChoice& strips) {
    const FlowSchedule& s = cfg.schedule;
    if (s.f_high() <= s.f_low * (1.0 + 1e-14) && s.psi == 0.0)
        return QuadratureSpec{};  // degenerate: no quadrature used
    const VariancePath vp(cfg.model, cfg.init.r0, cfg.init.horizon_T);
    const double zeta0 = std::pow(cfg.init.w0, cfg.util.gamma);
    const bool closed = cfg.model.lambda == 0.0 && cfg.model.sigma_x == 0.0;
    // Transform magnitude on the contour at the candidate endpoint.
    auto h_at = [&](double u) {
        double worst = 0.0;
        for (double r : {strips.r1, strips.r4}) {
            const cplx z{r, -u};
            cplx h;
            if (closed) {
                AbcState st;
                riccati_learning_closed(cfg.model, cfg.util, cfg.init.r0, z, 0.0,
                                        cfg.init.horizon_T, st);
                h = std::exp(z * std::log(zeta0) + st.a + st.b * cfg.init.pi0 +
                             0.5 * st.c * cfg.init.pi0 * cfg.init.pi0);
            } else {
                h = eval_H_exact(cfg.model, cfg.util, vp, z, 0.0, zeta0,
                                 cfg.init.pi0, 4000);
            }
            worst = std::max(worst, std::abs(h));
        }
        return worst;
    };
    // Truncation-tail estimate: |phi_hat * H| ~ |H(u_max)| u^-p beyond the
    // endpoint, with p = 1 when the concavified payoff jumps in value
    // (condition A, gamma < 1) and p = 2 when it is continuous (the 1/u
    // boundary terms of adjacent pieces cancel). Widen through the tiers until
    // the estimate is below target. When the transform decays only
    // algebraically (degenerate log-zeta diffusion), no tier meets the target;
    // the widest one keeps the truncation error near the 1e-4 scale and the
    // taper suppresses the oscillatory part of the remainder.
    const auto payoff = make_payoff(cfg.schedule, cfg.util, 1.0);
    const double p = payoff.condition_a_holds ? 1.0 : 2.0;
    const QuadratureSpec tiers[] = {
        QuadratureSpec{60.0, 4096, 0.0},
        QuadratureSpec{2000.0, 131072, 0.25},
        QuadratureSpec{16000.0, 1 << 20, 0.25},
    };
    for (const auto& tier : tiers) {
        const double tail = h_at(tier.u_max) * std::pow(tier.u_max, 1.0 - p) /
                            (2.0 * M_PI * (p - 0.5));
        if (tail <= 5e-7) return tier;
    }
    return tiers[2];
}

FourierEngine::Partials FourierEngine::degenerate_eval(double t, double zeta, double pi) const {
    const double gamma = cfg_.util.gamma;
    cplx a, b, c;
    tables_->pow_sol.abc(t, a, b, c);
    const double z = -1.0 / gamma;
    const double h = std::exp(z * std::log(zeta) + a.real() + b.real() * pi +
                              0.5 * c.real() * pi * pi);
    Partials p;
    p.v = pow_const_ * h;
    p.dv_dzeta = z * p.v / zeta;
    p.dv_dpi = (b.real() + c.real() * pi) * p.v;
    return p;
}

FourierEngine::Partials FourierEngine::value_and_partials(double t, double zeta, double pi) const {
    if (zeta <= 0.0) throw InvalidInput("relative wealth: zeta must be positive");
    if (tables_->degenerate) return degenerate_eval(t, zeta, pi);

    const auto row = tables_->row_of(t);
    const int half = tables_->half;
    const double ln_zeta = std::log(zeta);
    const double contour_r[2] = {tables_->strips.r1, tables_->strips.r4};
    double acc_v = 0.0, acc_dz = 0.0, acc_dp = 0.0;
    for (int which = 0; which < 2; ++which) {
        const auto* av = tables_->a[which].data() + row * (half + 1);
        const auto* bv = tables_->b[which].data() + row * (half + 1);
        const auto* cv = tables_->c[which].data() + row * (half + 1);
        const auto& f = which == 0 ? f1_ : f4_;
        for (int j = 0; j <= half; ++j) {
            const cplx z{contour_r[which], -j * tables_->du};
            const cplx g =
                f[j] * std::exp(z * ln_zeta + av[j] + bv[j] * pi + 0.5 * cv[j] * pi * pi);
            // Conjugate symmetry: the u < 0 half contributes the conjugate, so
            // interior nodes carry weight 2 on the real part.
            const double w = (j == 0 || j == half) ? 1.0 : 2.0;
            acc_v += w * g.real();
            acc_dz += w * (g * z).real();
            acc_dp += w * (g * (bv[j] + cv[j] * pi)).real();
        }
    }
    const double scale = tables_->du / (2.0 * M_PI);
    Partials p;
    p.v = acc_v * scale;
    p.dv_dzeta = acc_dz * scale / zeta;
    p.dv_dpi = acc_dp * scale;
    if (!std::isfinite(p.v) || p.v <= 0.0)
        throw NumericsError("relative wealth: non-positive value (quadrature truncation?) at t=" +
                            std::to_string(t) + " zeta=" + std::to_string(zeta));
    return p;
}

double FourierEngine::relative_wealth(double t, double zeta, double pi) const {
    const double T = cfg_.init.horizon_T;
    if (t >= T - 1e-12) return terminal_value(zeta);
    return value_and_partials(t, zeta, pi).v;
}

double FourierEngine::terminal_value(double zeta) const {
    if (zeta <= 0.0) throw InvalidInput("terminal value: zeta must be positive");
    const double gamma = cfg_.util.gamma;
    if (tables_->degenerate) return pow_const_ * std::pow(zeta, -1.0 / gamma);

    if (!terminal_) {
        auto cache = std::make_shared<TerminalCache>();
        const double s2 = kTerminalSigma * kTerminalSigma;
        const double u_max = std::sqrt(2.0 * std::log(1e14)) / kTerminalSigma;
        cache->half = static_cast<int>(std::ceil(u_max / cache->du));
        cache->f1.resize(cache->half + 1);
        cache->f4.resize(cache->half + 1);
        const auto& sch = cfg_.schedule;
        const double ln_z1 = std::log(payoff_.zeta1);
        const double ln_z2 = std::log(payoff_.zeta2);
        const double ln_z3 = std::log(payoff_.zeta3);
        const double c1 = std::pow(sch.f_high(), 1.0 / gamma - 1.0) * std::pow(y_, -1.0 / gamma);
        const double c4 = std::pow(sch.f_low, 1.0 / gamma - 1.0) * std::pow(y_, -1.0 / gamma);
        const bool cap_piece = payoff_.zeta2 > payoff_.zeta1 * (1.0 + 1e-14);
        const double r1 = tables_->strips.r1, r4 = tables_->strips.r4;
#pragma omp parallel for schedule(static)
        for (int j = 0; j <= cache->half; ++j) {
            const double u = j * cache->du;
            const double moll = std::exp(-0.5 * s2 * u * u);
            {
                const cplx z{u, r1};
                const cplx ex = -1.0 / gamma + kI * z;
                cache->f1[j] = moll * c1 * std::exp(ex * ln_z1) / ex;
            }
            {
                const cplx z{u, r4};
                const cplx ex = -1.0 / gamma + kI * z;
                cplx v = -c4 * std::exp(ex * ln_z3) / ex;
                if (cap_piece)
                    v += std::exp(sch.eta_high) *
                         (std::exp(kI * z * ln_z2) - std::exp(kI * z * ln_z1)) / (kI * z);
                cache->f4[j] = moll * v;
            }
        }
        terminal_ = std::move(cache);
    }

    const auto& tc = *terminal_;
    const double x = std::log(zeta);
    double acc = 0.0;
    const double contour_r[2] = {tables_->strips.r1, tables_->strips.r4};
    for (int which = 0; which < 2; ++which) {
        const auto& f = which == 0 ? tc.f1 : tc.f4;
        const double damp = std::exp(contour_r[which] * x);
        const cplx rot = std::exp(cplx{0.0, -tc.du * x});
        cplx phase{1.0, 0.0};
        double sum = f[0].real();  // j = 0 term is real by symmetry
        for (int j = 1; j <= tc.half; ++j) {
            phase *= rot;
            const double w = (j == tc.half) ? 1.0 : 2.0;
            sum += w * (f[j] * phase).real();
        }
        acc += damp * sum;
    }
    double v = acc * tc.du / (2.0 * M_PI);

    // Interior piece by the exact Fubini rewrite of the same mollified
    // integral: a Gaussian convolution of h in log-zeta over a 9-sigma window.
    if (!payoff_.condition_a_holds && payoff_.zeta3 > payoff_.zeta2) {
        const double x2 = std::log(payoff_.zeta2), x3 = std::log(payoff_.zeta3);
        const double lo = std::max(x2, x - 9.0 * kTerminalSigma);
        const double hi = std::min(x3, x + 9.0 * kTerminalSigma);
        if (lo < hi) {
            static const auto gl = gauss_legendre(64);
            const double r3 = tables_->strips.r3;
            double conv = 0.0;
            for (int m = 0; m < 64; ++m) {
                const double xp = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[m];
                const double wm = 0.5 * (hi - lo) * gl.weights[m];
                const double d = xp - x;
                const double gauss = std::exp(-0.5 * d * d / (kTerminalSigma * kTerminalSigma)) /
                                     (kTerminalSigma * std::sqrt(2.0 * M_PI));
                conv += wm * solve_h(cfg_.schedule, cfg_.util, y_, std::exp(xp)) *
                        std::exp(-r3 * d) * gauss;
            }
            v += conv;
        }
    }
    if (!std::isfinite(v) || v <= 0.0)
        throw NumericsError("terminal value: non-positive inversion at zeta=" + std::to_string(zeta));
    return v;
}

FourierEngine calibrated_engine(const Config& cfg, StripChoice strips, QuadratureSpec quad,
                                int riccati_steps, std::vector<double> eval_times, double tol) {
    if (std::none_of(eval_times.begin(), eval_times.end(),
                     [](double t) { return std::abs(t) <= 1e-12; }))
        eval_times.push_back(0.0);
    FourierEngine base(cfg, 1.0, strips, quad, riccati_steps, eval_times);
    const double zeta0 = std::pow(cfg.init.w0, cfg.util.gamma);
    auto v0_minus_1 = [&](double ln_y) {
        FourierEngine e(base, std::exp(ln_y));
        return e.value_and_partials(0.0, zeta0, cfg.init.pi0).v - 1.0;
    };
    auto [lo, hi] = expand_bracket(v0_minus_1, -1.0, 1.0, 40);
    const double ln_y = brent(v0_minus_1, lo, hi, 1e-13);
    FourierEngine out(base, std::exp(ln_y));
    const double resid = std::abs(out.value_and_partials(0.0, zeta0, cfg.init.pi0).v - 1.0);
    if (resid > tol)
        throw NumericsError("calibrate: budget residual " + std::to_string(resid));
    return out;
}

}  // namespace collar
