#include "collar/strategy.hpp"

#include <cmath>

namespace collar {

double merton_level(const ModelParams& m, const UtilityParams& u, double pi0) {
    if (!(m.sigma > 0.0)) throw InvalidInput("merton_level: sigma must be positive");
    const double mu0 = m.drift(pi0);
    return (mu0 - m.r) / (u.gamma * m.sigma * m.sigma);
}

double optimal_theta(const FourierEngine& e, double t, double zeta, double pi) {
    const auto& m = e.config().model;
    const double gamma = e.config().util.gamma;
    const auto p = e.value_and_partials(t, zeta, pi);
    if (!(p.v > 0.0) || !std::isfinite(p.dv_dzeta) || !std::isfinite(p.dv_dpi))
        throw NumericsError("optimal_theta: invalid value/partials");
    const double k = e.variance().k(t);
    return m.beta + (p.dv_dzeta * zeta * (gamma * m.beta * m.sigma - pi) + p.dv_dpi * k) /
                        (m.sigma * p.v);
}

Config myopic_config(Config cfg) {
    cfg.init.r0 = 0.0;
    cfg.model.sigma_x = 0.0;
    return cfg;
}

double zeta_for_relative_return(const FourierEngine& e, double t, double target,
                                double pi) {
    auto f = [&](double ln_zeta) {
        return std::log(e.value_and_partials(t, std::exp(ln_zeta), pi).v) - target;
    };
    auto [lo, hi] = expand_bracket(f, -1.0, 1.0, 40);
    return std::exp(brent(f, lo, hi, 1e-12));
}

std::vector<StrategyPoint> strategy_curve(const FourierEngine& opt,
                                          const FourierEngine& myo,
                                          double t, double pi, double pi_myopic,
                                          int n_points, double span) {
    if (n_points < 2) throw InvalidInput("strategy_curve: need at least 2 points");
    const auto& m = opt.config().model;
    const auto& u = opt.config().util;
    const double theta_n = merton_level(m, u, pi);

    // Anchor the zeta grid so the traced relative returns cover [-span, span].
    const double margin = 0.02;
    const double z_hi = zeta_for_relative_return(opt, t, -span - margin, pi);
    const double z_lo = zeta_for_relative_return(opt, t, span + margin, pi);
    if (!(z_lo < z_hi))
        throw NumericsError("strategy_curve: failed to span the requested range");

    std::vector<StrategyPoint> out(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double w = static_cast<double>(i) / (n_points - 1);
        // Descending zeta <-> ascending relative return.
        const double zeta = z_hi * std::pow(z_lo / z_hi, w);
        StrategyPoint p;
        p.t = t;
        p.zeta = zeta;
        p.relative_return = std::log(opt.value_and_partials(t, zeta, pi).v);
        p.theta = optimal_theta(opt, t, zeta, pi);
        const double zeta_myo = zeta_for_relative_return(myo, t, p.relative_return, pi_myopic);
        p.theta_myopic = optimal_theta(myo, t, zeta_myo, pi_myopic);
        p.theta_merton = theta_n;
        out[static_cast<std::size_t>(i)] = p;
    }
    return out;
}

}  // namespace collar
