#include "collar/filter.hpp"

#include <cmath>

#include "collar/numerics.hpp"

namespace collar {

namespace {

// Cash-Karp embedded RK45 step for the scalar variance equation.
// Returns (value, error estimate).
template <typename F>
std::pair<double, double> rk45_step(const F& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.2 * h, y + h * 0.2 * k1);
    const double k3 = f(t + 0.3 * h, y + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    const double k4 = f(t + 0.6 * h, y + h * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
    const double k5 = f(t + h, y + h * (-11.0 / 54 * k1 + 2.5 * k2 - 70.0 / 27 * k3 + 35.0 / 27 * k4));
    const double k6 = f(t + 0.875 * h,
                        y + h * (1631.0 / 55296 * k1 + 175.0 / 512 * k2 + 575.0 / 13824 * k3 +
                                 44275.0 / 110592 * k4 + 253.0 / 4096 * k5));
    const double y5 = y + h * (37.0 / 378 * k1 + 250.0 / 621 * k3 + 125.0 / 594 * k4 +
                               512.0 / 1771 * k6);
    const double y4 = y + h * (2825.0 / 27648 * k1 + 18575.0 / 48384 * k3 +
                               13525.0 / 55296 * k4 + 277.0 / 14336 * k5 + 0.25 * k6);
    return {y5, std::abs(y5 - y4)};
}

}  // namespace

VariancePath::VariancePath(const ModelParams& m, double r0, double horizon_T,
                           int grid_steps) {
    if (r0 < 0.0) throw InvalidInput("variance path: r0 must be non-negative");
    if (horizon_T <= 0.0) throw InvalidInput("variance path: horizon must be positive");
    rho_sigma_x_ = m.rho * m.sigma_x;
    r0_ = r0;
    T_ = horizon_T;
    closed_form_ = (m.lambda == 0.0 && m.sigma_x == 0.0);
    if (closed_form_) return;

    const double sx2 = m.sigma_x * m.sigma_x;
    const double lam = m.lambda;
    const double rsx = rho_sigma_x_;
    auto rhs = [&](double /*t*/, double R) {
        const double k = R + rsx;
        return sx2 - 2.0 * lam * R - k * k;
    };

    grid_vals_.resize(static_cast<std::size_t>(grid_steps) + 1);
    dt_ = T_ / grid_steps;
    const double atol = 1e-10;
    double R = r0;
    grid_vals_[0] = R;
    for (int i = 0; i < grid_steps; ++i) {
        // Adaptive substeps landing exactly on the next uniform node.
        double t = i * dt_;
        const double t_end = (i + 1) * dt_;
        double h = dt_;
        while (t < t_end) {
            h = std::min(h, t_end - t);
            auto [y_new, err] = rk45_step(rhs, t, R, h);
            if (err <= atol || h <= 1e-12 * T_) {
                t += h;
                R = y_new;
                if (err > 0.0) h *= std::min(5.0, 0.9 * std::pow(atol / err, 0.2));
            } else {
                h *= std::max(0.1, 0.9 * std::pow(atol / err, 0.25));
                if (h < 1e-14 * T_)
                    throw NumericsError("variance path: step underflow at t = " + std::to_string(t));
            }
        }
        grid_vals_[static_cast<std::size_t>(i) + 1] = R;
    }
}

double VariancePath::r_var(double t) const {
    if (closed_form_) return r0_ / (r0_ * t + 1.0);
    if (t <= 0.0) return grid_vals_.front();
    if (t >= T_) return grid_vals_.back();
    const double s = t / dt_;
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return grid_vals_[i] * (1.0 - w) + grid_vals_[i + 1] * w;
}

double VariancePath::k(double t) const { return r_var(t) + rho_sigma_x_; }

double variance_closed_form(const ModelParams& m, double r0, double t) {
    if (m.lambda != 0.0 || m.sigma_x != 0.0)
        throw InvalidInput("variance_closed_form: requires lambda = 0 and sigma_x = 0");
    return r0 / (r0 * t + 1.0);
}

FilterState filter_step(const FilterState& st, const ModelParams& m,
                        const VariancePath& vp, double d_innovation, double dt) {
    if (dt <= 0.0) throw InvalidInput("filter_step: dt must be positive");
    FilterState out;
    out.t = st.t + dt;
    out.pi = st.pi - m.lambda * (st.pi - m.x_bar) * dt + vp.k(st.t) * d_innovation;
    out.r_var = vp.r_var(out.t);
    return out;
}

}  // namespace collar
