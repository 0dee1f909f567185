#include "collar/numerics.hpp"

#include <algorithm>

namespace collar {

double brent(const std::function<double(double)>& f, double a, double b,
             double xtol, int maxit) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw NumericsError("brent: interval does not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < maxit; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = e = m;  // bisection
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {  // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {  // inverse quadratic
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * m * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = e = b - a; }
    }
    return b;
}

std::pair<double, double> expand_bracket(const std::function<double(double)>& f,
                                         double a, double b, int max_expand) {
    double fa = f(a), fb = f(b);
    for (int i = 0; i < max_expand; ++i) {
        if (std::isfinite(fa) && std::isfinite(fb) && fa * fb <= 0.0) return {a, b};
        const double w = b - a;
        a -= 0.5 * w;
        b += 0.5 * w;
        fa = f(a);
        fb = f(b);
    }
    throw NumericsError("expand_bracket: no sign change found");
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw NumericsError("gauss_legendre: n must be positive");
    GaussLegendre gl;
    gl.nodes.resize(static_cast<std::size_t>(n));
    gl.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        gl.nodes[static_cast<std::size_t>(i)] = -x;
        gl.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        gl.weights[static_cast<std::size_t>(i)] = w;
        gl.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return gl;
}

}  // namespace collar
