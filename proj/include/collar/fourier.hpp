#pragma once

#include <memory>
#include <vector>

#include "collar/concavify.hpp"
#include "collar/filter.hpp"
#include "collar/model.hpp"
#include "collar/numerics.hpp"

namespace collar {

// Damping parameters (one per payoff piece). The inversion contours must
// satisfy r1 < -1/gamma and r4 > -1/gamma, with r4 bounded away from 0 so
// the u = 0 pole of the cap piece stays off the line. Pieces 2 and 3 share
// the r4 contour.
struct StripChoice {
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
    static StripChoice defaults(double gamma);
};

struct QuadratureSpec {
    double u_max = 60.0;  // truncation of the symmetric u-grid
    int nodes = 4096;     // full-grid node count (conjugate symmetry halves the work)
    // Fraction of the u-grid (at the far end) blended to zero with a smooth
    // cosine window. Needed when the transform H decays only algebraically in
    // u -- a degenerate configuration where the log-zeta diffusion coefficient
    // crosses zero -- so an abrupt cutoff leaves an oscillatory truncation
    // error; the smooth window suppresses it by orders of magnitude.
    double taper = 0.0;
};

// Default quadrature, widened (and smoothed) when the transform decays too
// slowly in u for the default truncation to meet the endpoint-envelope target.
QuadratureSpec recommended_quadrature(const Config& cfg, const StripChoice& strips);

// Fourier-inversion engine for the optimal relative wealth
//   V(t, zeta, pi) = (1/2pi) sum_j  int  phi_hat_j(u + i R_j) H(t, zeta, pi; R_j - iu) du
// and its zeta/pi partials (differentiated under the integral).
//
// The Riccati coefficient tables are tabulated at construction for a fixed
// list of evaluation times (they do not depend on the multiplier y, so
// engines for different y can share them). The degenerate flat collar
// collapses analytically to a single-exponent evaluation with no quadrature.
class FourierEngine {
  public:
    FourierEngine(const Config& cfg, double y,
                  StripChoice strips, QuadratureSpec quad,
                  int riccati_steps = 2000,
                  std::vector<double> eval_times = {0.0});
    // Same tables, different multiplier (used by the calibration loop).
    FourierEngine(const FourierEngine& base, double y);

    struct Partials {
        double v = 0.0;
        double dv_dzeta = 0.0;
        double dv_dpi = 0.0;
    };

    // t must be one of the tabulated evaluation times (or T).
    Partials value_and_partials(double t, double zeta, double pi) const;
    // Dispatches to the terminal inversion at t = T.
    double relative_wealth(double t, double zeta, double pi) const;
    // t = T limit of the transform representation (mollified inversion of the
    // discontinuous terminal payoff; the interior piece is evaluated by the
    // exact Fubini rewrite as a Gaussian convolution in log-zeta).
    double terminal_value(double zeta) const;

    const Config& config() const { return cfg_; }
    const ConcavifiedPayoff& payoff() const { return payoff_; }
    const VariancePath& variance() const;
    const StripChoice& strips() const;
    double y() const { return y_; }
    bool degenerate() const;
    const std::vector<double>& eval_times() const;

    // Contour data exposed for the replication engine, which streams the
    // Riccati states backward across simulation times itself.
    double du() const;
    int half_nodes() const;                       // index range j = 0..half_nodes()
    cplx contour_z(int which, int j) const;       // which: 0 -> r1 piece, 1 -> r4 pieces
    const std::vector<cplx>& contour_f(int which) const;

  private:
    struct Tables;
    std::shared_ptr<const Tables> tables_;
    Config cfg_;
    double y_ = 0.0;
    ConcavifiedPayoff payoff_;
    std::vector<cplx> f1_, f4_;  // phi-hat sums on the two contours
    double pow_const_ = 0.0;     // degenerate-case prefactor

    struct TerminalCache;
    mutable std::shared_ptr<TerminalCache> terminal_;

    void build_phihat();
    Partials degenerate_eval(double t, double zeta, double pi) const;
};

// Calibrates the Lagrange multiplier: finds y with V(0, zeta0, pi0) = 1
// where zeta0 = w0^gamma (budget in benchmark units, Y_0 = W_0), and returns
// the engine at the calibrated y.
FourierEngine calibrated_engine(const Config& cfg,
                                StripChoice strips, QuadratureSpec quad,
                                int riccati_steps = 2000,
                                std::vector<double> eval_times = {0.0},
                                double tol = 1e-9);

}  // namespace collar
