#include <cmath>

#include "collar/fourier.hpp"
#include "doctest.h"

using namespace collar;

namespace {

Config fig_config(char econ, double gamma) {
    Config cfg;
    cfg.model.sigma = econ == 'a' ? 0.15 : 1.0;
    cfg.model.beta = 0.5;
    cfg.schedule = FlowSchedule::from_levels(0.8, 1.5, -0.08, 0.08);
    cfg.util.gamma = gamma;
    cfg.init.w0 = 1.0;
    cfg.init.pi0 = econ == 'a' ? 0.667 : 0.3;
    cfg.init.r0 = 0.09;
    cfg.init.horizon_T = 1.0;
    return cfg;
}

Config flat_config() {
    Config cfg = fig_config('a', 2.0);
    cfg.schedule = FlowSchedule::from_levels(1.0, 1.0, 0.0, 0.0);
    cfg.init.r0 = 0.0;
    return cfg;
}

}  // namespace

TEST_SUITE("fourier") {

TEST_CASE("default strips sit on the correct sides of the pole") {
    for (double g : {0.8, 2.0, 5.0}) {
        const auto s = StripChoice::defaults(g);
        CHECK(s.r1 < -1.0 / g);
        CHECK(s.r4 > -1.0 / g);
        CHECK(std::abs(s.r4) >= 0.05);
        CHECK(s.r2 == s.r4);
        CHECK(s.r3 == s.r4);
    }
}

TEST_CASE("uncalibrated value and partials, interior regime") {
    const Config cfg = fig_config('a', 2.0);
    const FourierEngine e(cfg, 1.0, StripChoice::defaults(2.0), QuadratureSpec{});
    const auto p = e.value_and_partials(0.0, 1.0, cfg.init.pi0);
    CHECK(p.v == doctest::Approx(1.09158084).epsilon(1e-6));
    CHECK(p.dv_dzeta == doctest::Approx(-0.08329448).epsilon(1e-5));
    CHECK(p.dv_dpi == doctest::Approx(-0.04592624).epsilon(1e-5));
}

TEST_CASE("calibration closes the budget on all four panels") {
    const double y_expect[4] = {1.368431, 1.628112, 2.064094, 1.412894};
    int i = 0;
    for (char econ : {'a', 'b'})
        for (double g : {0.8, 2.0}) {
            const Config cfg = fig_config(econ, g);
            const auto strips = StripChoice::defaults(g);
            const auto e = calibrated_engine(cfg, strips,
                                             recommended_quadrature(cfg, strips));
            CHECK(e.y() == doctest::Approx(y_expect[i++]).epsilon(5e-4));
            const double zeta0 = std::pow(cfg.init.w0, g);
            CHECK(e.value_and_partials(0.0, zeta0, cfg.init.pi0).v ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
}

TEST_CASE("relative wealth dispatches to the terminal map at t = T") {
    const Config cfg = fig_config('a', 2.0);
    const FourierEngine e(cfg, 1.0, StripChoice::defaults(2.0), QuadratureSpec{});
    const auto& p = e.payoff();
    for (double zeta : {0.2, 0.45, 1.0, 2.0, 2.8, 4.0, 8.0}) {
        const double direct = terminal_wealth(p, cfg.schedule, cfg.util, zeta);
        CHECK(e.relative_wealth(1.0, zeta, cfg.init.pi0) ==
              doctest::Approx(direct).epsilon(1e-6));
        CHECK(e.terminal_value(zeta) == doctest::Approx(direct).epsilon(1e-6));
    }
}

TEST_CASE("terminal inversion, no-interior regime") {
    const Config cfg = fig_config('a', 0.8);
    const FourierEngine e(cfg, 1.0, StripChoice::defaults(0.8), QuadratureSpec{});
    for (double zeta : {0.3, 0.9, 1.5, 3.0, 6.0})
        CHECK(e.terminal_value(zeta) ==
              doctest::Approx(terminal_wealth(e.payoff(), cfg.schedule, cfg.util, zeta))
                  .epsilon(1e-6));
}

TEST_CASE("value decreases in zeta and time consistency holds") {
    const Config cfg = fig_config('b', 2.0);
    const FourierEngine e(cfg, 1.4, StripChoice::defaults(2.0), QuadratureSpec{}, 2000,
                          {0.0, 0.25});
    double prev = 1e300;
    for (double lz = -1.0; lz <= 1.0; lz += 0.125) {
        const double v = e.value_and_partials(0.25, std::exp(lz), cfg.init.pi0).v;
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    // Requesting an untabulated interior time must fail loudly, not silently
    // interpolate.
    CHECK_THROWS_AS(e.value_and_partials(0.1, 1.0, cfg.init.pi0), NumericsError);
}

TEST_CASE("engines sharing tables agree with fresh construction") {
    const Config cfg = fig_config('a', 2.0);
    const FourierEngine base(cfg, 1.0, StripChoice::defaults(2.0), QuadratureSpec{});
    const FourierEngine shared(base, 1.7);
    const FourierEngine fresh(cfg, 1.7, StripChoice::defaults(2.0), QuadratureSpec{});
    const auto a = shared.value_and_partials(0.0, 0.8, cfg.init.pi0);
    const auto b = fresh.value_and_partials(0.0, 0.8, cfg.init.pi0);
    CHECK(a.v == doctest::Approx(b.v).epsilon(1e-13));
    CHECK(a.dv_dzeta == doctest::Approx(b.dv_dzeta).epsilon(1e-13));
}

TEST_CASE("degenerate flat engine is a pure power transform") {
    const Config cfg = flat_config();
    const auto e = calibrated_engine(cfg, StripChoice::defaults(2.0), QuadratureSpec{});
    CHECK(e.degenerate());
    // V(0, zeta0, pi0) = 1 by calibration; terminal V = c * zeta^(-1/gamma).
    const double v1 = e.terminal_value(1.0);
    CHECK(e.terminal_value(4.0) == doctest::Approx(0.5 * v1).epsilon(1e-12));
    // Any interior time works without tabulation.
    const auto p = e.value_and_partials(0.37, 1.0, cfg.init.pi0);
    CHECK(p.v > 0.0);
    CHECK(p.dv_dzeta == doctest::Approx(-0.5 * p.v).epsilon(1e-12));
}

TEST_CASE("invalid zeta is rejected") {
    const Config cfg = fig_config('a', 2.0);
    const FourierEngine e(cfg, 1.0, StripChoice::defaults(2.0), QuadratureSpec{});
    CHECK_THROWS_AS(e.value_and_partials(0.0, 0.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(e.terminal_value(-1.0), InvalidInput);
}

}
