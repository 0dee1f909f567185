#include <cmath>

#include "collar/strategy.hpp"
#include "doctest.h"

using namespace collar;

namespace {

Config economy_a(double gamma) {
    Config cfg;
    cfg.model.sigma = 0.15;
    cfg.model.beta = 0.5;
    cfg.schedule = FlowSchedule::from_levels(0.8, 1.5, -0.08, 0.08);
    cfg.util.gamma = gamma;
    cfg.init.w0 = 1.0;
    cfg.init.pi0 = 0.667;
    cfg.init.r0 = 0.09;
    cfg.init.horizon_T = 1.0;
    return cfg;
}

Config flat_config() {
    Config cfg = economy_a(2.0);
    cfg.schedule = FlowSchedule::from_levels(1.0, 1.0, 0.0, 0.0);
    cfg.init.r0 = 0.0;
    return cfg;
}

}  // namespace

TEST_SUITE("strategy") {

TEST_CASE("constant no-incentive level") {
    const Config a = economy_a(2.0);
    CHECK(merton_level(a.model, a.util, a.init.pi0) ==
          doctest::Approx(0.667 / (2.0 * 0.15)).epsilon(1e-14));
    ModelParams b;
    b.sigma = 1.0;
    b.beta = 0.5;
    CHECK(merton_level(b, UtilityParams{0.8}, 0.3) ==
          doctest::Approx(0.375).epsilon(1e-14));
    ModelParams bad;
    CHECK_THROWS_AS(merton_level(bad, UtilityParams{2.0}, 0.3), InvalidInput);
}

TEST_CASE("myopic configuration zeroes the estimation risk") {
    Config cfg = economy_a(2.0);
    const Config m = myopic_config(cfg);
    CHECK(m.init.r0 == 0.0);
    CHECK(m.model.sigma_x == 0.0);
    CHECK(m.model.sigma == cfg.model.sigma);
    CHECK(m.init.pi0 == cfg.init.pi0);
}

TEST_CASE("flat collar recovers the constant-estimate weight exactly") {
    const Config cfg = flat_config();
    const auto e = calibrated_engine(cfg, StripChoice::defaults(2.0), QuadratureSpec{});
    const double expect = cfg.init.pi0 / (cfg.util.gamma * cfg.model.sigma);
    for (double t : {0.0, 0.33, 0.9})
        for (double zeta : {0.4, 1.0, 2.5})
            CHECK(optimal_theta(e, t, zeta, cfg.init.pi0) ==
                  doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("relative-return inversion round trip") {
    const Config cfg = economy_a(2.0);
    const FourierEngine e(cfg, 1.63, StripChoice::defaults(2.0), QuadratureSpec{},
                          2000, {0.0, 0.25});
    for (double target : {-0.3, 0.0, 0.2}) {
        const double zeta = zeta_for_relative_return(e, 0.25, target, cfg.init.pi0);
        CHECK(std::log(e.value_and_partials(0.25, zeta, cfg.init.pi0).v) ==
              doctest::Approx(target).epsilon(1e-9));
    }
}

TEST_CASE("strategy curve spans the requested band in order") {
    const Config cfg = economy_a(2.0);
    const auto strips = StripChoice::defaults(2.0);
    const std::vector<double> times{0.0, 0.25};
    const auto opt = calibrated_engine(cfg, strips, QuadratureSpec{}, 2000, times);
    const auto myo =
        calibrated_engine(myopic_config(cfg), strips, QuadratureSpec{}, 2000, times);
    const auto curve =
        strategy_curve(opt, myo, 0.25, cfg.init.pi0, cfg.init.pi0, 31, 0.3);
    REQUIRE(curve.size() == 31);
    CHECK(curve.front().relative_return <= -0.3);
    CHECK(curve.back().relative_return >= 0.3);
    const double tn = merton_level(cfg.model, cfg.util, cfg.init.pi0);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(curve[i].theta_merton == tn);
        CHECK(curve[i].theta > 0.0);
        if (i) {
            CHECK(curve[i].relative_return > curve[i - 1].relative_return);
            CHECK(curve[i].zeta < curve[i - 1].zeta);
        }
    }
    // The incentive schedule pushes risk-taking above the no-incentive level
    // near the collar's center for the more risk-averse manager.
    CHECK_THROWS_AS(strategy_curve(opt, myo, 0.25, cfg.init.pi0, cfg.init.pi0, 1, 0.3),
                    InvalidInput);
}

}
