#include <cmath>

#include "collar/concavify.hpp"
#include "doctest.h"

using namespace collar;

namespace {

FlowSchedule fig_schedule() { return FlowSchedule::from_levels(0.8, 1.5, -0.08, 0.08); }

}  // namespace

TEST_SUITE("concavify") {

TEST_CASE("sign condition across risk aversions") {
    const auto s = fig_schedule();
    CHECK(condition_a(s, UtilityParams{0.8}).lhs ==
          doctest::Approx(1.3465225742021039).epsilon(1e-12));
    CHECK(condition_a(s, UtilityParams{0.8}).holds);
    CHECK(condition_a(s, UtilityParams{2.0}).lhs ==
          doctest::Approx(-0.5032041805030336).epsilon(1e-12));
    CHECK_FALSE(condition_a(s, UtilityParams{2.0}).holds);
    CHECK(condition_a(s, UtilityParams{0.9}).lhs ==
          doctest::Approx(1.1282298223024476).epsilon(1e-12));
    CHECK(condition_a(s, UtilityParams{0.99}).lhs ==
          doctest::Approx(0.942760902889205).epsilon(1e-12));
}

TEST_CASE("double tangency bounds") {
    const auto s = fig_schedule();
    const auto [vl, vu] = tangent_bounds(s, UtilityParams{2.0});
    CHECK(vl == doctest::Approx(0.63871834).epsilon(1e-7));
    CHECK(vu == doctest::Approx(1.03789262).epsilon(1e-7));
    // Tangency means equal slopes and the chord matching the slope.
    const UtilityParams u{2.0};
    const double sl = std::pow(vl * s.f_low, -u.gamma) * s.f_low;
    CHECK(sl == doctest::Approx(objective_mid_deriv(s, u, vu)).epsilon(1e-9));
    CHECK(sl * (vu - vl) ==
          doctest::Approx(objective_mid(s, u, vu) - objective_low(s, u, vl)).epsilon(1e-9));
    CHECK_THROWS_AS(tangent_bounds(s, UtilityParams{0.8}), InvalidInput);
}

TEST_CASE("thresholds when the sign condition holds") {
    const auto p = make_payoff(fig_schedule(), UtilityParams{0.8}, 1.0);
    CHECK(p.condition_a_holds);
    CHECK(p.zeta1 == doctest::Approx(1.0172399432333865).epsilon(1e-10));
    CHECK(p.zeta2 == doctest::Approx(2.2278298488602513).epsilon(1e-8));
    CHECK(p.zeta3 == p.zeta2);  // no interior branch
    CHECK_FALSE(p.v_lower.has_value());
}

TEST_CASE("thresholds when the sign condition fails") {
    const auto p = make_payoff(fig_schedule(), UtilityParams{2.0}, 1.0);
    CHECK_FALSE(p.condition_a_holds);
    CHECK(p.zeta1 == doctest::Approx(0.5680958593108075).epsilon(1e-10));
    CHECK(p.zeta2 == doctest::Approx(2.2250421156339955).epsilon(1e-8));
    CHECK(p.zeta3 == doctest::Approx(3.0640174721314524).epsilon(1e-8));
    REQUIRE(p.v_lower.has_value());
    REQUIRE(p.v_upper.has_value());
}

TEST_CASE("thresholds scale inversely with the multiplier") {
    const auto s = fig_schedule();
    const UtilityParams u{2.0};
    const auto p1 = make_payoff(s, u, 1.0);
    const auto p2 = make_payoff(s, u, 2.0);
    CHECK(p2.zeta1 == doctest::Approx(p1.zeta1 / 2.0).epsilon(1e-12));
    CHECK(p2.zeta2 == doctest::Approx(p1.zeta2 / 2.0).epsilon(1e-12));
    CHECK(p2.zeta3 == doctest::Approx(p1.zeta3 / 2.0).epsilon(1e-8));
}

TEST_CASE("terminal wealth branch structure, interior regime") {
    const auto s = fig_schedule();
    const UtilityParams u{2.0};
    const auto p = make_payoff(s, u, 1.0);
    const double eps = 1e-9;
    // Continuous at zeta1 (power branch meets the cap).
    CHECK(terminal_wealth(p, s, u, p.zeta1 * (1.0 - eps)) ==
          doctest::Approx(std::exp(s.eta_high)).epsilon(1e-7));
    CHECK(terminal_wealth(p, s, u, p.zeta1 * (1.0 + eps)) ==
          doctest::Approx(std::exp(s.eta_high)).epsilon(1e-12));
    // Continuous at zeta2 (cap meets the interior branch).
    CHECK(terminal_wealth(p, s, u, p.zeta2 * (1.0 - eps)) ==
          doctest::Approx(terminal_wealth(p, s, u, p.zeta2 * (1.0 + eps))).epsilon(1e-6));
    // Jumps at zeta3: interior branch ends at v_upper, power branch restarts
    // at v_lower; the gap region is never attained.
    CHECK(terminal_wealth(p, s, u, p.zeta3 * (1.0 - eps)) ==
          doctest::Approx(*p.v_upper).epsilon(1e-6));
    CHECK(terminal_wealth(p, s, u, p.zeta3 * (1.0 + eps)) ==
          doctest::Approx(*p.v_lower).epsilon(1e-6));
    CHECK(*p.v_upper - *p.v_lower > 0.1);
}

TEST_CASE("terminal wealth is nonincreasing in zeta") {
    const auto s = fig_schedule();
    for (double g : {0.8, 2.0}) {
        const UtilityParams u{g};
        const auto p = make_payoff(s, u, 1.3);
        double prev = 1e300;
        for (double lz = -2.0; lz <= 2.0; lz += 0.01) {
            const double v = terminal_wealth(p, s, u, std::exp(lz));
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("interior branch solves its defining equation") {
    const auto s = fig_schedule();
    const UtilityParams u{2.0};
    const double y = 1.6;
    const auto p = make_payoff(s, u, y);
    const double zeta = 0.5 * (p.zeta2 + p.zeta3);
    const double v = solve_h(s, u, y, zeta);
    CHECK(objective_mid_deriv(s, u, v) == doctest::Approx(y * zeta).epsilon(1e-10));
    CHECK(v > *p.v_upper);
    CHECK(v <= std::exp(s.eta_high));
}

TEST_CASE("flat schedule collapses all thresholds") {
    const auto s = FlowSchedule::from_levels(1.0, 1.0, 0.0, 0.0);
    const UtilityParams u{2.0};
    const auto p = make_payoff(s, u, 1.0);
    CHECK(p.zeta1 == p.zeta2);
    CHECK(p.zeta2 == p.zeta3);
    // Pure power payoff: V = (y zeta)^(-1/gamma) * f^(1/gamma - 1).
    CHECK(terminal_wealth(p, s, u, 4.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(make_payoff(s, u, -1.0), InvalidInput);
}

}
