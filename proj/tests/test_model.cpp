#include <cstdio>
#include <fstream>
#include <string>

#include "collar/model.hpp"
#include "doctest.h"

using namespace collar;

namespace {

FlowSchedule fig_schedule() { return FlowSchedule::from_levels(0.8, 1.5, -0.08, 0.08); }

std::string write_temp_config(const std::string& body) {
    static int counter = 0;
    const std::string path = "test_model_cfg_" + std::to_string(counter++) + ".tmp";
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("flow schedule levels and slope") {
    const auto s = fig_schedule();
    CHECK(s.psi == doctest::Approx(4.375).epsilon(1e-15));
    CHECK(s.f_high() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_FALSE(s.flat());

    CHECK(flow_rate(s, -0.3) == 0.8);
    CHECK(flow_rate(s, -0.08) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(flow_rate(s, 0.0) == doctest::Approx(1.15).epsilon(1e-15));
    CHECK(flow_rate(s, 0.08) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(flow_rate(s, 0.3) == 1.5);
}

TEST_CASE("flow schedule kink continuity") {
    const auto s = fig_schedule();
    const double eps = 1e-9;
    CHECK(flow_rate(s, -0.08 - eps) == doctest::Approx(flow_rate(s, -0.08 + eps)).epsilon(1e-7));
    CHECK(flow_rate(s, 0.08 - eps) == doctest::Approx(flow_rate(s, 0.08 + eps)).epsilon(1e-7));
}

TEST_CASE("degenerate flat schedule") {
    const auto s = FlowSchedule::from_levels(1.0, 1.0, 0.0, 0.0);
    CHECK(s.flat());
    CHECK(flow_rate(s, -1.0) == 1.0);
    CHECK(flow_rate(s, 1.0) == 1.0);
    CHECK_THROWS_AS(FlowSchedule::from_levels(0.8, 1.5, 0.0, 0.0), InvalidInput);
}

TEST_CASE("power utility") {
    UtilityParams u{2.0};
    CHECK(utility(u, 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK_THROWS_AS(utility(u, 0.0), InvalidInput);
    CHECK_THROWS_AS(utility(u, -1.0), InvalidInput);
}

TEST_CASE("validate reports every violation") {
    Config cfg;
    cfg.model.sigma = -1.0;
    cfg.model.beta = 0.5;
    cfg.util.gamma = 1.0;
    cfg.schedule = fig_schedule();
    cfg.init.pi0 = 0.3;
    const auto errs = validate(cfg);
    CHECK(errs.size() >= 2);
    bool saw_sigma = false, saw_gamma = false;
    for (const auto& e : errs) {
        if (e.find("sigma") != std::string::npos) saw_sigma = true;
        if (e.find("gamma") != std::string::npos) saw_gamma = true;
    }
    CHECK(saw_sigma);
    CHECK(saw_gamma);
    CHECK_THROWS_AS(validated_or_throw(cfg), InvalidInput);
}

TEST_CASE("gamma must be positive and not one") {
    Config cfg;
    cfg.model.sigma = 0.2;
    cfg.model.beta = 0.5;
    cfg.schedule = fig_schedule();
    cfg.util.gamma = 1.0;
    CHECK_FALSE(validate(cfg).empty());
    cfg.util.gamma = -0.5;
    CHECK_FALSE(validate(cfg).empty());
    cfg.util.gamma = 0.8;
    CHECK(validate(cfg).empty());
}

TEST_CASE("config file round trip") {
    const auto path = write_temp_config(
        "# comment line\n"
        "r = 0.02\n"
        "sigma = 0.2\n"
        "lambda = 1.0\n"
        "x_bar = 0.4\n"
        "sigma_x = 0.25\n"
        "rho = -0.3\n"
        "beta = 0.5\n"
        "gamma = 2.0\n"
        "f_low = 0.8\n"
        "f_high = 1.5\n"
        "eta_low = -0.08\n"
        "eta_high = 0.08\n"
        "w0 = 1.0\n"
        "pi0 = 0.3\n"
        "r0 = 0.05\n"
        "horizon_T = 1.0\n");
    const Config cfg = load_config(path);
    std::remove(path.c_str());
    CHECK(cfg.model.r == 0.02);
    CHECK(cfg.model.rho == -0.3);
    CHECK(cfg.schedule.psi == doctest::Approx(4.375));
    CHECK(cfg.util.gamma == 2.0);
    CHECK(cfg.init.r0 == 0.05);
    CHECK(cfg.model.drift(0.3) == doctest::Approx(0.02 + 0.2 * 0.3));
}

TEST_CASE("config rejects psi together with f_high") {
    const auto path = write_temp_config(
        "sigma = 0.2\nbeta = 0.5\ngamma = 2\nf_low = 0.8\nf_high = 1.5\n"
        "psi = 4.375\neta_low = -0.08\neta_high = 0.08\npi0 = 0.3\n");
    CHECK_THROWS_AS(load_config(path), InvalidInput);
    std::remove(path.c_str());
}

TEST_CASE("config requires mandatory keys") {
    const auto path = write_temp_config("sigma = 0.2\nbeta = 0.5\n");
    CHECK_THROWS_AS(load_config(path), InvalidInput);
    std::remove(path.c_str());
}

}
