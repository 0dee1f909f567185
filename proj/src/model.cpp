#include "collar/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace collar {

FlowSchedule FlowSchedule::from_levels(double f_low, double f_high,
                                       double eta_low, double eta_high) {
    FlowSchedule s;
    s.f_low = f_low;
    s.eta_low = eta_low;
    s.eta_high = eta_high;
    if (eta_high > eta_low) {
        s.psi = (f_high - f_low) / (eta_high - eta_low);
    } else {
        if (f_high != f_low)
            throw InvalidInput("flow schedule: eta_low = eta_high requires f_high = f_low");
        s.psi = 0.0;
    }
    return s;
}

FlowSchedule FlowSchedule::from_slope(double f_low, double psi,
                                      double eta_low, double eta_high) {
    FlowSchedule s;
    s.f_low = f_low;
    s.psi = psi;
    s.eta_low = eta_low;
    s.eta_high = eta_high;
    return s;
}

double flow_rate(const FlowSchedule& s, double te) {
    if (te < s.eta_low) return s.f_low;
    if (te >= s.eta_high) return s.f_high();
    return s.f_low + s.psi * (te - s.eta_low);
}

double utility(const UtilityParams& u, double x) {
    if (x <= 0.0) throw InvalidInput("utility: argument must be positive");
    return std::pow(x, 1.0 - u.gamma) / (1.0 - u.gamma);
}

std::vector<std::string> validate(const Config& cfg) {
    std::vector<std::string> errs;
    const auto& m = cfg.model;
    const auto& s = cfg.schedule;
    const auto& u = cfg.util;
    const auto& ic = cfg.init;
    auto bad = [&](const std::string& msg) { errs.push_back(msg); };

    if (!(m.sigma > 0.0)) bad("sigma must be positive");
    if (!(m.lambda >= 0.0)) bad("lambda must be non-negative");
    if (!(m.sigma_x >= 0.0)) bad("sigma_x must be non-negative");
    if (!(m.rho >= -1.0 && m.rho <= 1.0)) bad("rho must lie in [-1, 1]");

    if (!(s.f_low > 0.0)) bad("f_low must be positive");
    if (!(s.eta_low <= s.eta_high)) bad("eta_low must not exceed eta_high");
    if (s.flat()) {
        // Degenerate flat collar: constant flow. Allowed only when consistent.
        if (s.f_high() != s.f_low) bad("degenerate schedule requires f_high = f_low");
        if (s.psi < 0.0) bad("psi must be non-negative");
    } else {
        if (!(s.psi > 0.0)) bad("psi must be positive");
    }

    if (!(u.gamma > 0.0)) bad("gamma must be positive");
    if (u.gamma == 1.0) bad("gamma must differ from 1");

    if (!(ic.w0 > 0.0)) bad("w0 must be positive");
    if (ic.y0 != ic.w0) bad("y0 must equal w0");
    if (!(ic.r0 >= 0.0)) bad("r0 must be non-negative");
    if (!(ic.horizon_T > 0.0)) bad("horizon_T must be positive");
    return errs;
}

Config validated_or_throw(Config cfg) {
    auto errs = validate(cfg);
    if (!errs.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw InvalidInput(msg);
    }
    return cfg;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string t) {
            const auto a = t.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = t.find_last_not_of(" \t\r");
            return t.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

Config load_config(const std::string& path) {
    auto kv = parse_kv_file(path);
    auto get = [&](const std::string& key, double fallback, bool required = false) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (required) throw InvalidInput("missing required config key: " + key);
            return fallback;
        }
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            throw InvalidInput("config key " + key + ": not a number: " + it->second);
        }
        if (pos != it->second.size())
            throw InvalidInput("config key " + key + ": trailing characters: " + it->second);
        return v;
    };

    Config cfg;
    cfg.model.r = get("r", 0.0);
    cfg.model.sigma = get("sigma", 0.0, true);
    cfg.model.lambda = get("lambda", 0.0);
    cfg.model.x_bar = get("x_bar", 0.0);
    cfg.model.sigma_x = get("sigma_x", 0.0);
    cfg.model.rho = get("rho", 0.0);
    cfg.model.beta = get("beta", 0.0, true);
    cfg.util.gamma = get("gamma", 0.0, true);

    const double f_low = get("f_low", 0.0, true);
    const double eta_low = get("eta_low", 0.0, true);
    const double eta_high = get("eta_high", 0.0, true);
    if (kv.count("f_high") && kv.count("psi"))
        throw InvalidInput("specify either f_high or psi, not both");
    if (kv.count("psi"))
        cfg.schedule = FlowSchedule::from_slope(f_low, get("psi", 0.0), eta_low, eta_high);
    else
        cfg.schedule = FlowSchedule::from_levels(f_low, get("f_high", 0.0, true), eta_low, eta_high);

    cfg.init.w0 = get("w0", 1.0);
    cfg.init.y0 = get("y0", cfg.init.w0);
    cfg.init.pi0 = get("pi0", 0.0, true);
    cfg.init.r0 = get("r0", 0.0);
    cfg.init.horizon_T = get("horizon_T", 1.0);
    return validated_or_throw(cfg);
}

}  // namespace collar
