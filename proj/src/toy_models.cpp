#include "apcbms/toy_models.hpp"

#include <cmath>
#include <stdexcept>

namespace apcbms::toys {

namespace {

constexpr double kColumnHeight = 0.61;   // m
constexpr double kPulseTime = 151.35;    // h, first calcium injection pulse
constexpr double kInjected = 330.0;      // mol/m^3 calcium at injection
constexpr double kCalciteCap = 12.0;     // % pore volume
constexpr double kKubRef = 2.55e-4;      // midpoint of the k_ub interval
constexpr double kRhoRef = 8.0;          // midpoint of the rho_f interval

struct Inputs {
    double c_a1 = 0.0;
    double c_a2 = 0.0;
    double rho_f = kRhoRef;
    double k_ub = kKubRef;
};

Inputs unpack(const std::map<std::string, double>& params, bool needs_attachment) {
    Inputs in;
    auto get = [&](const char* name, double& slot, bool required) {
        auto it = params.find(name);
        if (it == params.end()) {
            if (required) throw std::runtime_error(std::string("missing parameter: ") + name);
            return;
        }
        slot = it->second;
    };
    get("rho_f", in.rho_f, true);
    get("k_ub", in.k_ub, true);
    get("c_a1", in.c_a1, needs_attachment);
    get("c_a2", in.c_a2, needs_attachment);
    return in;
}

// combined attachment rate, 1/h
double attachment_rate(const Inputs& in) { return (in.c_a1 + 0.1 * in.c_a2) * 3600.0; }

// biofilm factor at time t: 1 when nothing attaches, saturating growth
// towards 2.5 otherwise
double biofilm_factor(double rate, double t) { return 1.0 + 1.5 * (1.0 - std::exp(-rate * t)); }

// time average of the biofilm factor over [0, t]
double biofilm_factor_mean(double rate, double t) {
    const double x = rate * t;
    if (x < 1e-8) return 1.0 + 1.5 * 0.5 * x;  // series limit
    return 1.0 + 1.5 * (1.0 - (1.0 - std::exp(-x)) / x);
}

double calcite_profile(double kinetics_exponent, double x) {
    const double reacted = 1.0 - std::exp(-kinetics_exponent);
    const double depth = 0.30 / (1.0 + 0.8 * reacted) + 0.05;
    return kCalciteCap * reacted * std::exp(-x / depth);
}

double calcium_profile(double decay_rate, double x, double t) {
    const double since_pulse = std::max(0.0, t - kPulseTime);
    return kInjected * std::exp(-decay_rate * (since_pulse + 0.25) * (0.5 + x / kColumnHeight));
}

double log_position(double value, double center, double halfwidth) {
    return (std::log10(std::max(value, 1e-300)) + center) / halfwidth;
}

Vector evaluate_kinetic(const std::map<std::string, double>& params, const OutputGrid& grid,
                        bool with_attachment) {
    const Inputs in = unpack(params, with_attachment);
    const double u_k = in.k_ub / kKubRef;
    const double u_rho = in.rho_f / kRhoRef;
    const double rate = with_attachment ? attachment_rate(in) : 0.0;
    const double kappa_calcite = 0.004 * u_k * std::sqrt(u_rho);
    const double kappa_calcium = 0.5 * std::pow(u_k, 0.7) * std::pow(u_rho, 0.3);

    Vector out(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const auto& c = grid.coord(i);
        const double x = std::stod(c.space_label);
        const double t = std::stod(c.time_label);
        if (c.quantity == kQuantityCalcite) {
            out(i) = calcite_profile(kappa_calcite * biofilm_factor_mean(rate, t) * t, x);
        } else if (c.quantity == kQuantityCalcium) {
            out(i) = calcium_profile(kappa_calcium * biofilm_factor(rate, t), x, t);
        } else {
            throw std::runtime_error("unknown quantity: " + c.quantity);
        }
    }
    return out;
}

}  // namespace

Vector toy_fc(const std::map<std::string, double>& params, const OutputGrid& grid) {
    return evaluate_kinetic(params, grid, true);
}

Vector toy_ib(const std::map<std::string, double>& params, const OutputGrid& grid) {
    return evaluate_kinetic(params, grid, false);
}

Vector toy_sc(const std::map<std::string, double>& params, const OutputGrid& grid) {
    const Inputs in = unpack(params, true);
    const double u_k = in.k_ub / kKubRef;
    const double u_rho = in.rho_f / kRhoRef;
    // attachment only nudges the conversion efficiency; the instantaneous
    // chemistry keeps the predictive spread small
    const double n1 = log_position(in.c_a1, 8.5, 1.5);
    const double n2 = log_position(in.c_a2, 8.0, 2.0);
    const double calcite_gain =
        1.0 + 0.06 * (u_k - 1.0) + 0.04 * (u_rho - 1.0) + 0.01 * n1 + 0.01 * n2;
    const double calcium_rate =
        0.55 * (1.0 + 0.05 * (u_k - 1.0) + 0.03 * (u_rho - 1.0) + 0.01 * n1 + 0.01 * n2);

    Vector out(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const auto& c = grid.coord(i);
        const double x = std::stod(c.space_label);
        const double t = std::stod(c.time_label);
        if (c.quantity == kQuantityCalcite) {
            out(i) = kCalciteCap * 0.93 * calcite_gain * std::exp(-x / 0.22);
        } else if (c.quantity == kQuantityCalcium) {
            out(i) = calcium_profile(calcium_rate, x, t);
        } else {
            throw std::runtime_error("unknown quantity: " + c.quantity);
        }
    }
    return out;
}

}  // namespace apcbms::toys
