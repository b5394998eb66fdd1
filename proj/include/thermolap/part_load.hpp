#pragma once

#include <cmath>
#include <span>

#include "thermolap/errors.hpp"
#include "thermolap/histogram.hpp"
#include "thermolap/telemetry.hpp"

namespace thermolap {

// Closure constants for the state-ratio model. The ratios reduce to one at
// the stationary reference and are monotone in each state entry.
struct PartLoadConfig {
    double delta_theta = 2200.0;          // adiabatic temperature-rise scale [K]
    double stoich_air_fuel_ratio = 14.7;  // mass based [-]
    double exponent = 0.78;               // Woschni exponent m, shared with the HTC closure

    void validate() const {
        require(delta_theta >= 0.0, errc::bad_config, "delta_theta must be non-negative");
        require(stoich_air_fuel_ratio > 0.0, errc::bad_config, "stoichiometric ratio must be positive");
        require(exponent > 0.0 && exponent < 1.0, errc::bad_config, "exponent must be in (0,1)");
    }
};

struct StateRatios {
    double r_p = 1.0;  // pressure ratio
    double r_v = 1.0;  // velocity ratio
    double r_T = 1.0;  // gas-temperature ratio
};

// Fuel-air equivalence ratio phi = (m_fuel/m_air) / (m_fuel/m_air)_stoich.
inline double equivalence_ratio(const EngineState& s, const PartLoadConfig& cfg) {
    if (s.m_air <= 0.0 || s.m_fuel <= 0.0) return 0.0;
    return (s.m_fuel / s.m_air) * cfg.stoich_air_fuel_ratio;
}

// r_v: engine-speed ratio (piston-speed dominance).
// r_T: mixture-enthalpy model (t_int + delta_theta * phi) ratio.
// r_p: air-mass ratio times r_T (ideal gas at fixed volume).
inline StateRatios state_ratios(const EngineState& current, const EngineState& stationary,
                                const PartLoadConfig& cfg) {
    require(stationary.n_engine > 0.0 && stationary.m_air > 0.0, errc::missing_reference,
            "stationary reference state is degenerate");
    require(current.n_engine > 0.0 && current.m_air > 0.0, errc::non_positive_input,
            "part-load transform needs positive speed and air mass");
    StateRatios r;
    r.r_v = current.n_engine / stationary.n_engine;
    double theta_cur = current.t_int + cfg.delta_theta * equivalence_ratio(current, cfg);
    double theta_stat = stationary.t_int + cfg.delta_theta * equivalence_ratio(stationary, cfg);
    require(theta_stat > 0.0 && theta_cur > 0.0, errc::non_positive_input,
            "temperature ratio closure degenerate");
    r.r_T = theta_cur / theta_stat;
    r.r_p = (current.m_air / stationary.m_air) * r.r_T;
    return r;
}

// beta = r_p^m r_v^m r_T^(0.75 - 1.62 m).
inline double beta_coefficient(const StateRatios& r, double m) {
    require(r.r_p > 0.0 && r.r_v > 0.0 && r.r_T > 0.0, errc::non_positive_input,
            "state ratios must be positive");
    return std::pow(r.r_p, m) * std::pow(r.r_v, m) * std::pow(r.r_T, 0.75 - 1.62 * m);
}

// Realization-space scaling alpha -> beta * alpha (axis 0). For joint
// (alpha, T_eff) histograms the reference temperature scales with r_T. The
// change of variables multiplies edges and divides densities through the bin
// volumes; total probability stays one.
inline HistogramNd transform_pdf(const HistogramNd& stat, double beta, double r_T = 1.0) {
    require(beta > 0.0, errc::non_positive_input, "beta must be positive");
    require(r_T > 0.0, errc::non_positive_input, "r_T must be positive");
    HistogramNd out = stat;
    std::vector<double> factors(static_cast<std::size_t>(stat.dim()), 1.0);
    factors[0] = beta;
    if (stat.dim() > 1) factors[1] = r_T;
    out.scale_axes(factors);
    return out;
}

}  // namespace thermolap
