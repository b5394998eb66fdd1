#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "thermolap/cycle.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/geometry.hpp"
#include "thermolap/telemetry.hpp"

namespace thermolap {

// Isentropic motored-pressure model parameters.
struct CoastingParams {
    double kappa = 1.35;            // isentropic exponent [-]
    double p_ini = 0.0;             // initial pressure at BDC [Pa]
    double V_max = 0.0;             // maximum volume [m^3]

    void validate() const {
        require(kappa > 1.0, errc::bad_config, "isentropic exponent must exceed 1");
        require(p_ini > 0.0 && V_max > 0.0, errc::non_positive_input,
                "coasting needs positive p_ini and V_max");
    }
};

// p = p_ini (V_max / V)^kappa along the trace.
inline std::vector<double> motored_pressure(const CoastingParams& params, std::span<const double> V) {
    params.validate();
    std::vector<double> p(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) {
        require(V[i] <= params.V_max * (1.0 + 1e-12), errc::volume_exceeds_max,
                "volume exceeds V_max in motored_pressure");
        require(V[i] > 0.0, errc::non_positive_input, "volume must be positive");
        p[i] = params.p_ini * std::pow(params.V_max / V[i], params.kappa);
    }
    return p;
}

// Everything needed to evaluate a coasting cycle from the first three engine
// state entries.
struct CoastingConfig {
    double kappa = 1.35;
    double ambient_pressure = 1.0e5;    // fallback p_ini for zero air mass [Pa]
    double molar_mass = 28.9e-3;        // charge molar mass at IVC [kg/mol]
    double c_ivc = 0.5;                 // k_ivc = c_ivc * mean piston speed^2
    double eps_c = 2.2;                 // turbulent dissipation constant
    double step_deg = 0.5;              // internal crank resolution
};

struct CoastingCycle {
    CycleResult result;
    std::vector<double> angle, pressure, volume, Tg, k;
    double p_ini = 0.0;
    double N = 0.0;  // amount of substance [mol]
};

// Motored cycle: no combustion (x = y = 0, v_c = 0), isentropic compression
// and expansion between the BDCs, intake-pressure level on the gas-exchange
// strokes.
inline CoastingCycle coasting_cycle(const EngineState& state, const CylinderGeometry& geom,
                                    const HtcClosure& closure, const CoastingConfig& cfg) {
    require(state.coasting(), errc::not_coasting,
            "coasting_cycle requires T_i = 0, got T_i = " + std::to_string(state.T_i));
    require(state.n_engine > 0.0, errc::non_positive_input, "coasting_cycle needs n_engine > 0");
    require(state.t_int > 0.0, errc::non_positive_input, "coasting_cycle needs t_int > 0");
    geom.validate();
    closure.validate();

    CoastingCycle out;
    const double V_max = geom.max_volume();
    if (state.m_air > 0.0) {
        out.N = state.m_air * 1e-6 / cfg.molar_mass;
        out.p_ini = out.N * kGasConstant * state.t_int / V_max;
    } else {
        out.p_ini = cfg.ambient_pressure;
        out.N = out.p_ini * V_max / (kGasConstant * state.t_int);
    }

    for (double a = 0.0; a <= 720.0 + 1e-9; a += cfg.step_deg) out.angle.push_back(a);
    const std::size_t n = out.angle.size();
    out.volume.resize(n);
    out.pressure.resize(n);
    out.Tg.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.volume[i] = cylinder_volume(geom, out.angle[i]);

    CoastingParams params{cfg.kappa, out.p_ini, V_max};
    for (std::size_t i = 0; i < n; ++i) {
        double a = out.angle[i];
        if (a >= 180.0 && a <= 540.0)
            out.pressure[i] = out.p_ini * std::pow(V_max / out.volume[i], params.kappa);
        else
            out.pressure[i] = out.p_ini;  // two-level gas exchange model
        out.Tg[i] = mean_gas_temperature(out.pressure[i], out.volume[i], out.N);
    }

    // turbulence over the closed part of the cycle, frozen elsewhere
    double k_ivc = cfg.c_ivc * mean_piston_speed(geom, state.n_engine) *
                   mean_piston_speed(geom, state.n_engine);
    out.k.assign(n, k_ivc);
    {
        std::vector<double> t_cl, V_cl, l_cl;
        std::vector<std::size_t> map;
        for (std::size_t i = 0; i < n; ++i) {
            double a = out.angle[i];
            if (a >= 180.0 && a <= 540.0) {
                t_cl.push_back(crank_deg_to_seconds(a - 180.0, state.n_engine));
                V_cl.push_back(out.volume[i]);
                l_cl.push_back(eddy_length(out.volume[i]));
                map.push_back(i);
            }
        }
        auto tke = solve_tke(t_cl, V_cl, l_cl, k_ivc, cfg.eps_c);
        for (std::size_t j = 0; j < map.size(); ++j) out.k[map[j]] = tke.k[j];
    }

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double vp = piston_speed(geom, out.angle[i], state.n_engine);
        v[i] = characteristic_velocity(out.k[i], vp, 0.0, 0.0, 0.0, out.Tg[i], out.Tg[i], geom.bore);
    }

    auto alpha = htc_trace(out.pressure, v, out.Tg, closure);
    out.result = cycle_aggregate(out.angle, alpha, out.Tg, state.n_engine);
    return out;
}

}  // namespace thermolap
