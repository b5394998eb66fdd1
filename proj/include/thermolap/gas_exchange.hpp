#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <span>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/numerics.hpp"

namespace thermolap {

// Valve/port geometry and the lift curve over the crank angle.
struct PortGeometry {
    double valve_diameter = 0.0;  // D_v [m]
    double duct_diameter = 0.0;   // [m]
    double port_length = 0.0;     // [m]
    std::vector<double> lift_angle_deg;
    std::vector<double> lift_m;
    std::vector<double> flow_area_m2;

    void validate() const {
        require(valve_diameter > 0.0 && duct_diameter > 0.0 && port_length > 0.0, errc::bad_config,
                "port geometry lengths must be positive");
        require(lift_angle_deg.size() == lift_m.size() && lift_m.size() == flow_area_m2.size(),
                errc::grid_mismatch, "valve-lift curve columns must align");
        for (double l : lift_m) require(l >= 0.0, errc::bad_config, "valve lift must be non-negative");
    }

    // Means over the valve-open window (lift > 0).
    double mean_open_lift() const { return open_window_mean(lift_m); }
    double mean_open_area() const { return open_window_mean(flow_area_m2); }

private:
    double open_window_mean(const std::vector<double>& f) const {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < lift_m.size(); ++i)
            if (lift_m[i] > 0.0) {
                s += f[i];
                ++n;
            }
        require(n > 0, errc::zero_area, "valve never opens");
        return s / static_cast<double>(n);
    }
};

inline PortGeometry load_valve_lift(const std::filesystem::path& path, PortGeometry base) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    base.lift_angle_deg = t.column("alpha_cr_deg", ctx);
    base.lift_m = t.column("lift_m", ctx);
    base.flow_area_m2 = t.column("area_m2", ctx);
    base.validate();
    return base;
}

// Temperature-dependent gas properties, linearly interpolated from a table.
struct GasProps {
    double nu = 0.0;      // kinematic viscosity [m^2/s]
    double lambda = 0.0;  // thermal conductivity [W/(m K)]
    double Pr = 0.0;      // Prandtl number [-]
};

class GasPropsTable {
public:
    GasPropsTable(std::vector<double> T, std::vector<double> nu, std::vector<double> lambda,
                  std::vector<double> Pr)
        : T_(std::move(T)), nu_(std::move(nu)), lambda_(std::move(lambda)), Pr_(std::move(Pr)) {
        require(!T_.empty() && T_.size() == nu_.size() && T_.size() == lambda_.size() &&
                    T_.size() == Pr_.size(),
                errc::grid_mismatch, "gas property table columns must align");
        for (std::size_t i = 0; i < T_.size(); ++i) {
            require(nu_[i] > 0.0 && lambda_[i] > 0.0 && Pr_[i] > 0.0, errc::non_positive_input,
                    "gas properties must be positive");
            if (i) require(T_[i] > T_[i - 1], errc::bad_config, "gas property temperatures must increase");
        }
    }

    static GasPropsTable load(const std::filesystem::path& path) {
        csv::Table t = csv::read(path);
        const std::string ctx = path.filename().string();
        return GasPropsTable(t.column("T_K", ctx), t.column("nu_m2s", ctx),
                             t.column("lambda_WmK", ctx), t.column("Pr", ctx));
    }

    GasProps at(double T) const {
        return GasProps{interp1(T_, nu_, T), interp1(T_, lambda_, T), interp1(T_, Pr_, T)};
    }

private:
    std::vector<double> T_, nu_, lambda_, Pr_;
};

// --- Nusselt correlations ---------------------------------------------------

// Outlet valve stem: Nu_v = 1.84 Re_v^0.58 (D_v/l_v)^0.2.
inline double nu_exhaust_valve(double Re_v, double D_over_l) {
    require(Re_v > 0.0 && D_over_l > 0.0, errc::non_positive_input,
            "nu_exhaust_valve needs positive Re and D/l");
    return 1.84 * std::pow(Re_v, 0.58) * std::pow(D_over_l, 0.2);
}

// Inlet valve stem: same form, coefficient reduced by 40 percent.
inline double nu_intake_valve(double Re_v, double D_over_l) {
    require(Re_v > 0.0 && D_over_l > 0.0, errc::non_positive_input,
            "nu_intake_valve needs positive Re and D/l");
    return 0.6 * 1.84 * std::pow(Re_v, 0.58) * std::pow(D_over_l, 0.2);
}

// Intake port: Nu = c Re with the exponent fixed to one (fully developed flow);
// c is the calibration parameter.
inline double nu_intake_port(double Re, double c) {
    require(Re >= 0.0, errc::non_positive_input, "nu_intake_port needs Re >= 0");
    require(c > 0.0, errc::non_positive_input, "nu_intake_port needs c > 0");
    return c * Re;
}

// Exhaust port: Nu = sqrt(8 Re_j Pr / pi), jet Reynolds number on the duct diameter.
inline double nu_exhaust_port(double Re_j, double Pr) {
    require(Re_j > 0.0 && Pr > 0.0, errc::non_positive_input,
            "nu_exhaust_port needs positive Re_j and Pr");
    return std::sqrt(8.0 * Re_j * Pr / std::numbers::pi);
}

// --- Velocities and HTC -----------------------------------------------------

// Continuity: v = mdot / (rho A).
inline double jet_velocity(double mdot, double rho, double area) {
    require(area > 0.0, errc::zero_area, "jet_velocity needs positive flow area");
    require(rho > 0.0, errc::non_positive_input, "jet_velocity needs positive density");
    return mdot / (rho * area);
}

// Converts per-stroke charge mass [mg/stroke] at speed n [rpm] (four-stroke:
// one intake stroke every two revolutions) into the cycle-averaged jet
// velocity through the given open-window mean area.
inline double jet_velocity_from_state(double m_air_mg_per_stroke, double n_rpm, double rho,
                                      double open_area) {
    double mdot = m_air_mg_per_stroke * 1e-6 * n_rpm / 120.0;  // [kg/s]
    return jet_velocity(mdot, rho, open_area);
}

// Definition of the Nusselt number.
inline double htc_from_nu(double Nu, double length_scale, double lambda_gas) {
    require(length_scale > 0.0 && lambda_gas > 0.0, errc::non_positive_input,
            "htc_from_nu needs positive length scale and conductivity");
    return Nu * lambda_gas / length_scale;
}

}  // namespace thermolap
