#pragma once

#include <cmath>
#include <numbers>

#include "thermolap/errors.hpp"

namespace thermolap {

// Slider-crank geometry of one cylinder. Crank-angle convention: 0 degrees is
// the gas-exchange TDC, 360 the firing TDC; the cycle is 720-periodic.
struct CylinderGeometry {
    double bore = 0.0;               // B [m]
    double stroke = 0.0;             // [m]
    double conrod_length = 0.0;      // [m]
    double compression_ratio = 0.0;  // [-]
    int n_cylinders = 1;

    void validate() const {
        require(bore > 0.0 && stroke > 0.0 && conrod_length > 0.0, errc::bad_config,
                "geometry lengths must be positive");
        require(compression_ratio > 1.0, errc::bad_config, "compression ratio must exceed 1");
        require(conrod_length > stroke / 2.0, errc::bad_config, "conrod shorter than crank radius");
        require(n_cylinders >= 1, errc::bad_config, "need at least one cylinder");
    }

    double piston_area() const { return std::numbers::pi / 4.0 * bore * bore; }
    double swept_volume() const { return piston_area() * stroke; }
    double clearance_volume() const { return swept_volume() / (compression_ratio - 1.0); }
    double max_volume() const { return clearance_volume() + swept_volume(); }
};

inline double crank_omega(double n_rpm) { return 2.0 * std::numbers::pi * n_rpm / 60.0; }  // [rad/s]

// Crank angle [deg] to time [s] at constant speed: 6*n degrees per second.
inline double crank_deg_to_seconds(double deg, double n_rpm) { return deg / (6.0 * n_rpm); }

// Piston displacement from TDC [m].
inline double piston_position(const CylinderGeometry& g, double alpha_deg) {
    double a = alpha_deg * std::numbers::pi / 180.0;
    double r = g.stroke / 2.0;
    double q = r / g.conrod_length * std::sin(a);
    return r * (1.0 - std::cos(a)) + g.conrod_length * (1.0 - std::sqrt(1.0 - q * q));
}

inline double cylinder_volume(const CylinderGeometry& g, double alpha_deg) {
    return g.clearance_volume() + g.piston_area() * piston_position(g, alpha_deg);
}

// Signed instantaneous piston speed [m/s]; zero at the dead centers.
inline double piston_speed(const CylinderGeometry& g, double alpha_deg, double n_rpm) {
    double a = alpha_deg * std::numbers::pi / 180.0;
    double r = g.stroke / 2.0;
    double lam = r / g.conrod_length;
    double s = std::sin(a), c = std::cos(a);
    double dsda = r * s * (1.0 + lam * c / std::sqrt(1.0 - lam * lam * s * s));
    return crank_omega(n_rpm) * dsda;
}

inline double mean_piston_speed(const CylinderGeometry& g, double n_rpm) {
    return 2.0 * g.stroke * n_rpm / 60.0;
}

}  // namespace thermolap
