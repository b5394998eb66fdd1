#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "thermolap/errors.hpp"
#include "thermolap/geometry.hpp"
#include "thermolap/grid.hpp"
#include "thermolap/histogram.hpp"
#include "thermolap/numerics.hpp"
#include "thermolap/pressure.hpp"

namespace thermolap {

inline constexpr double kGasConstant = 8.314462;  // [J/(mol K)]

// Cylinder-average gas temperature from the ideal gas law.
inline double mean_gas_temperature(double p, double V, double N) {
    require(p > 0.0 && V > 0.0 && N > 0.0, errc::non_positive_input,
            "mean_gas_temperature needs positive p, V, N");
    return p * V / (N * kGasConstant);
}

// Sphere-equivalent eddy length scale of the chamber volume.
inline double eddy_length(double V) { return std::cbrt(6.0 * V / std::numbers::pi); }

// ---------------------------------------------------------------------------
// Burn fraction (Rassweiler-Withrow pressure-difference method)
//
// The motored trace carries the polytropic behavior step by step, so the
// combustion pressure rise is  dp_i = p[i+1] - p[i] * (pm[i+1]/pm[i]),
// referred to the clearance volume and accumulated. Negative heat-release
// steps are clipped and counted.

struct BurnFraction {
    std::vector<double> x;  // mass fraction burned, in [0,1], monotone
    int clipped_steps = 0;
    double total_release = 0.0;  // volume-referred pressure sum [Pa]
};

inline BurnFraction burn_fraction(std::span<const double> angle_deg, std::span<const double> p_fired,
                                  std::span<const double> p_motored, std::span<const double> volume) {
    const std::size_t n = angle_deg.size();
    require(p_fired.size() == n && p_motored.size() == n && volume.size() == n, errc::grid_mismatch,
            "burn_fraction traces must share the crank-angle grid");
    require(n >= 3, errc::too_few_samples, "burn_fraction needs at least 3 samples");

    double v_ref = volume[0];
    for (double v : volume) v_ref = std::min(v_ref, v);

    BurnFraction out;
    out.x.assign(n, 0.0);
    std::vector<double> release(n, 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        require(p_motored[i] > 0.0 && p_fired[i] > 0.0, errc::non_positive_pressure,
                "burn_fraction pressure must be positive");
        double dp = p_fired[i + 1] - p_fired[i] * (p_motored[i + 1] / p_motored[i]);
        double v_mid = 0.5 * (volume[i] + volume[i + 1]);
        double d = dp * v_mid / v_ref;
        if (d < 0.0) {
            ++out.clipped_steps;
            d = 0.0;
        }
        release[i + 1] = release[i] + d;
        peak = std::max(peak, p_fired[i]);
    }
    out.total_release = release.back();
    // no discernible combustion: keep x identically zero
    if (out.total_release <= 1e-9 * peak) return out;
    for (std::size_t i = 0; i < n; ++i) out.x[i] = release[i] / out.total_release;
    return out;
}

// Polytropic unburnt-zone temperature from the ignition state onwards.
inline std::vector<double> unburnt_temperature(std::span<const double> p, double p_ign, double T_ign,
                                               double kappa_ub) {
    require(p_ign > 0.0, errc::non_positive_pressure, "ignition pressure must be positive");
    std::vector<double> T(p.size());
    double e = (kappa_ub - 1.0) / kappa_ub;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] > 0.0, errc::non_positive_pressure, "unburnt_temperature pressure must be positive");
        T[i] = T_ign * std::pow(p[i] / p_ign, e);
    }
    return T;
}

// Burnt volume fraction from the two-zone volume balance with ideal gas:
// y = 1 - (1-x) * T_ub / Tg, clamped into [0,1].
inline std::vector<double> burnt_volume_fraction(std::span<const double> x,
                                                 std::span<const double> T_ub,
                                                 std::span<const double> Tg) {
    require(x.size() == T_ub.size() && x.size() == Tg.size(), errc::grid_mismatch,
            "burnt_volume_fraction size mismatch");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = 1.0 - (1.0 - x[i]) * T_ub[i] / Tg[i];
        y[i] = std::clamp(v, 0.0, 1.0);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Lumped turbulence: dk/dt = -(2/3) (k/V) dV/dt - eps_c k^{3/2} / l
//
// Fixed-step RK4 on the trace grid; V is taken piecewise linear between
// samples (constant dV/dt per step), l piecewise linear. Steps that would
// drive k negative clamp to zero and are counted.

struct TkeResult {
    std::vector<double> k;  // [m^2/s^2]
    int clamped_steps = 0;
};

inline TkeResult solve_tke(std::span<const double> t, std::span<const double> V,
                           std::span<const double> l, double k_ivc, double eps_c) {
    const std::size_t n = t.size();
    require(V.size() == n && l.size() == n, errc::grid_mismatch, "solve_tke traces must share the grid");
    require(n >= 2, errc::too_few_samples, "solve_tke needs at least 2 samples");
    require(k_ivc >= 0.0 && eps_c >= 0.0, errc::non_positive_input, "k_ivc and eps_c must be non-negative");

    TkeResult out;
    out.k.assign(n, 0.0);
    out.k[0] = k_ivc;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double h = t[i + 1] - t[i];
        require(h > 0.0, errc::grid_mismatch, "solve_tke time grid must increase");
        double vdot = (V[i + 1] - V[i]) / h;
        auto rhs = [&](double k, double tau) {
            double a = (tau - t[i]) / h;
            double vol = V[i] + a * (V[i + 1] - V[i]);
            double len = l[i] + a * (l[i + 1] - l[i]);
            double kk = std::max(k, 0.0);
            return -(2.0 / 3.0) * kk / vol * vdot - eps_c * kk * std::sqrt(kk) / len;
        };
        double k0 = out.k[i];
        double f1 = rhs(k0, t[i]);
        double f2 = rhs(k0 + 0.5 * h * f1, t[i] + 0.5 * h);
        double f3 = rhs(k0 + 0.5 * h * f2, t[i] + 0.5 * h);
        double f4 = rhs(k0 + h * f3, t[i + 1]);
        double k1 = k0 + h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
        if (k1 < 0.0) {
            k1 = 0.0;
            ++out.clamped_steps;
        }
        out.k[i + 1] = k1;
    }
    return out;
}

// Characteristic velocity with scaled combustion convection:
// v = sqrt((8/3) k + v_p^2 + v_c^2),  v_c = y^{1/6} (B/4)(dy/dt - (T_ub/Tg) dx/dt).
inline double characteristic_velocity(double k, double v_p, double y, double dydt, double dxdt,
                                      double T_ub, double Tg, double bore) {
    require(Tg > 0.0, errc::non_positive_input, "characteristic_velocity needs Tg > 0");
    double v_c = 0.0;
    if (y > 0.0) v_c = std::pow(y, 1.0 / 6.0) * bore / 4.0 * (dydt - T_ub / Tg * dxdt);
    return std::sqrt((8.0 / 3.0) * std::max(k, 0.0) + v_p * v_p + v_c * v_c);
}

// ---------------------------------------------------------------------------
// HTC closure: power law alpha = C p^m v^m Tg^{0.75 - 1.62 m}
// (p in Pa, v in m/s, Tg in K; C absorbs the units).

struct HtcClosure {
    double scale = 1.0;     // C
    double exponent = 0.78; // m

    void validate() const {
        require(scale > 0.0, errc::bad_config, "HTC scale must be positive");
        require(exponent > 0.0 && exponent < 1.0, errc::bad_config, "HTC exponent must be in (0,1)");
    }
};

inline double htc_point(double p, double v, double Tg, const HtcClosure& c) {
    return c.scale * std::pow(p, c.exponent) * std::pow(v, c.exponent) *
           std::pow(Tg, 0.75 - 1.62 * c.exponent);
}

inline std::vector<double> htc_trace(std::span<const double> p, std::span<const double> v,
                                     std::span<const double> Tg, const HtcClosure& c) {
    require(p.size() == v.size() && p.size() == Tg.size(), errc::grid_mismatch,
            "htc_trace inputs must share the grid");
    std::vector<double> alpha(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) alpha[i] = htc_point(p[i], v[i], Tg[i], c);
    return alpha;
}

// Scale so the time-mean HTC matches a calibration target at one stationary point.
inline double calibrate_htc_scale(std::span<const double> t, std::span<const double> p,
                                  std::span<const double> v, std::span<const double> Tg,
                                  double exponent, double target_mean_alpha) {
    require(target_mean_alpha > 0.0, errc::non_positive_input, "calibration target must be positive");
    HtcClosure unit{1.0, exponent};
    auto a = htc_trace(p, v, Tg, unit);
    double mean = trapezoid(t, a) / (t.back() - t.front());
    require(mean > 0.0, errc::non_positive_input, "degenerate calibration trace");
    return target_mean_alpha / mean;
}

// ---------------------------------------------------------------------------
// Cycle aggregation to the (mean HTC, flux-weighted reference temperature) pair.

struct CycleResult {
    std::vector<double> alpha;  // crank-resolved trace (may be empty for aggregates)
    double alpha_mean = 0.0;    // [W/m^2 K]
    double T_eff = 0.0;         // flux-weighted gas temperature [K]
};

inline CycleResult cycle_aggregate(std::span<const double> angle_deg, std::span<const double> alpha,
                                   std::span<const double> Tg, double engine_speed) {
    const std::size_t n = angle_deg.size();
    require(alpha.size() == n && Tg.size() == n, errc::grid_mismatch,
            "cycle_aggregate traces must share the grid");
    require(n >= 2, errc::too_few_samples, "cycle_aggregate needs at least 2 samples");
    double span_deg = angle_deg.back() - angle_deg.front();
    double step = angle_deg[1] - angle_deg[0];
    require(std::abs(span_deg - 720.0) <= 2.0 * step + 1e-9, errc::incomplete_cycle,
            "cycle_aggregate expects one full 720 deg cycle");

    std::vector<double> t(n), aT(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = crank_deg_to_seconds(angle_deg[i] - angle_deg.front(), engine_speed);
        aT[i] = alpha[i] * Tg[i];
    }
    double ia = trapezoid(t, alpha);
    double iaT = trapezoid(t, aT);
    CycleResult r;
    r.alpha.assign(alpha.begin(), alpha.end());
    r.alpha_mean = ia / t.back();
    require(ia > 0.0, errc::zero_mean_htc, "cycle has zero mean HTC");
    r.T_eff = iaT / ia;
    return r;
}

// Normed 2D histogram over the (alpha_mean, T_eff) ensemble of one speed point.
inline HistogramNd build_htc_pdf(std::span<const CycleResult> ensemble, int n_bins_alpha = 12,
                                 int n_bins_T = 12) {
    require(ensemble.size() >= 2, errc::too_few_cycles,
            "need at least 2 cycles per speed point, got " + std::to_string(ensemble.size()));
    std::vector<double> a(ensemble.size()), T(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        a[i] = ensemble[i].alpha_mean;
        T[i] = ensemble[i].T_eff;
    }
    HistogramNd h({axis_from_samples(a, n_bins_alpha), axis_from_samples(T, n_bins_T)});
    for (std::size_t i = 0; i < ensemble.size(); ++i) h.add(std::array{a[i], T[i]});
    return h;
}

}  // namespace thermolap
