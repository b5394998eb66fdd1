#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "thermolap/cycle.hpp"
#include "thermolap/geometry.hpp"
#include "thermolap/numerics.hpp"

namespace thermolap {

// Least-squares polytropic exponent from the ln p - ln V slope over a window.
inline double fit_polytropic_exponent(std::span<const double> angle, std::span<const double> p,
                                      std::span<const double> V, double a_lo, double a_hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < angle.size(); ++i) {
        if (angle[i] < a_lo || angle[i] > a_hi) continue;
        double x = std::log(V[i]), y = std::log(p[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    require(n >= 3, errc::too_few_samples, "polytropic fit window holds fewer than 3 samples");
    double denom = sxx - sx * sx / static_cast<double>(n);
    require(std::abs(denom) > 0.0, errc::non_positive_input, "degenerate polytropic fit window");
    return -(sxy - sx * sy / static_cast<double>(n)) / denom;
}

// Stepwise polytropic motored pressure anchored at the window start, with the
// compression exponent before firing TDC and the expansion exponent after.
inline std::vector<double> synthesize_motored(std::span<const double> angle,
                                              std::span<const double> V, double p_start,
                                              double kappa_comp, double kappa_exp) {
    std::vector<double> p(angle.size());
    p[0] = p_start;
    for (std::size_t i = 0; i + 1 < angle.size(); ++i) {
        double kappa = angle[i] < 360.0 ? kappa_comp : kappa_exp;
        p[i + 1] = p[i] * std::pow(V[i] / V[i + 1], kappa);
    }
    return p;
}

struct FiredCycleParams {
    CylinderGeometry geometry;
    double engine_speed = 0.0;    // [rpm]
    double amount_of_substance = 0.0;  // N [mol]
    double alpha_ign_deg = 331.0;
    double kappa_ub = 1.32;
    double k_ivc = 0.0;           // [m^2/s^2]
    double eps_c = 2.2;
    HtcClosure closure;
    std::array<double, 2> compression_fit_window = {220.0, 330.0};
    std::array<double, 2> expansion_fit_window = {460.0, 530.0};
};

struct FiredCycleAnalysis {
    CycleResult result;
    std::vector<double> x, y, Tg, k;
    double kappa_comp = 0.0, kappa_exp = 0.0;
    int clipped_release_steps = 0;
};

// Full in-cylinder analysis of one fired cycle on a 0..720 deg grid:
// burn fraction from the pressure-difference method against a synthesized
// motored trace, two-zone volume fractions, lumped turbulence, characteristic
// velocity and the HTC trace, aggregated to the (alpha, T_eff) pair.
inline FiredCycleAnalysis analyze_fired_cycle(std::span<const double> angle,
                                              std::span<const double> pressure,
                                              const FiredCycleParams& par) {
    const std::size_t n = angle.size();
    require(pressure.size() == n, errc::grid_mismatch, "pressure/angle size mismatch");
    require(par.amount_of_substance > 0.0, errc::non_positive_input, "need a positive charge amount");

    FiredCycleAnalysis out;
    std::vector<double> V(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        V[i] = cylinder_volume(par.geometry, angle[i]);
        t[i] = crank_deg_to_seconds(angle[i] - angle.front(), par.engine_speed);
    }
    out.Tg.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.Tg[i] = mean_gas_temperature(pressure[i], V[i], par.amount_of_substance);

    // closed part of the cycle (IVC at BDC to EVO at BDC)
    std::size_t lo = 0, hi = n - 1;
    while (lo < n && angle[lo] < 180.0 - 1e-9) ++lo;
    while (hi > 0 && angle[hi] > 540.0 + 1e-9) --hi;
    require(hi > lo + 2, errc::incomplete_cycle, "closed cycle window missing from trace");
    const std::size_t wn = hi - lo + 1;
    std::span<const double> a_w(angle.data() + lo, wn), p_w(pressure.data() + lo, wn);
    std::span<const double> V_w(V.data() + lo, wn);

    out.kappa_comp = fit_polytropic_exponent(a_w, p_w, V_w, par.compression_fit_window[0],
                                             par.compression_fit_window[1]);
    out.kappa_exp = fit_polytropic_exponent(a_w, p_w, V_w, par.expansion_fit_window[0],
                                            par.expansion_fit_window[1]);
    auto p_mot = synthesize_motored(a_w, V_w, p_w[0], out.kappa_comp, out.kappa_exp);
    auto burn = burn_fraction(a_w, p_w, p_mot, V_w);
    out.clipped_release_steps = burn.clipped_steps;

    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < wn; ++i) out.x[lo + i] = burn.x[i];
    for (std::size_t i = hi + 1; i < n; ++i) out.x[i] = burn.x.back();

    // unburnt temperature: polytropic from the ignition state, mean gas
    // temperature before ignition
    std::vector<double> T_ub(out.Tg);
    std::size_t ign = lo;
    while (ign < hi && angle[ign] < par.alpha_ign_deg) ++ign;
    {
        std::span<const double> p_tail(pressure.data() + ign, n - ign);
        auto tail = unburnt_temperature(p_tail, pressure[ign], out.Tg[ign], par.kappa_ub);
        for (std::size_t i = ign; i < n; ++i) T_ub[i] = tail[i - ign];
    }
    out.y = burnt_volume_fraction(out.x, T_ub, out.Tg);

    auto dxdt = derivative(t, out.x);
    auto dydt = derivative(t, out.y);

    out.k.assign(n, par.k_ivc);
    {
        std::vector<double> t_cl(wn), l_cl(wn);
        for (std::size_t i = 0; i < wn; ++i) {
            t_cl[i] = t[lo + i];
            l_cl[i] = eddy_length(V_w[i]);
        }
        auto tke = solve_tke(t_cl, V_w, l_cl, par.k_ivc, par.eps_c);
        for (std::size_t i = 0; i < wn; ++i) out.k[lo + i] = tke.k[i];
    }

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double vp = piston_speed(par.geometry, angle[i], par.engine_speed);
        v[i] = characteristic_velocity(out.k[i], vp, out.y[i], dydt[i], dxdt[i], T_ub[i], out.Tg[i],
                                       par.geometry.bore);
    }
    auto alpha = htc_trace(pressure, v, out.Tg, par.closure);
    out.result = cycle_aggregate(angle, alpha, out.Tg, par.engine_speed);
    return out;
}

}  // namespace thermolap
