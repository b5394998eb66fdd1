#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/histogram.hpp"
#include "thermolap/numerics.hpp"

namespace thermolap {

enum class PatchState { active, zero_flux, degenerate_dT };

struct ReferencePatch {
    int patch_id = 0;
    double area = 0.0;       // [m^2]
    double alpha_ref = 0.0;  // [W/(m^2 K)]
    PatchState state = PatchState::active;
};

// Spatial reference pattern of the water-side HTC plus the separation
// parameters: alpha(x,t) = alpha_ref(x) * (n(t)/n_ref)^m.
struct ReferenceHtcField {
    std::vector<ReferencePatch> patches;
    double n_ref = 0.0;             // reference engine speed [rpm]
    double reynolds_exponent = 0.7; // m

    void validate() const {
        require(n_ref > 0.0, errc::bad_config, "reference speed must be positive");
        require(reynolds_exponent > 0.0 && reynolds_exponent < 1.0, errc::bad_config,
                "Reynolds exponent must be in (0,1)");
        for (const auto& p : patches) {
            require(p.area > 0.0, errc::bad_config, "patch area must be positive");
            if (p.state == PatchState::active)
                require(p.alpha_ref > 0.0, errc::bad_config, "active patch needs alpha_ref > 0");
        }
    }
};

// alpha_ref = (q_cond . n) / (T_ref - T_s) per patch. Convention: flux is
// given as the inward-oriented projection, so heat leaving the solid toward
// a cooler fluid (flux < 0, T_ref < T_s) maps to a positive coefficient.
// Near-zero temperature differences flag the patch instead of dividing.
inline ReferenceHtcField map_reference_htc(std::span<const double> flux_dot_n,
                                           std::span<const double> T_s, double T_ref,
                                           std::span<const double> areas, double n_ref,
                                           double reynolds_exponent, double dT_tolerance = 1e-6) {
    require(flux_dot_n.size() == T_s.size() && flux_dot_n.size() == areas.size(),
            errc::grid_mismatch, "map_reference_htc inputs must align");
    ReferenceHtcField field;
    field.n_ref = n_ref;
    field.reynolds_exponent = reynolds_exponent;
    field.patches.reserve(flux_dot_n.size());
    for (std::size_t i = 0; i < flux_dot_n.size(); ++i) {
        ReferencePatch p;
        p.patch_id = static_cast<int>(i);
        p.area = areas[i];
        double dT = T_ref - T_s[i];
        if (std::abs(dT) < dT_tolerance) {
            p.state = PatchState::degenerate_dT;
            p.alpha_ref = 0.0;
        } else if (flux_dot_n[i] == 0.0) {
            p.state = PatchState::zero_flux;
            p.alpha_ref = 0.0;
        } else {
            p.alpha_ref = flux_dot_n[i] / dT;
            p.state = PatchState::active;
        }
        field.patches.push_back(p);
    }
    return field;
}

// Power-mean reference speed n_ref = (<n^m>)^(1/m) over a speed histogram.
inline double reference_speed(const HistogramNd& speed_hist, double m) {
    require(speed_hist.dim() == 1, errc::grid_mismatch, "reference_speed needs a 1D speed histogram");
    require(m > 0.0, errc::non_positive_input, "reference_speed exponent must be positive");
    require(speed_hist.total() > 0.0, errc::empty_histogram, "empty speed histogram");
    double acc = 0.0;
    speed_hist.for_each_occupied([&](std::size_t f, double) {
        double n = speed_hist.axis(0).center(speed_hist.unflatten(f)[0]);
        require(n > 0.0, errc::non_positive_input, "speed histogram has non-positive speeds");
        acc += std::pow(n, m) * speed_hist.mass_flat(f);
    });
    return std::pow(acc, 1.0 / m);
}

// Separation approach: multiplicative engine-speed scaling, spatial pattern
// preserved (per-patch ratios constant in time).
inline std::vector<double> scale_htc(const ReferenceHtcField& field, double n_engine) {
    require(n_engine >= 0.0, errc::non_positive_input, "engine speed must be non-negative");
    field.validate();
    double factor = std::pow(n_engine / field.n_ref, field.reynolds_exponent);
    std::vector<double> alpha(field.patches.size());
    for (std::size_t i = 0; i < field.patches.size(); ++i)
        alpha[i] = field.patches[i].alpha_ref * factor;
    return alpha;
}

inline double water_heat_flow(double mass_flow, double c_p, double T_in, double T_out) {
    require(mass_flow >= 0.0, errc::non_positive_input, "mass flow must be non-negative");
    return mass_flow * c_p * (T_out - T_in);
}

inline double water_heat_flow_volume(double volume_flow, double density, double c_p, double T_in,
                                     double T_out) {
    require(volume_flow >= 0.0, errc::non_positive_input, "volume flow must be non-negative");
    require(density > 0.0, errc::non_positive_input, "density must be positive");
    return water_heat_flow(volume_flow * density, c_p, T_in, T_out);
}

// One measured water temperature channel and its sensor time constant.
struct WaterSensorChannel {
    std::vector<double> t;  // [s], strictly increasing
    std::vector<double> T;  // [K]
    double tau_c = 0.0;     // [s]

    void validate() const {
        require(t.size() == T.size(), errc::grid_mismatch, "channel columns must align");
        require(tau_c >= 0.0, errc::bad_config, "sensor time constant must be non-negative");
        for (std::size_t i = 1; i < t.size(); ++i)
            require(t[i] > t[i - 1], errc::non_monotone_time, "channel timestamps must increase");
    }
};

// Inverse first-order lag filter: T_cor = T + tau_c dT/dt.
inline std::vector<double> sensor_lag_correct(const WaterSensorChannel& channel) {
    channel.validate();
    require(channel.t.size() >= 3, errc::too_few_samples,
            "sensor lag correction needs at least 3 samples");
    auto d = derivative(channel.t, channel.T);
    std::vector<double> out(channel.T.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = channel.T[i] + channel.tau_c * d[i];
    return out;
}

// --- file I/O ---------------------------------------------------------------

inline ReferenceHtcField load_reference_field(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    ReferenceHtcField field;
    field.n_ref = t.meta_number("n_ref_rpm", ctx);
    field.reynolds_exponent = t.meta_number("m", ctx);
    int id_col = t.require_column("patch_id", ctx);
    int area_col = t.require_column("area_m2", ctx);
    int a_col = t.require_column("alpha_ref_Wm2K", ctx);
    for (const auto& row : t.rows) {
        ReferencePatch p;
        p.patch_id = static_cast<int>(row[static_cast<std::size_t>(id_col)]);
        p.area = row[static_cast<std::size_t>(area_col)];
        p.alpha_ref = row[static_cast<std::size_t>(a_col)];
        p.state = p.alpha_ref > 0.0 ? PatchState::active : PatchState::zero_flux;
        field.patches.push_back(p);
    }
    field.validate();
    return field;
}

inline void save_reference_field(const std::filesystem::path& path, const ReferenceHtcField& field) {
    csv::Writer w(path);
    w.meta("n_ref_rpm", field.n_ref);
    w.meta("m", field.reynolds_exponent);
    w.header({"patch_id", "area_m2", "alpha_ref_Wm2K"});
    for (const auto& p : field.patches)
        w.row({static_cast<double>(p.patch_id), p.area, p.alpha_ref});
    w.write();
}

struct WaterChannelData {
    std::vector<double> t, T_in, T_out, vol_flow;
};

inline WaterChannelData load_water_channel(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    WaterChannelData d;
    d.t = t.column("t_s", ctx);
    d.T_in = t.column("T_in_K", ctx);
    d.T_out = t.column("T_out_K", ctx);
    d.vol_flow = t.column("vol_flow_m3s", ctx);
    return d;
}

}  // namespace thermolap
