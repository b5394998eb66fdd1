#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "thermolap/config.hpp"
#include "thermolap/csv.hpp"
#include "thermolap/full_load.hpp"
#include "thermolap/geometry.hpp"
#include "thermolap/pressure.hpp"
#include "thermolap/thermal_net.hpp"
#include "thermolap/water_jacket.hpp"

namespace thermolap::synth {

struct SynthOptions {
    double duration = 180.0;       // [s]
    double sample_period = 0.01;   // telemetry rate [s]
    std::uint64_t seed = 1;
    int n_speed_points = 14;
    int n_cycles = 60;
    double pressure_step_deg = 0.1;
    double cycle_scatter = 0.05;   // relative combustion-amplitude scatter
    int n_cylinders = 4;
    // repeating lap block: samples per label, 2/3 full load, 1/4 coasting
    int block_full = 200, block_coast = 75, block_part = 25;
};

namespace detail {

// deterministic standard normal (Box-Muller over the engine's canonical reals)
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = std::uniform_real_distribution<double>(1e-12, 1.0)(rng_);
        double u2 = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        have_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_ = false;
};

}  // namespace detail

inline CylinderGeometry synth_geometry(int n_cylinders) {
    CylinderGeometry g;
    g.bore = 0.086;
    g.stroke = 0.066;
    g.conrod_length = 0.12;
    g.compression_ratio = 10.0;
    g.n_cylinders = n_cylinders;
    return g;
}

inline FullLoadTable synth_full_load_table(int n_points) {
    FullLoadTable t;
    for (int i = 0; i < n_points; ++i) {
        FullLoadPoint p;
        double n = 4000.0 + 500.0 * i;  // 4000 .. 10500 for 14 points
        p.state.n_engine = n;
        p.state.m_air = 1200.0 + 0.06 * (n - 4000.0);          // boosted charge [mg/stroke]
        p.state.t_int = 300.0;
        p.state.T_i = 180.0 + 0.02 * (n - 4000.0) - 2.2e-6 * (n - 4000.0) * (n - 4000.0);
        p.state.m_fuel = p.state.m_air / 12.5;                 // slightly rich of 14.7
        p.t_exh = 950.0 + 0.02 * (n - 4000.0);
        p.alpha_ign = 331.0;  // 29 deg before firing TDC
        t.points.push_back(p);
    }
    t.validate();
    return t;
}

// Telemetry with exact duty counts: repeating [full-load, coasting, part-load]
// blocks; full-load samples sit exactly on the stationary curve.
inline void write_synth_telemetry(const std::filesystem::path& path, const FullLoadTable& fl,
                                  const SynthOptions& opt) {
    const std::size_t n_samples =
        static_cast<std::size_t>(std::llround(opt.duration / opt.sample_period)) + 1;
    const int block = opt.block_full + opt.block_coast + opt.block_part;

    csv::Writer w(path);
    w.header({"t", "n_engine", "m_air", "t_int", "T_i", "m_fuel"});
    const double n_lo = 5000.0, n_hi = 9800.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double t = static_cast<double>(i) * opt.sample_period;
        int pos = static_cast<int>(i % static_cast<std::size_t>(block));
        EngineState s;
        s.t_int = 300.0;
        if (pos < opt.block_full) {
            double a = static_cast<double>(pos) / static_cast<double>(opt.block_full - 1);
            s = fl.interpolate_state(n_lo + (n_hi - n_lo) * a);
        } else if (pos < opt.block_full + opt.block_coast) {
            double a = static_cast<double>(pos - opt.block_full) /
                       static_cast<double>(opt.block_coast - 1);
            s.n_engine = n_hi - (n_hi - 5200.0) * a;
            s.m_air = 140.0;  // closed throttle
            s.t_int = 300.0;
            s.T_i = 0.0;
            s.m_fuel = 0.0;
        } else {
            double a = static_cast<double>(pos - opt.block_full - opt.block_coast) /
                       static_cast<double>(std::max(opt.block_part - 1, 1));
            double n = 5200.0 - 200.0 * a;
            EngineState ref = fl.interpolate_state(n);
            s.n_engine = n;
            s.m_air = 0.55 * ref.m_air;
            s.t_int = 300.0;
            s.T_i = 0.45 * ref.T_i;
            s.m_fuel = s.m_air / 14.7;  // leaner in part load
        }
        w.row({t, s.n_engine, s.m_air, s.t_int, s.T_i, s.m_fuel});
    }
    w.write();
}

// Wiebe forward model with per-cycle combustion scatter; the motored base is
// a two-exponent stepwise polytropic over compression and expansion.
inline void write_synth_pressure(const std::filesystem::path& dir, const FullLoadTable& fl,
                                 const CylinderGeometry& geom, double molar_mass,
                                 const SynthOptions& opt) {
    std::filesystem::create_directories(dir);
    const double kappa_comp = 1.32, kappa_exp = 1.28;
    const double a_w = 5.0, m_w = 2.0, dur = 60.0;

    std::vector<double> angle;
    for (double a = 0.0; a <= 720.0 + 1e-9; a += opt.pressure_step_deg) angle.push_back(a);
    const std::size_t n = angle.size();
    std::vector<double> volume(n);
    for (std::size_t i = 0; i < n; ++i) volume[i] = cylinder_volume(geom, angle[i]);
    double v_ref = geom.clearance_volume();

    for (std::size_t sp = 0; sp < fl.size(); ++sp) {
        const FullLoadPoint& p = fl.points[sp];
        detail::Gaussian gauss(opt.seed * 1000003 + sp);

        double N = (p.state.m_air + p.state.m_fuel) * 1e-6 / molar_mass;
        double p_ivc = N * kGasConstant * p.state.t_int / geom.max_volume();
        double ign = p.alpha_ign;

        std::vector<double> wiebe(n, 0.0), ratio(n - 1, 1.0), comb_geom(n - 1, 0.0);
        double w_end = 1.0 - std::exp(-a_w * std::pow((540.0 - ign) / dur, m_w + 1.0));
        for (std::size_t i = 0; i < n; ++i) {
            double a = angle[i];
            if (a >= 180.0 && a <= 540.0)
                wiebe[i] = a < ign ? 0.0
                                   : (1.0 - std::exp(-a_w * std::pow((a - ign) / dur, m_w + 1.0))) /
                                         w_end;
            else
                wiebe[i] = a > 540.0 ? 1.0 : 0.0;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (angle[i] >= 180.0 && angle[i + 1] <= 540.0 + 1e-9) {
                double kappa = angle[i] < 360.0 ? kappa_comp : kappa_exp;
                ratio[i] = std::pow(volume[i] / volume[i + 1], kappa);
            }
            comb_geom[i] = v_ref / (0.5 * (volume[i] + volume[i + 1]));
        }

        // base combustion amplitude scaled with charge mass
        double scale0 = 8.0e6 * (p.state.m_air + p.state.m_fuel) / 1300.0;

        PressureTrace trace;
        trace.engine_speed = p.state.n_engine;
        trace.crank_angle = angle;
        trace.cycles.resize(static_cast<std::size_t>(opt.n_cycles));
        for (int c = 0; c < opt.n_cycles; ++c) {
            double scale = scale0 * (1.0 + opt.cycle_scatter * gauss());
            auto& pc = trace.cycles[static_cast<std::size_t>(c)];
            pc.assign(n, p_ivc);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (angle[i + 1] <= 180.0 || angle[i] >= 540.0) {
                    pc[i + 1] = p_ivc;  // gas exchange at intake level
                    continue;
                }
                double dp_comb = (wiebe[i + 1] - wiebe[i]) * scale * comb_geom[i];
                pc[i + 1] = pc[i] * ratio[i] + dp_comb;
            }
        }
        char name[64];
        std::snprintf(name, sizeof name, "ptrace_%05d.csv", static_cast<int>(p.state.n_engine));
        save_pressure_trace(dir / name, trace);
    }
}

// ~50 node network following the measuring-point layout: per cylinder the
// chamber wall, liner shoulder + lower liner, inlet/outlet channels, valve
// rings and a local head mass; shared head/block cores and intermediate
// positions between cylinders.
inline ThermalNetwork synth_network(int n_cylinders) {
    ThermalNetwork net;
    auto node = [&](const std::string& id, double C, double T0) {
        net.nodes.push_back({id, C, T0});
    };
    auto link = [&](const std::string& a, const std::string& b, double G) {
        net.links.push_back({a, b, G});
    };
    auto patch = [&](const std::string& n, double area, const std::string& ch) {
        net.patches.push_back({n, area, ch});
    };

    node("head_core", 4500.0, 380.0);
    node("block_core", 6000.0, 370.0);
    link("head_core", "block_core", 120.0);

    int water_patch_id = 0;
    auto water_patch = [&](const std::string& n, double area) {
        patch(n, area, "water_p" + std::to_string(water_patch_id++));
    };

    for (int c = 1; c <= n_cylinders; ++c) {
        std::string s = std::to_string(c);
        node("chamber_wall_" + s, 900.0, 430.0);
        node("liner_shoulder_" + s, 500.0, 410.0);
        node("liner_lower_" + s, 700.0, 390.0);
        node("inlet_channel_" + s, 350.0, 340.0);
        node("outlet_channel_" + s, 350.0, 450.0);
        node("inlet_ring_" + s, 120.0, 400.0);
        node("outlet_ring_" + s, 120.0, 480.0);
        node("head_local_" + s, 1200.0, 390.0);
        node("block_local_" + s, 1500.0, 375.0);

        link("chamber_wall_" + s, "liner_shoulder_" + s, 55.0);
        link("chamber_wall_" + s, "head_local_" + s, 80.0);
        link("liner_shoulder_" + s, "liner_lower_" + s, 65.0);
        link("liner_lower_" + s, "block_local_" + s, 75.0);
        link("inlet_channel_" + s, "head_local_" + s, 60.0);
        link("outlet_channel_" + s, "head_local_" + s, 60.0);
        link("inlet_ring_" + s, "head_local_" + s, 45.0);
        link("outlet_ring_" + s, "head_local_" + s, 35.0);
        link("inlet_ring_" + s, "inlet_channel_" + s, 25.0);
        link("outlet_ring_" + s, "outlet_channel_" + s, 25.0);
        link("head_local_" + s, "head_core", 90.0);
        link("block_local_" + s, "block_core", 110.0);
        link("liner_shoulder_" + s, "block_local_" + s, 40.0);

        patch("chamber_wall_" + s, 0.0116, "chamber_cyl" + s);
        patch("inlet_ring_" + s, 0.0012, "intake_valve");
        patch("outlet_ring_" + s, 0.0012, "exhaust_valve");
        patch("inlet_channel_" + s, 0.0042, "intake_port");
        patch("outlet_channel_" + s, 0.0042, "exhaust_port");
        water_patch("liner_shoulder_" + s, 0.009);
        water_patch("liner_lower_" + s, 0.013);
        water_patch("head_local_" + s, 0.016);
        water_patch("outlet_channel_" + s, 0.006);

        net.probes.push_back({"liner_shoulder_" + s, "liner_shoulder_cyl" + s});
        net.probes.push_back({"inlet_channel_" + s, "inlet_channel_cyl" + s});
        net.probes.push_back({"outlet_channel_" + s, "outlet_channel_cyl" + s});
        net.probes.push_back({"inlet_ring_" + s, "inlet_ring_cyl" + s});
        net.probes.push_back({"outlet_ring_" + s, "outlet_ring_cyl" + s});
    }
    for (int c = 1; c < n_cylinders; ++c) {
        std::string id = "intermediate_" + std::to_string(c) + std::to_string(c + 1);
        node(id, 400.0, 395.0);
        link(id, "chamber_wall_" + std::to_string(c), 50.0);
        link(id, "chamber_wall_" + std::to_string(c + 1), 50.0);
        link(id, "head_core", 40.0);
        net.probes.push_back({id, "intermediate_" + std::to_string(c) + std::to_string(c + 1)});
    }
    // passive structure: manifolds, covers, mounts
    node("mount_front", 2500.0, 350.0);
    node("mount_rear", 2500.0, 350.0);
    node("cam_cover", 1800.0, 360.0);
    node("intake_manifold", 900.0, 320.0);
    node("exhaust_manifold", 1100.0, 500.0);
    node("oil_gallery", 1400.0, 370.0);
    node("front_cover", 1200.0, 355.0);
    node("rear_cover", 1200.0, 355.0);
    node("ladder_frame", 3000.0, 350.0);
    link("mount_front", "block_core", 20.0);
    link("mount_rear", "block_core", 20.0);
    link("cam_cover", "head_core", 30.0);
    link("intake_manifold", "head_core", 15.0);
    link("exhaust_manifold", "head_core", 25.0);
    link("oil_gallery", "block_core", 50.0);
    link("front_cover", "block_core", 18.0);
    link("rear_cover", "block_core", 18.0);
    link("ladder_frame", "block_core", 35.0);
    return net;
}

inline ReferenceHtcField synth_reference_field(const ThermalNetwork& net, double n_ref, double m) {
    ReferenceHtcField field;
    field.n_ref = n_ref;
    field.reynolds_exponent = m;
    int k = 0;
    for (const auto& p : net.patches) {
        if (p.channel.rfind("water_p", 0) != 0) continue;
        ReferencePatch rp;
        rp.patch_id = k;
        rp.area = p.area;
        rp.alpha_ref = 9000.0 + 1400.0 * static_cast<double>((k * 37) % 7);
        rp.state = PatchState::active;
        field.patches.push_back(rp);
        ++k;
    }
    return field;
}

inline void write_gas_props(const std::filesystem::path& path) {
    csv::Writer w(path);
    w.header({"T_K", "nu_m2s", "lambda_WmK", "Pr"});
    // dry air, ambient to exhaust temperatures
    w.row({300.0, 1.59e-5, 0.0263, 0.707});
    w.row({400.0, 2.64e-5, 0.0338, 0.690});
    w.row({600.0, 5.26e-5, 0.0469, 0.685});
    w.row({800.0, 8.22e-5, 0.0573, 0.709});
    w.row({1000.0, 11.9e-5, 0.0667, 0.726});
    w.row({1400.0, 20.3e-5, 0.0910, 0.736});
    w.write();
}

inline void write_valve_lift(const std::filesystem::path& path, double open_deg, double close_deg,
                             double max_lift, double max_area) {
    csv::Writer w(path);
    w.header({"alpha_cr_deg", "lift_m", "area_m2"});
    for (double a = 0.0; a <= 720.0 + 1e-9; a += 5.0) {
        double lift = 0.0;
        if (a > open_deg && a < close_deg) {
            double x = (a - open_deg) / (close_deg - open_deg);
            lift = max_lift * std::sin(std::numbers::pi * x);
        }
        w.row({a, lift, max_area * (max_lift > 0.0 ? lift / max_lift : 0.0)});
    }
    w.write();
}

inline void write_water_channel(const std::filesystem::path& path, double duration) {
    csv::Writer w(path);
    w.header({"t_s", "T_in_K", "T_out_K", "vol_flow_m3s"});
    for (double t = 0.0; t <= duration + 1e-9; t += 0.1) {
        double T_in = 373.65 + 0.8 * std::sin(2.0 * std::numbers::pi * t / 45.0);
        double T_out = T_in + 4.5 + 0.6 * std::sin(2.0 * std::numbers::pi * t / 30.0 + 0.7);
        w.row({t, T_in, T_out, 2.32e-3});
    }
    w.write();
}

// Creates a complete demo workspace: inputs plus config.json.
inline std::filesystem::path generate_workspace(const std::filesystem::path& dir,
                                                const SynthOptions& opt = {}) {
    std::filesystem::create_directories(dir);
    auto geom = synth_geometry(opt.n_cylinders);
    auto fl = synth_full_load_table(opt.n_speed_points);

    save_full_load_table(dir / "full_load_ref.csv", fl);
    write_synth_telemetry(dir / "telemetry.csv", fl, opt);
    write_synth_pressure(dir / "ptraces", fl, geom, 28.9e-3, opt);
    auto net = synth_network(opt.n_cylinders);
    save_network(dir / "network.txt", net);
    save_reference_field(dir / "water_ref.csv", synth_reference_field(net, 7000.0, 0.7));
    write_gas_props(dir / "gas_props.csv");
    write_valve_lift(dir / "intake_lift.csv", 0.0, 220.0, 0.010, 8.0e-4);
    write_valve_lift(dir / "exhaust_lift.csv", 500.0, 720.0, 0.009, 7.0e-4);
    write_water_channel(dir / "water_channel.csv", opt.duration);

    nlohmann::json j = {
        {"engine",
         {{"bore_m", geom.bore},
          {"stroke_m", geom.stroke},
          {"conrod_m", geom.conrod_length},
          {"compression_ratio", geom.compression_ratio},
          {"n_cylinders", geom.n_cylinders},
          {"molar_mass_kg_mol", 28.9e-3},
          {"kappa_ub", 1.32},
          {"ambient_pressure_Pa", 1.0e5}}},
        {"closure", {{"m", 0.78}, {"scale_C", 0.05}, {"eps_c", 2.2}, {"c_ivc", 0.5}}},
        {"coasting", {{"kappa", 1.35}, {"step_deg", 0.5}}},
        {"part_load", {{"delta_theta_K", 2200.0}, {"stoich_air_fuel_ratio", 14.7}}},
        {"edges",
         {{"n_engine", {1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0, 7000.0, 8000.0, 9000.0,
                        10000.0, 11000.0}},
          {"m_air", {0.0, 150.0, 300.0, 450.0, 600.0, 750.0, 900.0, 1050.0, 1200.0, 1350.0,
                     1500.0, 1650.0, 1800.0, 1950.0}},
          {"t_int", {290.0, 305.0, 320.0}},
          {"T_i", {-5.0, 0.5, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0}},
          {"m_fuel", {0.0, 1.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0}}}},
        {"full_load_margin", 0.95},
        {"pdf", {{"n_bins_alpha", 12}, {"n_bins_T", 12}}},
        {"ports",
         {{"intake",
           {{"valve_diameter_m", 0.031},
            {"duct_diameter_m", 0.034},
            {"port_length_m", 0.08},
            {"lift_file", "intake_lift.csv"},
            {"calibration_c", 0.02}}},
          {"exhaust",
           {{"valve_diameter_m", 0.028},
            {"duct_diameter_m", 0.030},
            {"port_length_m", 0.09},
            {"lift_file", "exhaust_lift.csv"},
            {"calibration_c", 0.02}}}}},
        {"water",
         {{"m", 0.7},
          {"n_ref_policy", "from_field"},
          {"t_waterin_K", 373.65},
          {"density_kgm3", 1000.0},
          {"c_p_JkgK", 4186.0},
          {"sensor_tau_c_s", 2.0}}},
        {"solver", {{"dt_s", 0.015}, {"write_binary_bc", false}}},
        {"cylinder_fuel_scale", {1.0, 0.985, 1.0, 1.02}},
        {"paths",
         {{"telemetry", "telemetry.csv"},
          {"pressure_dir", "ptraces"},
          {"full_load_ref", "full_load_ref.csv"},
          {"network", "network.txt"},
          {"reference_htc", "water_ref.csv"},
          {"gas_props", "gas_props.csv"},
          {"water_channel", "water_channel.csv"}}}};
    std::ofstream out(dir / "config.json");
    out << j.dump(2) << "\n";
    return dir / "config.json";
}

}  // namespace thermolap::synth
