#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermolap/coasting.hpp"
#include "thermolap/cycle.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/gas_exchange.hpp"
#include "thermolap/geometry.hpp"
#include "thermolap/grid.hpp"
#include "thermolap/part_load.hpp"
#include "thermolap/telemetry.hpp"

namespace thermolap {

struct PortConfig {
    double valve_diameter = 0.030;
    double duct_diameter = 0.034;
    double port_length = 0.08;
    std::string lift_file;
    double calibration_c = 0.02;  // intake port Nu = c Re
};

struct WaterConfig {
    double reynolds_exponent = 0.7;
    std::string n_ref_policy = "from_field";  // or "power_mean"
    double t_waterin = 373.65;                // [K]
    double density = 1000.0;                  // [kg/m^3]
    double c_p = 4186.0;                      // [J/(kg K)]
    double sensor_tau_c = 0.0;                // [s]
};

struct ClosureCalibration {
    double speed_rpm = 6000.0;
    double target_alpha_mean = 1200.0;  // [W/(m^2 K)]
};

struct PipelineConfig {
    std::filesystem::path base_dir;

    CylinderGeometry geometry;
    double molar_mass = 28.9e-3;  // [kg/mol]
    double kappa_ub = 1.32;
    double ambient_pressure = 1.0e5;

    HtcClosure closure;  // scale may be overridden by calibration
    std::optional<ClosureCalibration> calibration;
    double eps_c = 2.2;
    double c_ivc = 0.5;

    CoastingConfig coasting;
    PartLoadConfig part_load;

    std::array<std::vector<double>, kStateDims> edges;
    double full_load_margin = 0.95;
    int pdf_bins_alpha = 12;
    int pdf_bins_T = 12;

    // burn analysis windows [deg] for the polytropic exponent fits
    std::array<double, 2> compression_fit_window = {220.0, 330.0};
    std::array<double, 2> expansion_fit_window = {460.0, 530.0};

    PortConfig intake_port, exhaust_port;
    WaterConfig water;

    double dt_sim = 0.015;  // [s]
    bool write_binary_bc = false;
    std::vector<double> cylinder_fuel_scale;  // per-cylinder m_fuel factors

    // input files (resolved against base_dir)
    std::filesystem::path telemetry_file, pressure_dir, full_load_ref_file, network_file,
        reference_htc_file, gas_props_file, water_channel_file;

    EdgesGrid edges_grid() const {
        auto copy = edges;
        return EdgesGrid::from_edges(std::move(copy));
    }

    std::filesystem::path resolve(const std::filesystem::path& p) const {
        return p.is_absolute() ? p : base_dir / p;
    }
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

}  // namespace detail

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_failure, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(errc::bad_config, "config parse error: " + std::string(e.what()));
    }

    PipelineConfig c;
    c.base_dir = path.parent_path();
    try {
        const auto& eng = j.at("engine");
        c.geometry.bore = eng.at("bore_m").get<double>();
        c.geometry.stroke = eng.at("stroke_m").get<double>();
        c.geometry.conrod_length = eng.at("conrod_m").get<double>();
        c.geometry.compression_ratio = eng.at("compression_ratio").get<double>();
        c.geometry.n_cylinders = detail::get_or(eng, "n_cylinders", 1);
        c.molar_mass = detail::get_or(eng, "molar_mass_kg_mol", c.molar_mass);
        c.kappa_ub = detail::get_or(eng, "kappa_ub", c.kappa_ub);
        c.ambient_pressure = detail::get_or(eng, "ambient_pressure_Pa", c.ambient_pressure);

        const auto& cl = j.at("closure");
        c.closure.exponent = detail::get_or(cl, "m", 0.78);
        c.closure.scale = detail::get_or(cl, "scale_C", 1.0);
        if (cl.contains("calibration")) {
            ClosureCalibration cal;
            cal.speed_rpm = cl["calibration"].at("speed_rpm").get<double>();
            cal.target_alpha_mean = cl["calibration"].at("target_alpha_mean_Wm2K").get<double>();
            c.calibration = cal;
        }
        c.eps_c = detail::get_or(cl, "eps_c", c.eps_c);
        c.c_ivc = detail::get_or(cl, "c_ivc", c.c_ivc);

        if (j.contains("coasting")) {
            const auto& co = j["coasting"];
            c.coasting.kappa = detail::get_or(co, "kappa", c.coasting.kappa);
            c.coasting.step_deg = detail::get_or(co, "step_deg", c.coasting.step_deg);
        }
        c.coasting.ambient_pressure = c.ambient_pressure;
        c.coasting.molar_mass = c.molar_mass;
        c.coasting.c_ivc = c.c_ivc;
        c.coasting.eps_c = c.eps_c;

        if (j.contains("part_load")) {
            const auto& pl = j["part_load"];
            c.part_load.delta_theta = detail::get_or(pl, "delta_theta_K", c.part_load.delta_theta);
            c.part_load.stoich_air_fuel_ratio =
                detail::get_or(pl, "stoich_air_fuel_ratio", c.part_load.stoich_air_fuel_ratio);
        }
        c.part_load.exponent = c.closure.exponent;  // single source of truth

        const auto& ed = j.at("edges");
        const char* dims[kStateDims] = {"n_engine", "m_air", "t_int", "T_i", "m_fuel"};
        for (int d = 0; d < kStateDims; ++d)
            c.edges[static_cast<std::size_t>(d)] = ed.at(dims[d]).get<std::vector<double>>();

        c.full_load_margin = detail::get_or(j, "full_load_margin", c.full_load_margin);
        if (j.contains("pdf")) {
            c.pdf_bins_alpha = detail::get_or(j["pdf"], "n_bins_alpha", c.pdf_bins_alpha);
            c.pdf_bins_T = detail::get_or(j["pdf"], "n_bins_T", c.pdf_bins_T);
        }
        if (j.contains("burn_analysis")) {
            const auto& ba = j["burn_analysis"];
            if (ba.contains("compression_fit_window"))
                c.compression_fit_window = ba["compression_fit_window"].get<std::array<double, 2>>();
            if (ba.contains("expansion_fit_window"))
                c.expansion_fit_window = ba["expansion_fit_window"].get<std::array<double, 2>>();
        }

        auto read_port = [&](const char* key, PortConfig& p) {
            if (!j.contains("ports") || !j["ports"].contains(key)) return;
            const auto& pj = j["ports"][key];
            p.valve_diameter = detail::get_or(pj, "valve_diameter_m", p.valve_diameter);
            p.duct_diameter = detail::get_or(pj, "duct_diameter_m", p.duct_diameter);
            p.port_length = detail::get_or(pj, "port_length_m", p.port_length);
            p.lift_file = detail::get_or(pj, "lift_file", p.lift_file);
            p.calibration_c = detail::get_or(pj, "calibration_c", p.calibration_c);
        };
        read_port("intake", c.intake_port);
        read_port("exhaust", c.exhaust_port);

        if (j.contains("water")) {
            const auto& w = j["water"];
            c.water.reynolds_exponent = detail::get_or(w, "m", c.water.reynolds_exponent);
            c.water.n_ref_policy = detail::get_or(w, "n_ref_policy", c.water.n_ref_policy);
            c.water.t_waterin = detail::get_or(w, "t_waterin_K", c.water.t_waterin);
            c.water.density = detail::get_or(w, "density_kgm3", c.water.density);
            c.water.c_p = detail::get_or(w, "c_p_JkgK", c.water.c_p);
            c.water.sensor_tau_c = detail::get_or(w, "sensor_tau_c_s", c.water.sensor_tau_c);
        }

        if (j.contains("solver")) {
            c.dt_sim = detail::get_or(j["solver"], "dt_s", c.dt_sim);
            c.write_binary_bc = detail::get_or(j["solver"], "write_binary_bc", c.write_binary_bc);
        }
        c.cylinder_fuel_scale = detail::get_or(j, "cylinder_fuel_scale", std::vector<double>{});

        const auto& paths = j.at("paths");
        c.telemetry_file = c.resolve(paths.at("telemetry").get<std::string>());
        c.pressure_dir = c.resolve(paths.at("pressure_dir").get<std::string>());
        c.full_load_ref_file = c.resolve(paths.at("full_load_ref").get<std::string>());
        c.network_file = c.resolve(paths.at("network").get<std::string>());
        c.reference_htc_file = c.resolve(paths.at("reference_htc").get<std::string>());
        c.gas_props_file = c.resolve(paths.at("gas_props").get<std::string>());
        if (paths.contains("water_channel"))
            c.water_channel_file = c.resolve(paths["water_channel"].get<std::string>());
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(errc::bad_config, "config schema error: " + std::string(e.what()));
    }

    c.geometry.validate();
    c.closure.validate();
    c.part_load.validate();
    require(c.dt_sim > 0.0, errc::bad_config, "dt_s must be positive");
    if (!c.cylinder_fuel_scale.empty())
        require(static_cast<int>(c.cylinder_fuel_scale.size()) == c.geometry.n_cylinders,
                errc::bad_config, "cylinder_fuel_scale must list one factor per cylinder");
    return c;
}

// Referenced input files must exist before a stage starts.
inline void require_files(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files)
        require(std::filesystem::exists(f), errc::bad_config, "missing input file: " + f.string());
}

}  // namespace thermolap
