#pragma once

#include "thermolap/pipeline.hpp"

namespace thermolap {

// ---------------------------------------------------------------------------
// gen-bc stage: one BoundaryConditionSeries per surface zone at dt_sim.

struct GenBcResult {
    std::vector<std::string> zones;
    std::size_t n_steps = 0;
    double dt = 0.0;
    double t0 = 0.0;
    std::size_t clamped_speed_steps = 0;
};

namespace detail {

struct WaterReference {
    const WaterChannelData* channel = nullptr;  // optional measured series
    std::vector<double> T_in_corrected;
    double constant_T = 0.0;

    double at(double t) const {
        if (channel == nullptr || channel->t.empty()) return constant_T;
        return interp1(channel->t, T_in_corrected, t);
    }
};

}  // namespace detail

inline GenBcResult cmd_gen_bc(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    require_files({cfg.telemetry_file, cfg.full_load_ref_file, cfg.gas_props_file,
                   cfg.reference_htc_file});
    auto tables = load_pdf_tables(out_dir);
    auto fl = load_full_load_table(cfg.full_load_ref_file);
    auto loaded = load_telemetry(cfg.telemetry_file);
    const auto& series = loaded.series;
    auto grid = cfg.edges_grid();
    auto pointer = build_pointer_matrix(series, grid, cfg.dt_sim);

    ChamberEvaluator chamber(tables, fl, cfg);
    PortGeometry intake_base, exhaust_base;
    intake_base.valve_diameter = cfg.intake_port.valve_diameter;
    intake_base.duct_diameter = cfg.intake_port.duct_diameter;
    intake_base.port_length = cfg.intake_port.port_length;
    exhaust_base.valve_diameter = cfg.exhaust_port.valve_diameter;
    exhaust_base.duct_diameter = cfg.exhaust_port.duct_diameter;
    exhaust_base.port_length = cfg.exhaust_port.port_length;
    GasExchangeEvaluator gas(cfg, fl, GasPropsTable::load(cfg.gas_props_file),
                             load_valve_lift(cfg.resolve(cfg.intake_port.lift_file), intake_base),
                             load_valve_lift(cfg.resolve(cfg.exhaust_port.lift_file), exhaust_base));

    auto field = load_reference_field(cfg.reference_htc_file);
    field.reynolds_exponent = cfg.water.reynolds_exponent;
    if (cfg.water.n_ref_policy == "power_mean") {
        auto lap = lap_statistics(series, fl.classifier(cfg.full_load_margin), BinAxis(cfg.edges[0]));
        field.n_ref = reference_speed(lap.speed_histogram, field.reynolds_exponent);
    }

    WaterChannelData channel;
    detail::WaterReference water_ref;
    water_ref.constant_T = cfg.water.t_waterin;
    if (!cfg.water_channel_file.empty() && std::filesystem::exists(cfg.water_channel_file)) {
        channel = load_water_channel(cfg.water_channel_file);
        water_ref.channel = &channel;
        if (cfg.water.sensor_tau_c > 0.0 && channel.t.size() >= 3) {
            WaterSensorChannel sc{channel.t, channel.T_in, cfg.water.sensor_tau_c};
            water_ref.T_in_corrected = sensor_lag_correct(sc);
        } else {
            water_ref.T_in_corrected = channel.T_in;
        }
    }

    const int n_cyl = cfg.geometry.n_cylinders;
    std::vector<double> fuel_scale = cfg.cylinder_fuel_scale;
    if (fuel_scale.empty()) fuel_scale.assign(static_cast<std::size_t>(n_cyl), 1.0);

    GenBcResult result;
    result.dt = cfg.dt_sim;
    result.t0 = pointer.t0;
    result.n_steps = pointer.n_steps();

    std::vector<std::string> zones;
    for (int c = 1; c <= n_cyl; ++c) zones.push_back("chamber_cyl" + std::to_string(c));
    zones.insert(zones.end(), {"intake_port", "intake_valve", "exhaust_port", "exhaust_valve"});
    for (const auto& p : field.patches) zones.push_back("water_p" + std::to_string(p.patch_id));

    std::map<std::string, BoundaryConditionSeries> bc;
    for (const auto& z : zones) {
        bc[z].zone = z;
        bc[z].t.reserve(pointer.n_steps());
        bc[z].alpha.reserve(pointer.n_steps());
        bc[z].T_eff.reserve(pointer.n_steps());
    }

    for (std::size_t i = 0; i < pointer.n_steps(); ++i) {
        double t = pointer.time_of_row(i);
        const EngineState& s = series.states[pointer.sample_of_row[i]];

        for (int c = 0; c < n_cyl; ++c) {
            EngineState sc = s;
            sc.m_fuel *= fuel_scale[static_cast<std::size_t>(c)];
            ChamberValue v;
            try {
                v = chamber.value(sc);
            } catch (const Error& e) {
                if (e.code() == errc::unreachable_state) {
                    auto d = discretize_state(sc, grid);
                    fail(errc::unreachable_state,
                         "t=" + std::to_string(t) + " s, state bin [" + std::to_string(d.idx[0]) +
                             "," + std::to_string(d.idx[1]) + "," + std::to_string(d.idx[2]) + "," +
                             std::to_string(d.idx[3]) + "," + std::to_string(d.idx[4]) +
                             "]: " + e.what());
                }
                throw;
            }
            if (v.clamped_speed) ++result.clamped_speed_steps;
            auto& z = bc["chamber_cyl" + std::to_string(c + 1)];
            z.t.push_back(t);
            z.alpha.push_back(v.alpha);
            z.T_eff.push_back(v.T_eff);
        }

        double t_exh = s.coasting() ? chamber.coasting_value(s).T_eff
                                    : gas.fired_exhaust_T(std::clamp(s.n_engine, fl.min_speed(),
                                                                     fl.max_speed()));
        auto g = gas.value(s, t_exh);
        auto push = [&](const char* zone, double alpha, double T) {
            auto& z = bc[zone];
            z.t.push_back(t);
            z.alpha.push_back(alpha);
            z.T_eff.push_back(T);
        };
        push("intake_port", g.intake_port_alpha, g.intake_T);
        push("intake_valve", g.intake_valve_alpha, g.intake_T);
        push("exhaust_port", g.exhaust_port_alpha, g.exhaust_T);
        push("exhaust_valve", g.exhaust_valve_alpha, g.exhaust_T);

        auto alpha_w = scale_htc(field, s.n_engine);
        double T_w = water_ref.at(t);
        for (std::size_t k = 0; k < field.patches.size(); ++k)
            push(("water_p" + std::to_string(field.patches[k].patch_id)).c_str(), alpha_w[k], T_w);
    }

    std::filesystem::create_directories(out_dir);
    for (auto& [name, s] : bc) {
        s.validate();
        save_bc_csv(out_dir / ("bc_" + name + ".csv"), s);
        if (cfg.write_binary_bc) save_bc_binary(out_dir / ("bc_" + name + ".bin"), s);
    }

    // part-load diagnostic: per occupied fired bin, beta and the HTC delta
    // against the stationary full-load line
    {
        auto hist = build_state_histogram(series, grid);
        csv::Writer w(out_dir / "partload_diag.csv");
        w.header({"i_n", "i_mair", "i_tint", "i_Ti", "i_mfuel", "n_center", "T_i_center", "beta",
                  "alpha_Wm2K", "alpha_stat_Wm2K", "delta_Wm2K"});
        hist.hist.for_each_occupied([&](std::size_t flat, double) {
            auto idx = hist.hist.unflatten(flat);
            const auto& ax_Ti = grid.axis(3);
            bool coasting_bin = ax_Ti.lower(idx[3]) <= 0.0 && 0.0 < ax_Ti.upper(idx[3]);
            if (coasting_bin) return;
            EngineState center;
            center.n_engine = grid.axis(0).center(idx[0]);
            center.m_air = grid.axis(1).center(idx[1]);
            center.t_int = grid.axis(2).center(idx[2]);
            center.T_i = grid.axis(3).center(idx[3]);
            center.m_fuel = grid.axis(4).center(idx[4]);
            ChamberValue v;
            try {
                v = chamber.fired_value(center);
            } catch (const Error&) {
                return;  // unreachable synthetic bin (e.g. zero air mass)
            }
            double alpha_stat = v.beta != 0.0 ? v.alpha / v.beta : 0.0;
            w.row({static_cast<double>(idx[0]), static_cast<double>(idx[1]),
                   static_cast<double>(idx[2]), static_cast<double>(idx[3]),
                   static_cast<double>(idx[4]), center.n_engine, center.T_i, v.beta, v.alpha,
                   alpha_stat, v.alpha - alpha_stat});
        });
        w.write();
    }
    {
        csv::Writer w(out_dir / "gen_meta.csv");
        w.header({"dt_s", "t0_s", "n_steps"});
        w.row({result.dt, result.t0, static_cast<double>(result.n_steps)});
        w.write();
    }
    result.zones = zones;
    return result;
}

// ---------------------------------------------------------------------------
// steady stage: quasistationary expectation BCs and the <T>(x) field.

struct SteadyResult {
    std::map<std::string, std::pair<double, double>> zone_bc;  // zone -> (alpha, T*)
    std::vector<std::string> node_ids;
    std::vector<double> temperatures;
};

inline SteadyResult cmd_steady(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    require_files({cfg.telemetry_file, cfg.full_load_ref_file, cfg.gas_props_file,
                   cfg.reference_htc_file, cfg.network_file});
    auto tables = load_pdf_tables(out_dir);
    auto fl = load_full_load_table(cfg.full_load_ref_file);
    auto loaded = load_telemetry(cfg.telemetry_file);
    auto grid = cfg.edges_grid();
    auto hist = build_state_histogram(loaded.series, grid);

    ChamberEvaluator chamber(tables, fl, cfg);
    PortGeometry ib, eb;
    ib.valve_diameter = cfg.intake_port.valve_diameter;
    ib.duct_diameter = cfg.intake_port.duct_diameter;
    ib.port_length = cfg.intake_port.port_length;
    eb.valve_diameter = cfg.exhaust_port.valve_diameter;
    eb.duct_diameter = cfg.exhaust_port.duct_diameter;
    eb.port_length = cfg.exhaust_port.port_length;
    GasExchangeEvaluator gas(cfg, fl, GasPropsTable::load(cfg.gas_props_file),
                             load_valve_lift(cfg.resolve(cfg.intake_port.lift_file), ib),
                             load_valve_lift(cfg.resolve(cfg.exhaust_port.lift_file), eb));
    auto field = load_reference_field(cfg.reference_htc_file);
    field.reynolds_exponent = cfg.water.reynolds_exponent;
    if (cfg.water.n_ref_policy == "power_mean") {
        auto lap = lap_statistics(loaded.series, fl.classifier(cfg.full_load_margin),
                                  BinAxis(cfg.edges[0]));
        field.n_ref = reference_speed(lap.speed_histogram, field.reynolds_exponent);
    }

    const int n_cyl = cfg.geometry.n_cylinders;
    std::vector<double> fuel_scale = cfg.cylinder_fuel_scale;
    if (fuel_scale.empty()) fuel_scale.assign(static_cast<std::size_t>(n_cyl), 1.0);

    // f_slave tables (nested Fubini inner sums) per zone over the state grid:
    // one for <alpha>, one for <alpha T_ref>
    std::vector<std::string> zones;
    for (int c = 1; c <= n_cyl; ++c) zones.push_back("chamber_cyl" + std::to_string(c));
    zones.insert(zones.end(), {"intake_port", "intake_valve", "exhaust_port", "exhaust_valve"});
    for (const auto& p : field.patches) zones.push_back("water_p" + std::to_string(p.patch_id));

    std::map<std::string, SlaveTable> slave_a, slave_aT;
    for (const auto& z : zones) {
        SlaveTable st;
        for (int d = 0; d < kStateDims; ++d) st.state_bins.push_back(grid.axis(d).n_bins());
        st.value.assign(hist.hist.size(), 0.0);
        st.occupied.assign(hist.hist.size(), 0);
        slave_a[z] = st;
        slave_aT[z] = st;
    }

    hist.hist.for_each_occupied([&](std::size_t flat, double) {
        auto idx = hist.hist.unflatten(flat);
        EngineState center;
        center.n_engine = grid.axis(0).center(idx[0]);
        center.m_air = grid.axis(1).center(idx[1]);
        center.t_int = grid.axis(2).center(idx[2]);
        center.T_i = grid.axis(3).center(idx[3]);
        center.m_fuel = grid.axis(4).center(idx[4]);
        const auto& ax_Ti = grid.axis(3);
        bool coasting_bin = ax_Ti.lower(idx[3]) <= 0.0 && 0.0 < ax_Ti.upper(idx[3]);
        if (coasting_bin) center.T_i = 0.0;

        auto put = [&](const std::string& zone, double alpha, double T) {
            slave_a[zone].value[flat] = alpha;
            slave_a[zone].occupied[flat] = 1;
            slave_aT[zone].value[flat] = alpha * T;
            slave_aT[zone].occupied[flat] = 1;
        };

        for (int c = 0; c < n_cyl; ++c) {
            EngineState sc = center;
            sc.m_fuel *= fuel_scale[static_cast<std::size_t>(c)];
            auto v = chamber.value(sc);
            put("chamber_cyl" + std::to_string(c + 1), v.alpha, v.T_eff);
        }
        double t_exh = center.coasting()
                           ? chamber.coasting_value(center).T_eff
                           : gas.fired_exhaust_T(
                                 std::clamp(center.n_engine, fl.min_speed(), fl.max_speed()));
        auto g = gas.value(center, t_exh);
        put("intake_port", g.intake_port_alpha, g.intake_T);
        put("intake_valve", g.intake_valve_alpha, g.intake_T);
        put("exhaust_port", g.exhaust_port_alpha, g.exhaust_T);
        put("exhaust_valve", g.exhaust_valve_alpha, g.exhaust_T);
        auto alpha_w = scale_htc(field, center.n_engine);
        for (std::size_t k = 0; k < field.patches.size(); ++k)
            put("water_p" + std::to_string(field.patches[k].patch_id), alpha_w[k],
                cfg.water.t_waterin);
    });

    SteadyResult result;
    std::vector<double> channel_alpha, channel_T;
    auto net = load_network(cfg.network_file);
    auto assembled = AssembledNetwork::assemble(net, zones);
    for (const auto& z : zones) {
        double ea = expect_nested(slave_a[z], hist.hist);
        double eaT = expect_nested(slave_aT[z], hist.hist);
        require(ea > 0.0, errc::zero_mean_htc, "zone " + z + " has zero quasistationary mean HTC");
        result.zone_bc[z] = {ea, eaT / ea};
        channel_alpha.push_back(ea);
        channel_T.push_back(eaT / ea);
    }
    auto T = steady_solve(assembled, channel_alpha, channel_T);
    result.node_ids = assembled.node_ids();
    result.temperatures.assign(T.data(), T.data() + T.size());

    std::filesystem::create_directories(out_dir);
    {
        csv::Writer w(out_dir / "steady_bc.csv");
        w.header({"zone", "alpha_Wm2K", "T_eff_K"});
        for (const auto& [z, v] : result.zone_bc) {
            std::string line = z + ",";
            csv::append_number(line, v.first);
            line += ",";
            csv::append_number(line, v.second);
            w.raw_line(line);
        }
        w.write();
    }
    {
        csv::Writer w(out_dir / "expectation_field.csv");
        w.header({"node_id", "T_K"});
        for (std::size_t i = 0; i < result.node_ids.size(); ++i) {
            std::string line = result.node_ids[i] + ",";
            csv::append_number(line, result.temperatures[i]);
            w.raw_line(line);
        }
        w.write();
    }
    return result;
}

// ---------------------------------------------------------------------------
// simulate stage: transient run over the generated BC series.

struct SimulateResult {
    std::vector<std::string> node_ids;
    TransientHistory history;
    std::vector<std::string> channel_names;
};

inline SimulateResult cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    require_files({cfg.network_file, out_dir / "gen_meta.csv"});
    auto net = load_network(cfg.network_file);

    // channels = the network's patch channels; every one needs a BC series
    std::set<std::string> channel_set;
    for (const auto& p : net.patches) channel_set.insert(p.channel);
    std::vector<std::string> channels(channel_set.begin(), channel_set.end());

    BcSet bcs;
    for (const auto& ch : channels) {
        auto path = out_dir / ("bc_" + ch + ".csv");
        require(std::filesystem::exists(path), errc::dangling_patch,
                "patch channel '" + ch + "' has no BC series (" + path.string() + ")");
        bcs[ch] = load_bc_csv(path);
    }

    auto meta = csv::read(out_dir / "gen_meta.csv");
    double dt = meta.rows.at(0)[0];
    double t0 = meta.rows.at(0)[1];
    std::size_t n_steps = static_cast<std::size_t>(meta.rows.at(0)[2]) - 1;

    auto assembled = AssembledNetwork::assemble(net, channels);

    // initial condition: the quasistationary expectation field when present,
    // otherwise a steady solve at the first BC values
    Eigen::VectorXd T0;
    auto field_path = out_dir / "expectation_field.csv";
    if (std::filesystem::exists(field_path)) {
        std::ifstream in(field_path);
        std::string line;
        std::getline(in, line);  // header
        std::map<std::string, double> by_id;
        while (std::getline(in, line)) {
            auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            by_id[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
        }
        T0.resize(assembled.n_nodes());
        for (int i = 0; i < assembled.n_nodes(); ++i) {
            auto it = by_id.find(assembled.node_ids()[static_cast<std::size_t>(i)]);
            require(it != by_id.end(), errc::bad_config,
                    "expectation field missing node " +
                        assembled.node_ids()[static_cast<std::size_t>(i)]);
            T0[i] = it->second;
        }
    } else {
        std::vector<double> a0, T0v;
        for (const auto& ch : channels) {
            a0.push_back(bcs[ch].alpha.front());
            T0v.push_back(bcs[ch].T_eff.front());
        }
        T0 = steady_solve(assembled, a0, T0v);
    }

    SimulateResult result;
    result.history = run_transient(assembled, bcs, t0, dt, n_steps, &T0);
    result.node_ids = assembled.node_ids();
    result.channel_names = channels;

    // node histories
    auto hist_dir = out_dir / "history";
    std::filesystem::create_directories(hist_dir);
    for (int i = 0; i < assembled.n_nodes(); ++i) {
        csv::Writer w(hist_dir / ("node_" + result.node_ids[static_cast<std::size_t>(i)] + ".csv"));
        w.header({"t_s", "T_K"});
        for (std::size_t s = 0; s < result.history.times.size(); ++s)
            w.row({result.history.times[s], result.history.temperatures[s][i]});
        w.write();
    }
    // summary: mean and amplitude per node
    {
        csv::Writer w(out_dir / "summary.csv");
        w.header({"node_id", "T_mean_K", "T_min_K", "T_max_K", "amplitude_K"});
        for (int i = 0; i < assembled.n_nodes(); ++i) {
            double mn = 1e300, mx = -1e300, acc = 0.0;
            for (const auto& T : result.history.temperatures) {
                mn = std::min(mn, T[i]);
                mx = std::max(mx, T[i]);
                acc += T[i];
            }
            double mean = acc / static_cast<double>(result.history.temperatures.size());
            std::string line = result.node_ids[static_cast<std::size_t>(i)] + ",";
            csv::append_number(line, mean);
            line += ",";
            csv::append_number(line, mn);
            line += ",";
            csv::append_number(line, mx);
            line += ",";
            csv::append_number(line, mx - mn);
            w.raw_line(line);
        }
        w.write();
    }
    // energy balance per step
    {
        csv::Writer w(out_dir / "energy_balance.csv");
        std::vector<std::string> cols = {"t_s"};
        for (const auto& ch : channels) cols.push_back("Q_" + ch + "_W");
        cols.push_back("residual_W");
        w.header(cols);
        std::vector<double> row(cols.size());
        for (std::size_t s = 0; s < result.history.channel_heat_flow.size(); ++s) {
            row[0] = result.history.times[s + 1];
            for (std::size_t c = 0; c < channels.size(); ++c)
                row[c + 1] = result.history.channel_heat_flow[s][c];
            row.back() = result.history.step_residual[s];
            w.row(row);
        }
        w.write();
    }
    return result;
}

// ---------------------------------------------------------------------------
// report stage: probe-named summary plus the water heat-flow balance.

inline void cmd_report(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    require_files({cfg.network_file, out_dir / "summary.csv"});
    auto net = load_network(cfg.network_file);

    // summary.csv column 0 is the node id (string); parse manually
    std::map<std::string, std::array<double, 4>> by_node;
    {
        std::ifstream in(out_dir / "summary.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string id, tok;
            std::getline(ss, id, ',');
            std::array<double, 4> vals{};
            for (int i = 0; i < 4 && std::getline(ss, tok, ','); ++i) vals[static_cast<std::size_t>(i)] = std::stod(tok);
            by_node[id] = vals;
        }
    }
    {
        csv::Writer w(out_dir / "report.csv");
        w.header({"probe", "node_id", "T_mean_K", "T_min_K", "T_max_K", "amplitude_K"});
        for (const auto& p : net.probes) {
            auto it = by_node.find(p.node);
            require(it != by_node.end(), errc::bad_config, "probe node missing: " + p.node);
            std::string line = p.name + "," + p.node;
            for (double v : it->second) {
                line += ",";
                csv::append_number(line, v);
            }
            w.raw_line(line);
        }
        w.write();
    }

    // measured vs simulated water heat flow, when channel data exists
    if (!cfg.water_channel_file.empty() && std::filesystem::exists(cfg.water_channel_file) &&
        std::filesystem::exists(out_dir / "energy_balance.csv")) {
        auto channel = load_water_channel(cfg.water_channel_file);
        std::vector<double> T_in = channel.T_in, T_out = channel.T_out;
        if (cfg.water.sensor_tau_c > 0.0 && channel.t.size() >= 3) {
            T_in = sensor_lag_correct({channel.t, channel.T_in, cfg.water.sensor_tau_c});
            T_out = sensor_lag_correct({channel.t, channel.T_out, cfg.water.sensor_tau_c});
        }
        auto eb = csv::read(out_dir / "energy_balance.csv");
        std::vector<int> water_cols;
        for (std::size_t c = 0; c < eb.columns.size(); ++c)
            if (eb.columns[c].rfind("Q_water_", 0) == 0) water_cols.push_back(static_cast<int>(c));

        csv::Writer w(out_dir / "water_flow.csv");
        w.header({"t_s", "Q_sim_W", "Q_measured_W"});
        for (const auto& row : eb.rows) {
            double t = row[0];
            double q_sim = 0.0;
            for (int c : water_cols) q_sim -= row[static_cast<std::size_t>(c)];  // heat into water
            double q_meas = water_heat_flow_volume(interp1(channel.t, channel.vol_flow, t),
                                                   cfg.water.density, cfg.water.c_p,
                                                   interp1(channel.t, T_in, t),
                                                   interp1(channel.t, T_out, t));
            w.row({t, q_sim, q_meas});
        }
        w.write();
    }
}

// sensor-correct stage: writes a corrected copy of a water channel CSV.
inline void cmd_sensor_correct(const std::filesystem::path& input, double tau_c,
                               const std::filesystem::path& output) {
    auto channel = load_water_channel(input);
    auto T_in = sensor_lag_correct({channel.t, channel.T_in, tau_c});
    auto T_out = sensor_lag_correct({channel.t, channel.T_out, tau_c});
    csv::Writer w(output);
    w.meta("tau_c_s", tau_c);
    w.header({"t_s", "T_in_K", "T_out_K", "vol_flow_m3s"});
    for (std::size_t i = 0; i < channel.t.size(); ++i)
        w.row({channel.t[i], T_in[i], T_out[i], channel.vol_flow[i]});
    w.write();
}

}  // namespace thermolap
