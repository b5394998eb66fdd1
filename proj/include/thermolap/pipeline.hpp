#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thermolap/bc.hpp"
#include "thermolap/coasting.hpp"
#include "thermolap/config.hpp"
#include "thermolap/expectation.hpp"
#include "thermolap/fired_cycle.hpp"
#include "thermolap/full_load.hpp"
#include "thermolap/gas_exchange.hpp"
#include "thermolap/part_load.hpp"
#include "thermolap/pressure.hpp"
#include "thermolap/state_space.hpp"
#include "thermolap/thermal_net.hpp"
#include "thermolap/water_jacket.hpp"

namespace thermolap {

// ---------------------------------------------------------------------------
// Persisted per-speed (alpha, T_eff) tables

struct SpeedPointTable {
    double n_engine = 0.0;
    EngineState stat_state;
    double t_exh = 0.0;
    double alpha_ign = 331.0;
    HistogramNd pdf;  // joint (alpha_mean, T_eff) over the cycle ensemble
    HtcStatistics stats;

    SpeedPointTable() : pdf({BinAxis({0.0, 1.0})}) {}
};

struct PdfTableSet {
    std::vector<SpeedPointTable> speeds;  // sorted by engine speed
    double closure_scale = 0.0;
    double closure_exponent = 0.0;

    void validate() const {
        require(!speeds.empty(), errc::missing_reference, "no speed-point tables");
        for (std::size_t i = 1; i < speeds.size(); ++i)
            require(speeds[i].n_engine > speeds[i - 1].n_engine, errc::bad_config,
                    "speed tables must strictly increase");
    }

    struct Bracket {
        std::size_t left, right;
        double a;
        bool clamped;
    };

    Bracket bracket(double n) const {
        if (n <= speeds.front().n_engine) return {0, 0, 0.0, n < speeds.front().n_engine};
        if (n >= speeds.back().n_engine) {
            std::size_t last = speeds.size() - 1;
            return {last, last, 0.0, n > speeds.back().n_engine};
        }
        std::size_t hi = 1;
        while (speeds[hi].n_engine < n) ++hi;
        if (speeds[hi].n_engine == n) return {hi, hi, 0.0, false};
        return {hi - 1, hi, (n - speeds[hi - 1].n_engine) /
                                (speeds[hi].n_engine - speeds[hi - 1].n_engine),
                false};
    }
};

namespace detail {

inline std::string join_edges(const std::vector<double>& edges) {
    std::string s;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) s += ';';
        csv::append_number(s, edges[i]);
    }
    return s;
}

inline std::vector<double> split_edges(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(';', start);
        if (end == std::string::npos) end = s.size();
        out.push_back(std::stod(s.substr(start, end - start)));
        start = end + 1;
        if (end == s.size()) break;
    }
    return out;
}

}  // namespace detail

inline void save_pdf_table(const std::filesystem::path& path, const SpeedPointTable& t) {
    csv::Writer w(path);
    w.meta("n_engine_rpm", t.n_engine);
    w.meta("m_air", t.stat_state.m_air);
    w.meta("t_int", t.stat_state.t_int);
    w.meta("T_i", t.stat_state.T_i);
    w.meta("m_fuel", t.stat_state.m_fuel);
    w.meta("t_exh_K", t.t_exh);
    w.meta("alpha_ign_deg", t.alpha_ign);
    w.meta("alpha_mean_Wm2K", t.stats.alpha_mean);
    w.meta("alpha_T_mean", t.stats.alpha_T_mean);
    w.meta("T_star_K", t.stats.T_star);
    w.meta("alpha_edges", detail::join_edges(t.pdf.axis(0).edges()));
    w.meta("T_eff_edges", detail::join_edges(t.pdf.axis(1).edges()));
    w.header({"i_alpha", "i_T", "count", "density"});
    t.pdf.for_each_occupied([&](std::size_t f, double count) {
        auto idx = t.pdf.unflatten(f);
        w.row({static_cast<double>(idx[0]), static_cast<double>(idx[1]), count, t.pdf.density_flat(f)});
    });
    w.write();
}

inline SpeedPointTable load_pdf_table(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    SpeedPointTable out;
    out.n_engine = t.meta_number("n_engine_rpm", ctx);
    out.stat_state.n_engine = out.n_engine;
    out.stat_state.m_air = t.meta_number("m_air", ctx);
    out.stat_state.t_int = t.meta_number("t_int", ctx);
    out.stat_state.T_i = t.meta_number("T_i", ctx);
    out.stat_state.m_fuel = t.meta_number("m_fuel", ctx);
    out.t_exh = t.meta_number("t_exh_K", ctx);
    out.alpha_ign = t.meta_number("alpha_ign_deg", ctx);
    out.pdf = HistogramNd({BinAxis(detail::split_edges(t.metadata.at("alpha_edges"))),
                           BinAxis(detail::split_edges(t.metadata.at("T_eff_edges")))});
    int ia = t.require_column("i_alpha", ctx), iT = t.require_column("i_T", ctx);
    int ic = t.require_column("count", ctx);
    for (const auto& row : t.rows) {
        std::array<int, 2> idx{static_cast<int>(row[static_cast<std::size_t>(ia)]),
                               static_cast<int>(row[static_cast<std::size_t>(iT)])};
        out.pdf.add_at(idx, row[static_cast<std::size_t>(ic)]);
    }
    // re-validate invariants on load
    require(std::abs(out.pdf.integral() - 1.0) < 1e-12, errc::bad_config,
            "PDF table does not integrate to one: " + ctx);
    out.stats = modified_reference_temperature(out.pdf);
    require(std::abs(out.stats.alpha_mean - t.meta_number("alpha_mean_Wm2K", ctx)) <=
                1e-9 * out.stats.alpha_mean,
            errc::bad_config, "PDF table statistics inconsistent: " + ctx);
    return out;
}

// ---------------------------------------------------------------------------
// build-pdf stage

struct BuildPdfResult {
    PdfTableSet tables;
    LapStatistics lap;
    std::size_t clamped_samples = 0;
    std::size_t n_telemetry_flags = 0;
    double closure_scale_used = 0.0;
};

namespace detail {

inline std::filesystem::path ptrace_path(const std::filesystem::path& dir, double n_engine) {
    char name[64];
    std::snprintf(name, sizeof name, "ptrace_%05d.csv", static_cast<int>(n_engine));
    return dir / name;
}

inline SpeedPointTable analyze_speed_point(const PipelineConfig& cfg, const FullLoadPoint& flp,
                                           double closure_scale, int bins_alpha, int bins_T) {
    auto trace = load_pressure_trace(ptrace_path(cfg.pressure_dir, flp.state.n_engine));
    require(trace.n_cycles() >= 2, errc::too_few_cycles,
            "need at least 2 cycles at " + std::to_string(flp.state.n_engine) + " rpm");

    FiredCycleParams par;
    par.geometry = cfg.geometry;
    par.engine_speed = flp.state.n_engine;
    par.amount_of_substance = (flp.state.m_air + flp.state.m_fuel) * 1e-6 / cfg.molar_mass;
    par.alpha_ign_deg = flp.alpha_ign;
    par.kappa_ub = cfg.kappa_ub;
    double vp = mean_piston_speed(cfg.geometry, flp.state.n_engine);
    par.k_ivc = cfg.c_ivc * vp * vp;
    par.eps_c = cfg.eps_c;
    par.closure = HtcClosure{closure_scale, cfg.closure.exponent};
    par.compression_fit_window = cfg.compression_fit_window;
    par.expansion_fit_window = cfg.expansion_fit_window;

    std::vector<CycleResult> ensemble;
    ensemble.reserve(trace.n_cycles());
    for (const auto& cycle : trace.cycles)
        ensemble.push_back(analyze_fired_cycle(trace.crank_angle, cycle, par).result);

    SpeedPointTable out;
    out.n_engine = flp.state.n_engine;
    out.stat_state = flp.state;
    out.t_exh = flp.t_exh;
    out.alpha_ign = flp.alpha_ign;
    out.pdf = build_htc_pdf(ensemble, bins_alpha, bins_T);
    out.stats = modified_reference_temperature(out.pdf);
    return out;
}

}  // namespace detail

// Calibrates the closure scale (when configured) so the ensemble-mean HTC at
// the calibration speed matches its target.
inline double calibrate_closure_scale(const PipelineConfig& cfg, const FullLoadTable& fl) {
    if (!cfg.calibration) return cfg.closure.scale;
    const auto& cal = *cfg.calibration;
    const FullLoadPoint* point = nullptr;
    for (const auto& p : fl.points)
        if (p.state.n_engine == cal.speed_rpm) point = &p;
    require(point != nullptr, errc::missing_reference,
            "calibration speed " + std::to_string(cal.speed_rpm) + " rpm not in the full-load table");
    auto unit = detail::analyze_speed_point(cfg, *point, 1.0, cfg.pdf_bins_alpha, cfg.pdf_bins_T);
    return cal.target_alpha_mean / unit.stats.alpha_mean;
}

inline BuildPdfResult cmd_build_pdf(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                                    int threads = 1) {
    require_files({cfg.telemetry_file, cfg.full_load_ref_file, cfg.pressure_dir});
    std::filesystem::create_directories(out_dir);

    auto fl = load_full_load_table(cfg.full_load_ref_file);
    for (const auto& p : fl.points) {
        auto path = detail::ptrace_path(cfg.pressure_dir, p.state.n_engine);
        require(std::filesystem::exists(path), errc::missing_reference,
                "missing pressure trace for speed point " + std::to_string(p.state.n_engine) +
                    " rpm: " + path.string());
    }

    auto loaded = load_telemetry(cfg.telemetry_file);
    auto grid = cfg.edges_grid();
    auto hist = build_state_histogram(loaded.series, grid);
    auto pointer = build_pointer_matrix(loaded.series, grid, cfg.dt_sim);
    auto lap = lap_statistics(loaded.series, fl.classifier(cfg.full_load_margin),
                              BinAxis(cfg.edges[0]));

    double scale = calibrate_closure_scale(cfg, fl);

    BuildPdfResult result;
    result.tables.closure_scale = scale;
    result.tables.closure_exponent = cfg.closure.exponent;
    result.lap = lap;
    result.clamped_samples = hist.clamped_samples;
    result.n_telemetry_flags = loaded.flags.size();
    result.closure_scale_used = scale;

    result.tables.speeds.resize(fl.size());
    auto work = [&](std::size_t i) {
        result.tables.speeds[i] =
            detail::analyze_speed_point(cfg, fl.points[i], scale, cfg.pdf_bins_alpha, cfg.pdf_bins_T);
    };
    if (threads > 1) {
        std::vector<std::future<void>> futs;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < threads; ++w)
            futs.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next.fetch_add(1); i < fl.size(); i = next.fetch_add(1)) work(i);
            }));
        for (auto& f : futs) f.get();
    } else {
        for (std::size_t i = 0; i < fl.size(); ++i) work(i);
    }
    result.tables.validate();

    // persist every artifact
    for (const auto& sp : result.tables.speeds) {
        char name[64];
        std::snprintf(name, sizeof name, "pdf_%05d.csv", static_cast<int>(sp.n_engine));
        save_pdf_table(out_dir / name, sp);
    }
    write_state_histogram(out_dir / "state_histogram.csv", hist);
    write_pointer_matrix(out_dir / "pointer_matrix.csv", pointer);
    write_consistency_report(out_dir / "consistency_report.csv", loaded.flags);
    {
        csv::Writer w(out_dir / "lap_statistics.csv");
        w.header({"full_load_fraction", "coasting_fraction", "clamped_samples"});
        w.row({lap.full_load_fraction, lap.coasting_fraction,
               static_cast<double>(hist.clamped_samples)});
        w.write();
    }
    {
        csv::Writer w(out_dir / "build_meta.csv");
        w.header({"key", "value"});
        w.raw_line("closure_scale," + [&] {
            std::string s;
            csv::append_number(s, scale);
            return s;
        }());
        w.raw_line("closure_exponent," + [&] {
            std::string s;
            csv::append_number(s, cfg.closure.exponent);
            return s;
        }());
        w.write();
    }
    return result;
}

inline PdfTableSet load_pdf_tables(const std::filesystem::path& out_dir) {
    PdfTableSet set;
    require(std::filesystem::is_directory(out_dir), errc::missing_reference,
            "output directory " + out_dir.string() + " not found; run build-pdf first");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(out_dir)) {
        auto name = e.path().filename().string();
        if (name.rfind("pdf_", 0) == 0 && name.size() > 8 && e.path().extension() == ".csv")
            files.push_back(e.path());
    }
    require(!files.empty(), errc::missing_reference,
            "no PDF tables found in " + out_dir.string() + "; run build-pdf first");
    std::sort(files.begin(), files.end());
    for (const auto& f : files) set.speeds.push_back(load_pdf_table(f));
    std::sort(set.speeds.begin(), set.speeds.end(),
              [](const SpeedPointTable& a, const SpeedPointTable& b) { return a.n_engine < b.n_engine; });

    set.closure_scale = 0.0;
    set.closure_exponent = 0.0;
    {
        std::ifstream in(out_dir / "build_meta.csv");
        std::string line;
        while (std::getline(in, line)) {
            auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            std::string key = line.substr(0, comma), val = line.substr(comma + 1);
            if (key == "closure_scale") set.closure_scale = std::stod(val);
            if (key == "closure_exponent") set.closure_exponent = std::stod(val);
        }
    }
    require(set.closure_scale > 0.0 && set.closure_exponent > 0.0, errc::bad_config,
            "build_meta.csv missing closure constants");
    set.validate();
    return set;
}

// ---------------------------------------------------------------------------
// Transient chamber evaluation: stationary tables + part-load transform +
// coasting model, addressed per discretized state.

struct ChamberValue {
    double alpha = 0.0;
    double T_eff = 0.0;
    double beta = 1.0;
    double r_T = 1.0;
    bool coasting = false;
    bool clamped_speed = false;
};

class ChamberEvaluator {
public:
    ChamberEvaluator(const PdfTableSet& tables, const FullLoadTable& fl, const PipelineConfig& cfg)
        : tables_(tables), fl_(fl), cfg_(cfg), grid_(cfg.edges_grid()) {
        coasting_closure_ = HtcClosure{tables.closure_scale, tables.closure_exponent};
        part_load_ = cfg.part_load;
        part_load_.exponent = tables.closure_exponent;
    }

    // Fired path: beta transform of the speed-interpolated stationary mean.
    ChamberValue fired_value(const EngineState& state) const {
        if (state.n_engine <= 0.0 || state.m_air <= 0.0)
            fail(errc::unreachable_state,
                 "fired state without speed or air mass cannot be transformed");
        ChamberValue v;
        auto b = tables_.bracket(state.n_engine);
        v.clamped_speed = b.clamped;
        double n_eval = b.clamped ? tables_.speeds[b.left].n_engine : state.n_engine;
        double alpha_stat, T_star_stat;
        EngineState stat;
        if (b.left == b.right) {
            alpha_stat = tables_.speeds[b.left].stats.alpha_mean;
            T_star_stat = tables_.speeds[b.left].stats.T_star;
            stat = tables_.speeds[b.left].stat_state;
        } else {
            alpha_stat = (1.0 - b.a) * tables_.speeds[b.left].stats.alpha_mean +
                         b.a * tables_.speeds[b.right].stats.alpha_mean;
            T_star_stat = (1.0 - b.a) * tables_.speeds[b.left].stats.T_star +
                          b.a * tables_.speeds[b.right].stats.T_star;
            stat = fl_.interpolate_state(n_eval);
        }
        auto ratios = state_ratios(state, stat, part_load_);
        v.beta = beta_coefficient(ratios, part_load_.exponent);
        v.r_T = ratios.r_T;
        v.alpha = v.beta * alpha_stat;
        v.T_eff = ratios.r_T * T_star_stat;
        return v;
    }

    // Transformed realization PDF; defined at the measured speed points.
    HistogramNd fired_pdf(const EngineState& state) const {
        auto b = tables_.bracket(state.n_engine);
        require(b.left == b.right, errc::missing_reference,
                "fired PDF requested between speed grid points; use fired_value");
        auto ratios = state_ratios(state, tables_.speeds[b.left].stat_state, part_load_);
        double beta = beta_coefficient(ratios, part_load_.exponent);
        return transform_pdf(tables_.speeds[b.left].pdf, beta, ratios.r_T);
    }

    // Coasting path, cached per discretized state (first three dimensions).
    const CycleResult& coasting_value(const EngineState& state) const {
        auto d = discretize_state(state, grid_);
        std::size_t key = static_cast<std::size_t>(d.idx[0]);
        key = key * static_cast<std::size_t>(grid_.axis(1).n_bins()) + static_cast<std::size_t>(d.idx[1]);
        key = key * static_cast<std::size_t>(grid_.axis(2).n_bins()) + static_cast<std::size_t>(d.idx[2]);
        auto it = coasting_cache_.find(key);
        if (it != coasting_cache_.end()) return it->second;
        EngineState bin_center;
        bin_center.n_engine = grid_.axis(0).center(d.idx[0]);
        bin_center.m_air = grid_.axis(1).center(d.idx[1]);
        bin_center.t_int = grid_.axis(2).center(d.idx[2]);
        bin_center.T_i = 0.0;
        bin_center.m_fuel = 0.0;
        auto cycle = coasting_cycle(bin_center, cfg_.geometry, coasting_closure_, cfg_.coasting);
        cycle.result.alpha.clear();  // keep aggregates only
        return coasting_cache_.emplace(key, cycle.result).first->second;
    }

    ChamberValue value(const EngineState& state) const {
        if (state.coasting()) {
            const CycleResult& c = coasting_value(state);
            ChamberValue v;
            v.alpha = c.alpha_mean;
            v.T_eff = c.T_eff;
            v.coasting = true;
            return v;
        }
        return fired_value(state);
    }

    const EdgesGrid& grid() const { return grid_; }

private:
    const PdfTableSet& tables_;
    const FullLoadTable& fl_;
    const PipelineConfig& cfg_;
    EdgesGrid grid_;
    HtcClosure coasting_closure_;
    PartLoadConfig part_load_;
    mutable std::map<std::size_t, CycleResult> coasting_cache_;
};

// ---------------------------------------------------------------------------
// Gas-exchange zone evaluation (cycle-averaged correlations per state).

struct GasZoneValues {
    double intake_port_alpha = 0.0, intake_valve_alpha = 0.0;
    double exhaust_port_alpha = 0.0, exhaust_valve_alpha = 0.0;
    double intake_T = 0.0, exhaust_T = 0.0;
};

class GasExchangeEvaluator {
public:
    GasExchangeEvaluator(const PipelineConfig& cfg, const FullLoadTable& fl, GasPropsTable props,
                         PortGeometry intake, PortGeometry exhaust)
        : cfg_(cfg), fl_(fl), props_(std::move(props)), intake_(std::move(intake)),
          exhaust_(std::move(exhaust)) {
        r_specific_ = kGasConstant / cfg.molar_mass;
    }

    GasZoneValues value(const EngineState& state, double exhaust_T) const {
        GasZoneValues v;
        v.intake_T = state.t_int;
        v.exhaust_T = exhaust_T;

        auto in_props = props_.at(state.t_int);
        double rho_in = cfg_.ambient_pressure / (r_specific_ * state.t_int);
        double mdot_in = state.m_air * 1e-6 * state.n_engine / 120.0;
        double duct_area_in =
            std::numbers::pi / 4.0 * cfg_.intake_port.duct_diameter * cfg_.intake_port.duct_diameter;
        double v_port_in = mdot_in > 0.0 ? jet_velocity(mdot_in, rho_in, duct_area_in) : 0.0;
        double re_port_in = v_port_in * cfg_.intake_port.duct_diameter / in_props.nu;
        v.intake_port_alpha = htc_from_nu(nu_intake_port(re_port_in, cfg_.intake_port.calibration_c),
                                          cfg_.intake_port.duct_diameter, in_props.lambda);
        double lift_in = intake_.mean_open_lift();
        double v_jet_in = mdot_in > 0.0 ? jet_velocity(mdot_in, rho_in, intake_.mean_open_area()) : 0.0;
        double re_v_in = v_jet_in * lift_in / in_props.nu;
        v.intake_valve_alpha =
            re_v_in > 0.0
                ? htc_from_nu(nu_intake_valve(re_v_in, cfg_.intake_port.valve_diameter / lift_in),
                              lift_in, in_props.lambda)
                : 0.0;

        auto ex_props = props_.at(exhaust_T);
        double rho_ex = cfg_.ambient_pressure / (r_specific_ * exhaust_T);
        double mdot_ex = (state.m_air + state.m_fuel) * 1e-6 * state.n_engine / 120.0;
        double v_jet_ex = mdot_ex > 0.0 ? jet_velocity(mdot_ex, rho_ex, exhaust_.mean_open_area()) : 0.0;
        double re_j = v_jet_ex * cfg_.exhaust_port.duct_diameter / ex_props.nu;
        v.exhaust_port_alpha =
            re_j > 0.0 ? htc_from_nu(nu_exhaust_port(re_j, ex_props.Pr),
                                     cfg_.exhaust_port.duct_diameter, ex_props.lambda)
                       : 0.0;
        double lift_ex = exhaust_.mean_open_lift();
        double re_v_ex = v_jet_ex * lift_ex / ex_props.nu;
        v.exhaust_valve_alpha =
            re_v_ex > 0.0
                ? htc_from_nu(nu_exhaust_valve(re_v_ex, cfg_.exhaust_port.valve_diameter / lift_ex),
                              lift_ex, ex_props.lambda)
                : 0.0;
        return v;
    }

    double fired_exhaust_T(double n_engine) const { return fl_.t_exh_at(n_engine); }

private:
    const PipelineConfig& cfg_;
    const FullLoadTable& fl_;
    GasPropsTable props_;
    PortGeometry intake_, exhaust_;
    double r_specific_;
};

}  // namespace thermolap
