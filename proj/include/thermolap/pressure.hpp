#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"

namespace thermolap {

// Crank-resolved cylinder pressure for one stationary speed point.
// File schema: `alpha_cr_deg,cycle_001,...` with `# engine_speed_rpm=` and
// `# p_unit=Pa` metadata lines.
struct PressureTrace {
    std::vector<double> crank_angle;          // [deg], strictly increasing
    std::vector<std::vector<double>> cycles;  // cycles x angles [Pa]
    double engine_speed = 0.0;                // [rpm]

    std::size_t n_cycles() const { return cycles.size(); }
    std::size_t n_angles() const { return crank_angle.size(); }

    void validate(const std::string& context) const {
        require(crank_angle.size() >= 2, errc::bad_config, "pressure trace too short in " + context);
        for (std::size_t i = 0; i + 1 < crank_angle.size(); ++i) {
            require(crank_angle[i] < crank_angle[i + 1], errc::grid_mismatch,
                    "crank angle not strictly increasing in " + context);
            require(crank_angle[i + 1] - crank_angle[i] <= 0.1 + 1e-9, errc::bad_config,
                    "crank-angle resolution coarser than 0.1 deg in " + context);
        }
        require(engine_speed > 0.0, errc::bad_config, "engine speed missing in " + context);
        for (const auto& c : cycles) {
            require(c.size() == crank_angle.size(), errc::grid_mismatch,
                    "cycle length mismatch in " + context);
            for (double p : c)
                require(p > 0.0 && std::isfinite(p), errc::non_positive_pressure,
                        "non-positive pressure sample in " + context);
        }
    }
};

inline PressureTrace load_pressure_trace(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    PressureTrace out;
    out.engine_speed = t.meta_number("engine_speed_rpm", ctx);
    auto unit = t.metadata.find("p_unit");
    require(unit != t.metadata.end() && unit->second == "Pa", errc::bad_config,
            "pressure unit must be declared as Pa in " + ctx);
    int a_col = t.require_column("alpha_cr_deg", ctx);
    out.crank_angle = t.column("alpha_cr_deg", ctx);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (static_cast<int>(c) == a_col) continue;
        std::vector<double> cycle(t.n_rows());
        for (std::size_t r = 0; r < t.n_rows(); ++r) cycle[r] = t.rows[r][c];
        out.cycles.push_back(std::move(cycle));
    }
    require(!out.cycles.empty(), errc::missing_column, "no cycle columns in " + ctx);
    out.validate(ctx);
    return out;
}

inline void save_pressure_trace(const std::filesystem::path& path, const PressureTrace& trace) {
    csv::Writer w(path);
    w.meta("engine_speed_rpm", trace.engine_speed);
    w.meta("p_unit", "Pa");
    std::vector<std::string> cols = {"alpha_cr_deg"};
    for (std::size_t c = 0; c < trace.n_cycles(); ++c) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "cycle_%03zu", c + 1);
        cols.emplace_back(buf);
    }
    w.header(cols);
    // 10 significant digits keep the files compact at full crank resolution
    std::string line;
    char buf[32];
    for (std::size_t r = 0; r < trace.n_angles(); ++r) {
        line.clear();
        int n = std::snprintf(buf, sizeof buf, "%.10g", trace.crank_angle[r]);
        line.append(buf, static_cast<std::size_t>(n));
        for (std::size_t c = 0; c < trace.n_cycles(); ++c) {
            line += ',';
            n = std::snprintf(buf, sizeof buf, "%.10g", trace.cycles[c][r]);
            line.append(buf, static_cast<std::size_t>(n));
        }
        w.raw_line(line);
    }
    w.write();
}

}  // namespace thermolap
