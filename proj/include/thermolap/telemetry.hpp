#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/grid.hpp"
#include "thermolap/histogram.hpp"

namespace thermolap {

// Outer boundary conditions of the engine, sampled at one instant.
struct EngineState {
    double n_engine = 0.0;  // [rpm]
    double m_air = 0.0;     // [mg/stroke]
    double t_int = 0.0;     // [K]
    double T_i = 0.0;       // indicated torque [Nm]
    double m_fuel = 0.0;    // [mg/stroke]

    double dim(int d) const {
        switch (d) {
            case 0: return n_engine;
            case 1: return m_air;
            case 2: return t_int;
            case 3: return T_i;
            default: return m_fuel;
        }
    }

    bool coasting() const { return T_i == 0.0; }
};

struct TelemetrySeries {
    std::vector<double> timestamps;    // strictly increasing [s]
    std::vector<EngineState> states;   // same length
    double sample_period = 0.0;        // representative spacing [s]

    std::size_t size() const { return states.size(); }
    double duration() const { return timestamps.empty() ? 0.0 : timestamps.back() - timestamps.front(); }

    // Zero-order hold: the latest sample with timestamp <= t.
    std::size_t sample_index_at(double t) const {
        require(!timestamps.empty(), errc::empty_series, "empty telemetry");
        auto it = std::upper_bound(timestamps.begin(), timestamps.end(), t);
        if (it == timestamps.begin()) return 0;
        return static_cast<std::size_t>(it - timestamps.begin()) - 1;
    }
    const EngineState& state_at(double t) const { return states[sample_index_at(t)]; }
};

// Rows accepted but suspicious; written to the consistency report.
struct ConsistencyFlag {
    std::size_t row;  // telemetry sample index (0-based)
    std::string column;
    std::string message;
};

struct LoadedTelemetry {
    TelemetrySeries series;
    std::vector<ConsistencyFlag> flags;
};

using ColumnMap = std::map<std::string, std::string>;  // canonical name -> file column

inline const std::vector<std::string>& telemetry_columns() {
    static const std::vector<std::string> cols = {"t", "n_engine", "m_air", "t_int", "T_i", "m_fuel"};
    return cols;
}

// Reads `t,n_engine,m_air,t_int,T_i,m_fuel` (units s, rpm, mg/stroke, K, Nm,
// mg/stroke). Physically inconsistent rows (torque without fuel) are kept but
// flagged; a sample period violating the low-pass contract
// dt <= 2*60/max(n_engine) is flagged as well.
inline LoadedTelemetry load_telemetry(const std::filesystem::path& path, const ColumnMap& schema = {}) {
    csv::Table table = csv::read(path);
    const std::string ctx = path.filename().string();

    auto mapped = [&](const std::string& canonical) {
        auto it = schema.find(canonical);
        return it == schema.end() ? canonical : it->second;
    };

    std::array<int, 6> col{};
    for (std::size_t i = 0; i < telemetry_columns().size(); ++i)
        col[i] = table.require_column(mapped(telemetry_columns()[i]), ctx);

    LoadedTelemetry out;
    auto& s = out.series;
    s.timestamps.reserve(table.n_rows());
    s.states.reserve(table.n_rows());

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto& row = table.rows[r];
        for (std::size_t i = 0; i < 6; ++i)
            if (!std::isfinite(row[static_cast<std::size_t>(col[i])]))
                fail(errc::non_finite_value, "non-finite value in row " + std::to_string(r + 1) +
                                                 ", column '" + telemetry_columns()[i] + "' of " + ctx);
        double t = row[static_cast<std::size_t>(col[0])];
        if (!s.timestamps.empty() && t <= s.timestamps.back())
            fail(errc::non_monotone_time, "timestamp not increasing at row " + std::to_string(r + 1) +
                                              " of " + ctx);
        EngineState e{row[static_cast<std::size_t>(col[1])], row[static_cast<std::size_t>(col[2])],
                      row[static_cast<std::size_t>(col[3])], row[static_cast<std::size_t>(col[4])],
                      row[static_cast<std::size_t>(col[5])]};
        if (e.n_engine < 0.0 || e.m_air < 0.0 || e.m_fuel < 0.0)
            fail(errc::non_finite_value, "negative magnitude in row " + std::to_string(r + 1) + " of " + ctx);
        if (e.m_fuel == 0.0 && e.T_i != 0.0)
            out.flags.push_back({r, "T_i", "torque without fuel (T_i=" + std::to_string(e.T_i) + ")"});
        s.timestamps.push_back(t);
        s.states.push_back(e);
    }
    require(!s.states.empty(), errc::empty_series, "no telemetry rows in " + ctx);

    if (s.size() > 1) {
        double span = s.timestamps.back() - s.timestamps.front();
        s.sample_period = span / static_cast<double>(s.size() - 1);
        double n_max = 0.0;
        for (const auto& e : s.states) n_max = std::max(n_max, e.n_engine);
        if (n_max > 0.0 && s.sample_period > 2.0 * 60.0 / n_max)
            out.flags.push_back({0, "t", "sample period " + std::to_string(s.sample_period) +
                                             " s exceeds low-pass bound " +
                                             std::to_string(2.0 * 60.0 / n_max) + " s"});
    }
    return out;
}

inline void write_consistency_report(const std::filesystem::path& path,
                                     const std::vector<ConsistencyFlag>& flags) {
    csv::Writer w(path);
    w.header({"row", "column", "message"});
    for (const auto& f : flags)
        w.raw_line(std::to_string(f.row) + "," + f.column + ",\"" + f.message + "\"");
    w.write();
}

// Full-load classification boundary in the T_i - n_engine plane: a torque
// curve sampled at grid speeds plus a relative margin. The curve location is
// configuration, not prescribed.
struct FullLoadClassifier {
    std::vector<double> speeds;   // increasing [rpm]
    std::vector<double> torques;  // [Nm]
    double rel_margin = 0.95;     // full load if T_i >= rel_margin * curve(n)

    double curve(double n) const {
        require(!speeds.empty(), errc::bad_config, "empty full-load curve");
        if (n <= speeds.front()) return torques.front();
        if (n >= speeds.back()) return torques.back();
        auto it = std::upper_bound(speeds.begin(), speeds.end(), n);
        std::size_t i = static_cast<std::size_t>(it - speeds.begin());
        double a = (n - speeds[i - 1]) / (speeds[i] - speeds[i - 1]);
        return (1.0 - a) * torques[i - 1] + a * torques[i];
    }

    bool is_full_load(const EngineState& e) const {
        return !e.coasting() && e.T_i >= rel_margin * curve(e.n_engine);
    }
};

struct LapStatistics {
    double full_load_fraction = 0.0;
    double coasting_fraction = 0.0;
    HistogramNd speed_histogram{std::vector<BinAxis>{BinAxis({0.0, 1.0})}};  // 1D over n_engine
};

inline LapStatistics lap_statistics(const TelemetrySeries& series, const FullLoadClassifier& classifier,
                                    const BinAxis& speed_axis) {
    require(!series.states.empty(), errc::empty_series, "lap_statistics on empty series");
    LapStatistics out{0.0, 0.0, HistogramNd({speed_axis})};
    std::size_t n_full = 0, n_coast = 0;
    for (const auto& e : series.states) {
        if (e.coasting())
            ++n_coast;
        else if (classifier.is_full_load(e))
            ++n_full;
        out.speed_histogram.add(std::array{e.n_engine});
    }
    out.full_load_fraction = static_cast<double>(n_full) / static_cast<double>(series.size());
    out.coasting_fraction = static_cast<double>(n_coast) / static_cast<double>(series.size());
    return out;
}

}  // namespace thermolap
