#pragma once

#include <algorithm>
#include <filesystem>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"
#include "thermolap/telemetry.hpp"

namespace thermolap {

// One stationary full-load measuring point on the test bench.
struct FullLoadPoint {
    EngineState state;         // M_stat at this speed
    double t_exh = 0.0;        // exhaust gas temperature [K]
    double alpha_ign = 331.0;  // ignition crank angle [deg]
};

// The measured full-load line: the stationary reference states the part-load
// transform relates transient states to.
struct FullLoadTable {
    std::vector<FullLoadPoint> points;  // sorted by engine speed

    std::size_t size() const { return points.size(); }
    double speed(std::size_t i) const { return points[i].state.n_engine; }
    double min_speed() const { return points.front().state.n_engine; }
    double max_speed() const { return points.back().state.n_engine; }

    void validate() const {
        require(points.size() >= 2, errc::missing_reference,
                "full-load table needs at least 2 speed points");
        for (std::size_t i = 1; i < points.size(); ++i)
            require(speed(i) > speed(i - 1), errc::bad_config,
                    "full-load speeds must strictly increase");
    }

    struct Bracket {
        std::size_t left, right;
        double a;  // interpolation weight toward `right`
        bool clamped;
    };

    // Speeds outside the measured bracket clamp to the nearest endpoint.
    Bracket bracket(double n) const {
        if (n <= min_speed()) return {0, 0, 0.0, n < min_speed()};
        if (n >= max_speed()) {
            std::size_t last = points.size() - 1;
            return {last, last, 0.0, n > max_speed()};
        }
        std::size_t hi = 1;
        while (speed(hi) < n) ++hi;
        // exact grid point: no interpolation, bitwise reference values
        if (speed(hi) == n) return {hi, hi, 0.0, false};
        std::size_t lo = hi - 1;
        return {lo, hi, (n - speed(lo)) / (speed(hi) - speed(lo)), false};
    }

    template <class Get>
    double interpolate(double n, Get&& get, bool* clamped = nullptr) const {
        auto b = bracket(n);
        if (clamped != nullptr) *clamped = b.clamped;
        if (b.left == b.right) return get(points[b.left]);
        return (1.0 - b.a) * get(points[b.left]) + b.a * get(points[b.right]);
    }

    EngineState interpolate_state(double n, bool* clamped = nullptr) const {
        EngineState s;
        auto b = bracket(n);
        if (clamped != nullptr) *clamped = b.clamped;
        if (b.left == b.right) return points[b.left].state;
        const EngineState& l = points[b.left].state;
        const EngineState& r = points[b.right].state;
        auto mix = [&](double x, double y) { return (1.0 - b.a) * x + b.a * y; };
        s.n_engine = mix(l.n_engine, r.n_engine);
        s.m_air = mix(l.m_air, r.m_air);
        s.t_int = mix(l.t_int, r.t_int);
        s.T_i = mix(l.T_i, r.T_i);
        s.m_fuel = mix(l.m_fuel, r.m_fuel);
        return s;
    }

    double t_exh_at(double n) const {
        return interpolate(n, [](const FullLoadPoint& p) { return p.t_exh; });
    }

    FullLoadClassifier classifier(double rel_margin) const {
        FullLoadClassifier c;
        c.rel_margin = rel_margin;
        for (const auto& p : points) {
            c.speeds.push_back(p.state.n_engine);
            c.torques.push_back(p.state.T_i);
        }
        return c;
    }
};

inline FullLoadTable load_full_load_table(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    int cols[7];
    const char* names[7] = {"n_engine", "m_air", "t_int", "T_i", "m_fuel", "t_exh_K", "alpha_ign_deg"};
    for (int i = 0; i < 7; ++i) cols[i] = t.require_column(names[i], ctx);
    FullLoadTable table;
    for (const auto& row : t.rows) {
        FullLoadPoint p;
        p.state.n_engine = row[static_cast<std::size_t>(cols[0])];
        p.state.m_air = row[static_cast<std::size_t>(cols[1])];
        p.state.t_int = row[static_cast<std::size_t>(cols[2])];
        p.state.T_i = row[static_cast<std::size_t>(cols[3])];
        p.state.m_fuel = row[static_cast<std::size_t>(cols[4])];
        p.t_exh = row[static_cast<std::size_t>(cols[5])];
        p.alpha_ign = row[static_cast<std::size_t>(cols[6])];
        table.points.push_back(p);
    }
    std::sort(table.points.begin(), table.points.end(),
              [](const FullLoadPoint& a, const FullLoadPoint& b) {
                  return a.state.n_engine < b.state.n_engine;
              });
    table.validate();
    return table;
}

inline void save_full_load_table(const std::filesystem::path& path, const FullLoadTable& table) {
    csv::Writer w(path);
    w.header({"n_engine", "m_air", "t_int", "T_i", "m_fuel", "t_exh_K", "alpha_ign_deg"});
    for (const auto& p : table.points)
        w.row({p.state.n_engine, p.state.m_air, p.state.t_int, p.state.T_i, p.state.m_fuel, p.t_exh,
               p.alpha_ign});
    w.write();
}

}  // namespace thermolap
