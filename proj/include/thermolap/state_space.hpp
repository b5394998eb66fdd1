#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/grid.hpp"
#include "thermolap/histogram.hpp"
#include "thermolap/telemetry.hpp"

namespace thermolap {

struct DiscretizedState {
    StateIndex idx;
    bool clamped;
};

// Bin index per state dimension; out-of-range states clamp to boundary bins.
inline DiscretizedState discretize_state(const EngineState& state, const EdgesGrid& grid) {
    DiscretizedState out{};
    out.clamped = false;
    for (int d = 0; d < kStateDims; ++d) {
        auto hit = grid.axis(d).locate(state.dim(d));
        out.idx[static_cast<std::size_t>(d)] = hit.bin;
        out.clamped |= hit.clamped;
    }
    return out;
}

// Normed 5D histogram of the engine state plus clamp bookkeeping.
struct StateHistogram {
    HistogramNd hist;
    std::size_t clamped_samples = 0;

    explicit StateHistogram(const EdgesGrid& grid) : hist(grid.axes) {}
};

inline StateHistogram build_state_histogram(const TelemetrySeries& series, const EdgesGrid& grid) {
    require(!series.states.empty(), errc::empty_series, "cannot histogram an empty series");
    StateHistogram out(grid);
    for (const auto& e : series.states) {
        std::array<double, kStateDims> x{e.n_engine, e.m_air, e.t_int, e.T_i, e.m_fuel};
        if (out.hist.add(x).clamped) ++out.clamped_samples;
    }
    return out;
}

// Row per simulation time step; the five columns index the edges grid for the
// state held (zero-order) at t = t0 + i*dt_sim.
struct PointerMatrix {
    std::vector<StateIndex> rows;
    std::vector<std::size_t> sample_of_row;  // originating telemetry sample
    double dt_sim = 0.0;
    double t0 = 0.0;
    std::size_t clamped_rows = 0;

    std::size_t n_steps() const { return rows.size(); }
    double time_of_row(std::size_t i) const { return t0 + static_cast<double>(i) * dt_sim; }
};

inline PointerMatrix build_pointer_matrix(const TelemetrySeries& series, const EdgesGrid& grid,
                                          double dt_sim, double horizon = -1.0) {
    require(dt_sim > 0.0, errc::bad_config, "dt_sim must be positive");
    require(!series.states.empty(), errc::empty_series, "cannot build pointer matrix from empty series");
    const double span = series.duration();
    if (horizon < 0.0) horizon = span;
    if (horizon > span * (1.0 + 1e-12) + 1e-12)
        fail(errc::horizon_exceeded, "simulation horizon " + std::to_string(horizon) +
                                         " s exceeds telemetry span " + std::to_string(span) + " s");

    PointerMatrix out;
    out.dt_sim = dt_sim;
    out.t0 = series.timestamps.front();
    std::size_t n_steps = static_cast<std::size_t>(std::floor(horizon / dt_sim * (1.0 + 1e-12))) + 1;
    out.rows.reserve(n_steps);
    out.sample_of_row.reserve(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        double t = out.t0 + static_cast<double>(i) * dt_sim;
        std::size_t j = series.sample_index_at(t);
        auto d = discretize_state(series.states[j], grid);
        if (d.clamped) ++out.clamped_rows;
        out.rows.push_back(d.idx);
        out.sample_of_row.push_back(j);
    }
    return out;
}

inline void write_pointer_matrix(const std::filesystem::path& path, const PointerMatrix& pm) {
    csv::Writer w(path);
    w.meta("dt_sim_s", pm.dt_sim);
    w.meta("t0_s", pm.t0);
    w.header({"step", "i_n_engine", "i_m_air", "i_t_int", "i_T_i", "i_m_fuel"});
    for (std::size_t i = 0; i < pm.rows.size(); ++i) {
        const auto& r = pm.rows[i];
        w.row({static_cast<double>(i), static_cast<double>(r[0]), static_cast<double>(r[1]),
               static_cast<double>(r[2]), static_cast<double>(r[3]), static_cast<double>(r[4])});
    }
    w.write();
}

inline PointerMatrix load_pointer_matrix(const std::filesystem::path& path, const EdgesGrid& grid) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    PointerMatrix pm;
    pm.dt_sim = t.meta_number("dt_sim_s", ctx);
    pm.t0 = t.meta_number("t0_s", ctx);
    require(pm.dt_sim > 0.0, errc::bad_config, "pointer matrix dt must be positive in " + ctx);
    int cols[5];
    const char* names[5] = {"i_n_engine", "i_m_air", "i_t_int", "i_T_i", "i_m_fuel"};
    for (int i = 0; i < 5; ++i) cols[i] = t.require_column(names[i], ctx);
    for (const auto& row : t.rows) {
        StateIndex idx{};
        for (int d = 0; d < kStateDims; ++d) {
            int b = static_cast<int>(row[static_cast<std::size_t>(cols[d])]);
            require(b >= 0 && b < grid.axis(d).n_bins(), errc::bad_config,
                    "pointer index out of range for dimension " + std::string(kStateDimNames[d]) +
                        " in " + ctx);
            idx[static_cast<std::size_t>(d)] = b;
        }
        pm.rows.push_back(idx);
        pm.sample_of_row.push_back(0);  // provenance is not persisted
    }
    require(!pm.rows.empty(), errc::empty_series, "pointer matrix has no rows in " + ctx);
    return pm;
}

inline void write_state_histogram(const std::filesystem::path& path, const StateHistogram& sh) {
    csv::Writer w(path);
    w.meta("total_samples", sh.hist.total());
    w.meta("clamped_samples", static_cast<double>(sh.clamped_samples));
    w.header({"i_n_engine", "i_m_air", "i_t_int", "i_T_i", "i_m_fuel", "count", "density"});
    sh.hist.for_each_occupied([&](std::size_t flat, double count) {
        auto idx = sh.hist.unflatten(flat);
        w.row({static_cast<double>(idx[0]), static_cast<double>(idx[1]), static_cast<double>(idx[2]),
               static_cast<double>(idx[3]), static_cast<double>(idx[4]), count,
               sh.hist.density_flat(flat)});
    });
    w.write();
}

inline StateHistogram load_state_histogram(const std::filesystem::path& path, const EdgesGrid& grid) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    StateHistogram sh(grid);
    sh.clamped_samples = static_cast<std::size_t>(t.meta_number("clamped_samples", ctx));
    int cols[5];
    const char* names[5] = {"i_n_engine", "i_m_air", "i_t_int", "i_T_i", "i_m_fuel"};
    for (int i = 0; i < 5; ++i) cols[i] = t.require_column(names[i], ctx);
    int count_col = t.require_column("count", ctx);
    int density_col = t.require_column("density", ctx);
    for (const auto& row : t.rows) {
        StateIndex idx{};
        for (int d = 0; d < kStateDims; ++d)
            idx[static_cast<std::size_t>(d)] = static_cast<int>(row[static_cast<std::size_t>(cols[d])]);
        double count = row[static_cast<std::size_t>(count_col)];
        require(count >= 0.0, errc::bad_config, "negative count in " + ctx);
        sh.hist.add_at(idx, count);
    }
    require(sh.hist.total() == t.meta_number("total_samples", ctx), errc::bad_config,
            "histogram total does not match its metadata in " + ctx);
    // re-validate invariants: normalization and the stored densities
    require(std::abs(sh.hist.integral() - 1.0) < 1e-12, errc::bad_config,
            "histogram does not integrate to one in " + ctx);
    for (const auto& row : t.rows) {
        StateIndex idx{};
        for (int d = 0; d < kStateDims; ++d)
            idx[static_cast<std::size_t>(d)] = static_cast<int>(row[static_cast<std::size_t>(cols[d])]);
        double stored = row[static_cast<std::size_t>(density_col)];
        require(std::abs(sh.hist.density_at(idx) - stored) <= 1e-12 * std::max(stored, 1e-300),
                errc::bad_config, "stored density inconsistent in " + ctx);
    }
    return sh;
}

}  // namespace thermolap
