#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "thermolap/csv.hpp"
#include "thermolap/errors.hpp"

namespace thermolap {

// Per-surface-zone Newton boundary condition series: alpha(t) and the
// statistically modified reference temperature T_eff(t).
struct BoundaryConditionSeries {
    std::string zone;
    std::vector<double> t;      // [s], monotone
    std::vector<double> alpha;  // [W/(m^2 K)], >= 0
    std::vector<double> T_eff;  // [K]

    std::size_t size() const { return t.size(); }

    void validate() const {
        require(t.size() == alpha.size() && t.size() == T_eff.size(), errc::grid_mismatch,
                "BC series columns must align in zone " + zone);
        require(!t.empty(), errc::empty_series, "BC series empty in zone " + zone);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) require(t[i] > t[i - 1], errc::non_monotone_time, "BC time grid must increase");
            require(alpha[i] >= 0.0, errc::non_positive_input, "BC alpha must be non-negative");
        }
    }

    // Zero-order hold lookup.
    std::size_t index_at(double time) const {
        auto it = std::upper_bound(t.begin(), t.end(), time);
        if (it == t.begin()) return 0;
        return static_cast<std::size_t>(it - t.begin()) - 1;
    }
    double alpha_at(double time) const { return alpha[index_at(time)]; }
    double T_eff_at(double time) const { return T_eff[index_at(time)]; }
};

using BcSet = std::map<std::string, BoundaryConditionSeries>;

// --- CSV form ----------------------------------------------------------------

inline void save_bc_csv(const std::filesystem::path& path, const BoundaryConditionSeries& s) {
    csv::Writer w(path);
    w.meta("zone", s.zone);
    w.header({"t_s", "alpha_Wm2K", "T_eff_K"});
    for (std::size_t i = 0; i < s.size(); ++i) w.row({s.t[i], s.alpha[i], s.T_eff[i]});
    w.write();
}

inline BoundaryConditionSeries load_bc_csv(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    const std::string ctx = path.filename().string();
    BoundaryConditionSeries s;
    auto z = t.metadata.find("zone");
    s.zone = z == t.metadata.end() ? path.stem().string() : z->second;
    s.t = t.column("t_s", ctx);
    s.alpha = t.column("alpha_Wm2K", ctx);
    s.T_eff = t.column("T_eff_K", ctx);
    s.validate();
    return s;
}

// --- binary columnar form -----------------------------------------------------
// Layout (little endian): magic "TLBC", u32 version, u32 zone length, zone
// bytes, u64 row count, f64 dt, then the t / alpha / T_eff columns as f64.

inline void save_bc_binary(const std::filesystem::path& path, const BoundaryConditionSeries& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_failure, "cannot write " + path.string());
    out.write("TLBC", 4);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(1u);
    put_u32(static_cast<std::uint32_t>(s.zone.size()));
    out.write(s.zone.data(), static_cast<std::streamsize>(s.zone.size()));
    put_u64(s.size());
    put_f64(s.size() > 1 ? s.t[1] - s.t[0] : 0.0);
    auto put_col = [&](const std::vector<double>& col) {
        out.write(reinterpret_cast<const char*>(col.data()),
                  static_cast<std::streamsize>(col.size() * sizeof(double)));
    };
    put_col(s.t);
    put_col(s.alpha);
    put_col(s.T_eff);
}

inline BoundaryConditionSeries load_bc_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    require(in.good() && std::memcmp(magic, "TLBC", 4) == 0, errc::bad_config,
            "not a BC binary file: " + path.string());
    auto get_u32 = [&] {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&] {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    std::uint32_t version = get_u32();
    require(version == 1u, errc::bad_config, "unsupported BC binary version");
    std::uint32_t zlen = get_u32();
    BoundaryConditionSeries s;
    s.zone.resize(zlen);
    in.read(s.zone.data(), zlen);
    std::uint64_t n = get_u64();
    double dt = 0.0;
    in.read(reinterpret_cast<char*>(&dt), 8);
    auto get_col = [&](std::vector<double>& col) {
        col.resize(n);
        in.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(n * sizeof(double)));
    };
    get_col(s.t);
    get_col(s.alpha);
    get_col(s.T_eff);
    require(in.good(), errc::io_failure, "truncated BC binary file: " + path.string());
    s.validate();
    return s;
}

}  // namespace thermolap
