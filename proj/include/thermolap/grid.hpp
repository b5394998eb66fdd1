#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thermolap/errors.hpp"

namespace thermolap {

// One binning dimension. Bins are left-closed/right-open; the last bin is
// closed on both sides. Out-of-range values clamp to the boundary bins.
class BinAxis {
public:
    explicit BinAxis(std::vector<double> edges) : edges_(std::move(edges)) {
        require(edges_.size() >= 2, errc::bad_config, "axis needs at least 2 edges");
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
            require(std::isfinite(edges_[i]) && std::isfinite(edges_[i + 1]), errc::non_finite_value,
                    "axis edge not finite");
            require(edges_[i] < edges_[i + 1], errc::bad_config, "axis edges must be strictly increasing");
        }
    }

    struct Hit {
        int bin;
        bool clamped;
    };

    Hit locate(double x) const {
        if (x < edges_.front()) return {0, true};
        if (x > edges_.back()) return {n_bins() - 1, true};
        if (x == edges_.back()) return {n_bins() - 1, false};
        auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        return {static_cast<int>(it - edges_.begin()) - 1, false};
    }

    int n_bins() const { return static_cast<int>(edges_.size()) - 1; }
    double width(int i) const { return edges_[static_cast<std::size_t>(i) + 1] - edges_[static_cast<std::size_t>(i)]; }
    double center(int i) const { return 0.5 * (edges_[static_cast<std::size_t>(i)] + edges_[static_cast<std::size_t>(i) + 1]); }
    double lower(int i) const { return edges_[static_cast<std::size_t>(i)]; }
    double upper(int i) const { return edges_[static_cast<std::size_t>(i) + 1]; }
    double lo() const { return edges_.front(); }
    double hi() const { return edges_.back(); }
    const std::vector<double>& edges() const { return edges_; }

    void scale(double factor) {
        require(factor > 0.0, errc::non_positive_input, "axis scale factor must be positive");
        for (double& e : edges_) e *= factor;
    }

    bool operator==(const BinAxis& other) const { return edges_ == other.edges_; }

private:
    std::vector<double> edges_;
};

// Equal-count axis over [lo, hi]; degenerate data gets a padded single bin.
inline BinAxis uniform_axis(double lo, double hi, int n_bins) {
    require(n_bins >= 1, errc::bad_config, "need at least one bin");
    if (!(lo < hi)) {
        double pad = std::max(std::abs(lo) * 1e-6, 1e-12);
        lo -= pad;
        hi += pad;
    }
    std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i)
        edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / n_bins;
    edges.back() = hi;
    return BinAxis(std::move(edges));
}

inline BinAxis axis_from_samples(std::span<const double> values, int n_bins, double rel_pad = 0.01) {
    require(!values.empty(), errc::empty_series, "no samples for axis construction");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double pad = (hi - lo) * rel_pad;
    if (pad == 0.0) pad = std::max(std::abs(lo) * 1e-9, 1e-12);
    return uniform_axis(lo - pad, hi + pad, n_bins);
}

inline constexpr int kStateDims = 5;
inline constexpr std::array<const char*, kStateDims> kStateDimNames = {"n_engine", "m_air", "t_int",
                                                                       "T_i", "m_fuel"};

// Per-dimension bin edges of the 5D engine-state discretization.
struct EdgesGrid {
    std::vector<BinAxis> axes;  // size kStateDims

    static EdgesGrid from_edges(std::array<std::vector<double>, kStateDims> edges) {
        EdgesGrid g;
        g.axes.reserve(kStateDims);
        for (auto& e : edges) g.axes.emplace_back(std::move(e));
        return g;
    }

    const BinAxis& axis(int d) const { return axes[static_cast<std::size_t>(d)]; }
};

using StateIndex = std::array<int, kStateDims>;

}  // namespace thermolap
