#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "thermolap/errors.hpp"
#include "thermolap/grid.hpp"
#include "thermolap/histogram.hpp"

namespace thermolap {

// Conditional probability density p(A|N): one normed realization histogram
// per occupied state bin, keyed by the flat index into the state grid.
struct ConditionalPdf {
    std::vector<BinAxis> state_axes;
    std::vector<BinAxis> realization_axes;
    std::map<std::size_t, HistogramNd> bins;

    std::size_t state_size() const {
        std::size_t n = 1;
        for (const auto& a : state_axes) n *= static_cast<std::size_t>(a.n_bins());
        return n;
    }

    const HistogramNd* find(std::size_t flat_state) const {
        auto it = bins.find(flat_state);
        return it == bins.end() ? nullptr : &it->second;
    }
};

// Splits a joint histogram (realization axes first, then state axes) into
// per-state-bin conditionals: p(A|N) = p(A,N) / p(N) wherever p(N) > 0;
// unoccupied state bins stay absent.
inline ConditionalPdf conditional_pdf(const HistogramNd& joint, int n_realization_axes) {
    require(n_realization_axes >= 1 && n_realization_axes < joint.dim(), errc::bad_config,
            "joint histogram must have realization and state axes");
    ConditionalPdf out;
    for (int d = 0; d < n_realization_axes; ++d) out.realization_axes.push_back(joint.axis(d));
    for (int d = n_realization_axes; d < joint.dim(); ++d) out.state_axes.push_back(joint.axis(d));

    std::size_t state_block = 1;
    for (const auto& a : out.state_axes) state_block *= static_cast<std::size_t>(a.n_bins());

    joint.for_each_occupied([&](std::size_t flat, double count) {
        std::size_t flat_state = flat % state_block;
        std::size_t flat_real = flat / state_block;
        auto [it, inserted] = out.bins.try_emplace(flat_state, out.realization_axes);
        // unflatten realization part (row-major, last axis fastest)
        std::vector<int> ridx(out.realization_axes.size());
        for (int d = static_cast<int>(out.realization_axes.size()) - 1; d >= 0; --d) {
            int nb = out.realization_axes[static_cast<std::size_t>(d)].n_bins();
            ridx[static_cast<std::size_t>(d)] = static_cast<int>(flat_real % static_cast<std::size_t>(nb));
            flat_real /= static_cast<std::size_t>(nb);
        }
        it->second.add_at(ridx, count);
    });
    return out;
}

// Inner sums of the nested (Fubini) integration: the conditional mean of f
// per occupied state bin, laid out on the state grid.
struct SlaveTable {
    std::vector<int> state_bins;  // bins per state axis
    std::vector<double> value;
    std::vector<std::uint8_t> occupied;

    std::size_t size() const { return value.size(); }
};

// f is called with the realization bin centers and the flat state index.
template <class F>
inline SlaveTable build_slave_table(const ConditionalPdf& cond, F&& f) {
    SlaveTable out;
    for (const auto& a : cond.state_axes) out.state_bins.push_back(a.n_bins());
    out.value.assign(cond.state_size(), 0.0);
    out.occupied.assign(cond.state_size(), 0);

    std::vector<double> centers(cond.realization_axes.size());
    for (const auto& [flat_state, hist] : cond.bins) {
        double mean = 0.0;
        hist.for_each_occupied([&](std::size_t rf, double) {
            auto ridx = hist.unflatten(rf);
            for (std::size_t d = 0; d < centers.size(); ++d)
                centers[d] = hist.axis(static_cast<int>(d)).center(ridx[d]);
            mean += f(std::span<const double>(centers), flat_state) * hist.mass_flat(rf);
        });
        out.value[flat_state] = mean;
        out.occupied[flat_state] = 1;
    }
    return out;
}

// Outer sum of the nested integration over the state histogram.
inline double expect_nested(const SlaveTable& slave, const HistogramNd& state_hist) {
    require(slave.size() == state_hist.size(), errc::grid_mismatch,
            "slave table and state histogram must share the grid");
    double s = 0.0;
    state_hist.for_each_occupied([&](std::size_t flat, double) {
        require(slave.occupied[flat] != 0, errc::grid_mismatch,
                "state bin occupied in the histogram but missing in the slave table");
        s += slave.value[flat] * state_hist.mass_flat(flat);
    });
    return s;
}

// Flat summation over the joint histogram. Same quantity as expect_nested by
// Fubini's theorem, computed on an independent path; serves as its oracle.
template <class F>
inline double expect_joint(const HistogramNd& joint, int n_realization_axes, F&& f) {
    require(n_realization_axes >= 1 && n_realization_axes < joint.dim(), errc::bad_config,
            "joint histogram must have realization and state axes");
    std::size_t state_block = 1;
    for (int d = n_realization_axes; d < joint.dim(); ++d)
        state_block *= static_cast<std::size_t>(joint.axis(d).n_bins());

    double s = 0.0;
    std::vector<double> centers(static_cast<std::size_t>(n_realization_axes));
    joint.for_each_occupied([&](std::size_t flat, double) {
        auto idx = joint.unflatten(flat);
        for (int d = 0; d < n_realization_axes; ++d)
            centers[static_cast<std::size_t>(d)] = joint.axis(d).center(idx[static_cast<std::size_t>(d)]);
        s += f(std::span<const double>(centers), flat % state_block) * joint.mass_flat(flat);
    });
    return s;
}

// Conditional mean at one state bin (a pointer-matrix row), i.e. the
// transient expectation at the current engine state.
template <class F>
inline double expect_transient(const ConditionalPdf& cond, std::size_t flat_state, F&& f) {
    const HistogramNd* hist = cond.find(flat_state);
    if (hist == nullptr)
        fail(errc::unreachable_state,
             "state bin " + std::to_string(flat_state) + " has no conditional PDF");
    double mean = 0.0;
    std::vector<double> centers(cond.realization_axes.size());
    hist->for_each_occupied([&](std::size_t rf, double) {
        auto ridx = hist->unflatten(rf);
        for (std::size_t d = 0; d < centers.size(); ++d)
            centers[d] = hist->axis(static_cast<int>(d)).center(ridx[d]);
        mean += f(std::span<const double>(centers)) * hist->mass_flat(rf);
    });
    return mean;
}

// Statistics of a joint (alpha, T_ref) histogram: mean HTC, mean flux product
// and the statistically modified reference temperature T* = <alpha T>/<alpha>.
struct HtcStatistics {
    double alpha_mean = 0.0;
    double alpha_T_mean = 0.0;
    double T_star = 0.0;
};

inline HtcStatistics modified_reference_temperature(const HistogramNd& pdf) {
    require(pdf.dim() == 2, errc::grid_mismatch,
            "modified reference temperature needs a joint (alpha, T_ref) histogram");
    HtcStatistics st;
    pdf.for_each_occupied([&](std::size_t flat, double) {
        auto idx = pdf.unflatten(flat);
        double a = pdf.axis(0).center(idx[0]);
        double T = pdf.axis(1).center(idx[1]);
        double mass = pdf.mass_flat(flat);
        st.alpha_mean += a * mass;
        st.alpha_T_mean += a * T * mass;
    });
    require(st.alpha_mean > 0.0, errc::zero_mean_htc, "mean HTC is zero");
    st.T_star = st.alpha_T_mean / st.alpha_mean;
    return st;
}

// Linearization between test-bench engine speed grid points.
inline double interpolate_speed(double f_left, double f_right, double n_left, double n_right,
                                double n_engine) {
    require(n_left < n_right, errc::out_of_bracket, "speed bracket must be increasing");
    require(n_engine >= n_left && n_engine <= n_right, errc::out_of_bracket,
            "engine speed " + std::to_string(n_engine) + " outside bracket [" +
                std::to_string(n_left) + ", " + std::to_string(n_right) + "]");
    double a = (n_engine - n_left) / (n_right - n_left);
    return (1.0 - a) * f_left + a * f_right;
}

inline SlaveTable interpolate_speed(const SlaveTable& left, const SlaveTable& right, double n_left,
                                    double n_right, double n_engine) {
    require(left.size() == right.size(), errc::grid_mismatch,
            "slave tables must share the state grid");
    SlaveTable out = left;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (left.occupied[i] && right.occupied[i]) {
            out.value[i] = interpolate_speed(left.value[i], right.value[i], n_left, n_right, n_engine);
            out.occupied[i] = 1;
        } else {
            out.value[i] = 0.0;
            out.occupied[i] = 0;  // undefined bins stay flagged
        }
    }
    return out;
}

}  // namespace thermolap
