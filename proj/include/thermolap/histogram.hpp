#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "thermolap/grid.hpp"

namespace thermolap {

// N-dimensional normed histogram. Counts are stored explicitly; densities are
// derived as count / (total * bin volume), so the density always integrates
// to one over the grid and rescaling an axis (change of variables) keeps the
// normalization without touching the counts.
class HistogramNd {
public:
    explicit HistogramNd(std::vector<BinAxis> axes) : axes_(std::move(axes)) {
        require(!axes_.empty(), errc::bad_config, "histogram needs at least one axis");
        strides_.assign(axes_.size(), 1);
        for (int d = static_cast<int>(axes_.size()) - 2; d >= 0; --d)
            strides_[static_cast<std::size_t>(d)] =
                strides_[static_cast<std::size_t>(d) + 1] *
                static_cast<std::size_t>(axes_[static_cast<std::size_t>(d) + 1].n_bins());
        std::size_t n = strides_[0] * static_cast<std::size_t>(axes_[0].n_bins());
        counts_.assign(n, 0.0);
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return counts_.size(); }
    const BinAxis& axis(int d) const { return axes_[static_cast<std::size_t>(d)]; }
    const std::vector<BinAxis>& axes() const { return axes_; }

    std::size_t flat_index(std::span<const int> idx) const {
        std::size_t f = 0;
        for (std::size_t d = 0; d < axes_.size(); ++d)
            f += strides_[d] * static_cast<std::size_t>(idx[d]);
        return f;
    }

    std::vector<int> unflatten(std::size_t flat) const {
        std::vector<int> idx(axes_.size());
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            idx[d] = static_cast<int>(flat / strides_[d]);
            flat %= strides_[d];
        }
        return idx;
    }

    struct AddResult {
        std::vector<int> idx;
        bool clamped;
    };

    AddResult add(std::span<const double> x, double weight = 1.0) {
        AddResult r;
        r.idx.resize(axes_.size());
        r.clamped = false;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            auto hit = axes_[d].locate(x[d]);
            r.idx[d] = hit.bin;
            r.clamped |= hit.clamped;
        }
        counts_[flat_index(r.idx)] += weight;
        total_ += weight;
        return r;
    }

    void add_at(std::span<const int> idx, double weight) {
        counts_[flat_index(idx)] += weight;
        total_ += weight;
    }

    double total() const { return total_; }
    double count_flat(std::size_t flat) const { return counts_[flat]; }
    double count_at(std::span<const int> idx) const { return counts_[flat_index(idx)]; }

    double bin_volume_flat(std::size_t flat) const {
        double v = 1.0;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            int i = static_cast<int>(flat / strides_[d]);
            flat %= strides_[d];
            v *= axes_[d].width(i);
        }
        return v;
    }
    double bin_volume(std::span<const int> idx) const {
        double v = 1.0;
        for (std::size_t d = 0; d < axes_.size(); ++d) v *= axes_[d].width(idx[d]);
        return v;
    }

    // Probability density per unit bin volume; zero where counts are zero.
    double density_flat(std::size_t flat) const {
        if (total_ <= 0.0 || counts_[flat] == 0.0) return 0.0;
        return counts_[flat] / (total_ * bin_volume_flat(flat));
    }
    double density_at(std::span<const int> idx) const {
        if (total_ <= 0.0) return 0.0;
        double c = counts_[flat_index(idx)];
        return c == 0.0 ? 0.0 : c / (total_ * bin_volume(idx));
    }

    // Probability mass of a bin (density * volume).
    double mass_flat(std::size_t flat) const { return total_ > 0.0 ? counts_[flat] / total_ : 0.0; }

    double integral() const {
        double s = 0.0;
        for (std::size_t f = 0; f < counts_.size(); ++f)
            if (counts_[f] != 0.0) s += mass_flat(f);
        return s;
    }

    // E[center of `axis`] under the histogram.
    double mean(int d) const {
        double s = 0.0;
        for (std::size_t f = 0; f < counts_.size(); ++f) {
            if (counts_[f] == 0.0) continue;
            std::size_t rem = f;
            for (int k = 0; k < d; ++k) rem %= strides_[static_cast<std::size_t>(k)];
            int i = static_cast<int>(rem / strides_[static_cast<std::size_t>(d)]);
            s += axes_[static_cast<std::size_t>(d)].center(i) * mass_flat(f);
        }
        return s;
    }

    // Change of variables x_d -> factor_d * x_d: edges scale, densities adjust
    // through the bin volumes, total probability stays one.
    void scale_axes(std::span<const double> factors) {
        for (std::size_t d = 0; d < axes_.size(); ++d) axes_[d].scale(factors[d]);
    }

    template <class F>  // F(flat_index, count)
    void for_each_occupied(F&& fn) const {
        for (std::size_t f = 0; f < counts_.size(); ++f)
            if (counts_[f] != 0.0) fn(f, counts_[f]);
    }

    bool operator==(const HistogramNd& o) const {
        return axes_ == o.axes_ && counts_ == o.counts_ && total_ == o.total_;
    }

private:
    std::vector<BinAxis> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> counts_;
    double total_ = 0.0;
};

}  // namespace thermolap
