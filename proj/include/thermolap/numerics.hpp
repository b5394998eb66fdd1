#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "thermolap/errors.hpp"

namespace thermolap {

// d f / d t on a (possibly non-uniform) grid: central differences in the
// interior, second-order one-sided stencils at the ends.
inline std::vector<double> derivative(std::span<const double> t, std::span<const double> f) {
    require(t.size() == f.size(), errc::grid_mismatch, "derivative: grid/value size mismatch");
    require(t.size() >= 3, errc::too_few_samples, "derivative needs at least 3 samples");
    const std::size_t n = t.size();
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
        // three-point formula, exact for parabolas on non-uniform grids
        d[i] = (f[i + 1] * h1 * h1 - f[i - 1] * h2 * h2 + f[i] * (h2 * h2 - h1 * h1)) /
               (h1 * h2 * (h1 + h2));
    }
    {
        double h1 = t[1] - t[0], h2 = t[2] - t[1];
        d[0] = (-f[2] * h1 * h1 + f[1] * (h1 + h2) * (h1 + h2) - f[0] * (h2 * h2 + 2.0 * h1 * h2)) /
               (h1 * h2 * (h1 + h2));
        h1 = t[n - 2] - t[n - 3];
        h2 = t[n - 1] - t[n - 2];
        d[n - 1] = (f[n - 3] * h2 * h2 - f[n - 2] * (h1 + h2) * (h1 + h2) +
                    f[n - 1] * (h1 * h1 + 2.0 * h1 * h2)) /
                   (h1 * h2 * (h1 + h2));
    }
    return d;
}

inline double trapezoid(std::span<const double> t, std::span<const double> f) {
    require(t.size() == f.size() && t.size() >= 2, errc::grid_mismatch, "trapezoid: bad inputs");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i]);
    return s;
}

// Piecewise-linear interpolation, clamped at the ends.
inline double interp1(std::span<const double> x, std::span<const double> y, double xi) {
    require(x.size() == y.size() && !x.empty(), errc::grid_mismatch, "interp1: bad inputs");
    if (xi <= x.front()) return y.front();
    if (xi >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xi);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    double a = (xi - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - a) * y[i - 1] + a * y[i];
}

}  // namespace thermolap
