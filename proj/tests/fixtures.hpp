#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thermolap/geometry.hpp"

namespace testutil {

inline thermolap::CylinderGeometry test_geom() {
    thermolap::CylinderGeometry g;
    g.bore = 0.086;
    g.stroke = 0.066;
    g.conrod_length = 0.12;
    g.compression_ratio = 10.0;
    g.n_cylinders = 1;
    return g;
}

struct WiebeFixture {
    std::vector<double> angle, volume, p_motored, p_fired, x_true;
};

// Forward model: polytropic motored base plus Wiebe-law combustion pressure
// rise referred to the clearance volume. Independent of the code under test.
inline WiebeFixture make_wiebe_fixture(const thermolap::CylinderGeometry& g, double step_deg = 0.1,
                                       double p_ivc = 1.8e5, double scale = 3.5e6) {
    WiebeFixture f;
    const double a_w = 5.0, m_w = 2.0, ign = 330.0, dur = 60.0;
    const double kappa_comp = 1.32, kappa_exp = 1.28;
    for (double a = 180.0; a <= 540.0 + 1e-9; a += step_deg) f.angle.push_back(a);
    const std::size_t n = f.angle.size();
    f.volume.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.volume[i] = thermolap::cylinder_volume(g, f.angle[i]);
    double v_ref = *std::min_element(f.volume.begin(), f.volume.end());

    f.x_true.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a = f.angle[i];
        f.x_true[i] = a < ign ? 0.0 : 1.0 - std::exp(-a_w * std::pow((a - ign) / dur, m_w + 1.0));
    }
    for (std::size_t i = 0; i < n; ++i) f.x_true[i] /= f.x_true.back();

    f.p_motored.resize(n);
    f.p_fired.resize(n);
    f.p_motored[0] = f.p_fired[0] = p_ivc;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double kappa = f.angle[i] < 360.0 ? kappa_comp : kappa_exp;
        double ratio = std::pow(f.volume[i] / f.volume[i + 1], kappa);
        f.p_motored[i + 1] = f.p_motored[i] * ratio;
        double v_mid = 0.5 * (f.volume[i] + f.volume[i + 1]);
        double dp_comb = (f.x_true[i + 1] - f.x_true[i]) * scale * v_ref / v_mid;
        f.p_fired[i + 1] = f.p_fired[i] * ratio + dp_comb;
    }
    return f;
}

}  // namespace testutil
