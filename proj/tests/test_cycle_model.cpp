#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "thermolap/cycle.hpp"
#include "thermolap/geometry.hpp"

using namespace thermolap;
using Catch::Approx;



TEST_CASE("cylinder_volume kinematics") {
    auto g = testutil::test_geom();
    double vc = g.clearance_volume();
    CHECK(cylinder_volume(g, 0.0) == Approx(vc).epsilon(1e-14));
    CHECK(cylinder_volume(g, 180.0) == Approx(g.compression_ratio * vc).epsilon(1e-12));
    CHECK(cylinder_volume(g, 360.0) == Approx(vc).epsilon(1e-12));
    // independent slider-crank evaluation at 90 deg, frozen from hand arithmetic
    CHECK(cylinder_volume(g, 90.0) == Approx(2.6116401671183253e-4).epsilon(1e-12));
    // 720-periodic and smooth
    CHECK(cylinder_volume(g, 90.0) == Approx(cylinder_volume(g, 810.0)).epsilon(1e-12));
    CHECK(piston_speed(g, 0.0, 6000) == Approx(0.0).margin(1e-12));
    CHECK(piston_speed(g, 180.0, 6000) == Approx(0.0).margin(1e-10));
    CHECK(piston_speed(g, 90.0, 6000) == Approx(20.734511513692638).epsilon(1e-12));
    CHECK(mean_piston_speed(g, 6000) == Approx(13.2).epsilon(1e-14));
}

TEST_CASE("mean_gas_temperature") {
    CHECK(mean_gas_temperature(5e6, 2.5e-4, 0.05) == Approx(3006.809099614623).epsilon(1e-12));
    CHECK(mean_gas_temperature(2.0 * 5e6, 2.5e-4, 0.05) ==
          Approx(2.0 * mean_gas_temperature(5e6, 2.5e-4, 0.05)).epsilon(1e-14));
    // molar volume sanity: 1 mol at ambient conditions
    CHECK(mean_gas_temperature(101325.0, 22.414e-3, 1.0) == Approx(273.16).margin(0.1));
    CHECK_THROWS_AS(mean_gas_temperature(0.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS(mean_gas_temperature(1.0, -1.0, 1.0), Error);
}

TEST_CASE("burn_fraction") {
    auto g = testutil::test_geom();
    auto f = testutil::make_wiebe_fixture(g);

    SECTION("fired identical to motored gives x == 0") {
        auto bf = burn_fraction(f.angle, f.p_motored, f.p_motored, f.volume);
        for (double x : bf.x) CHECK(x == 0.0);
    }

    SECTION("Wiebe fixture recovered within 2% Linf") {
        auto bf = burn_fraction(f.angle, f.p_fired, f.p_motored, f.volume);
        CHECK(bf.x.back() == 1.0);  // normalized end of burn
        double linf = 0.0;
        for (std::size_t i = 0; i < bf.x.size(); ++i)
            linf = std::max(linf, std::abs(bf.x[i] - f.x_true[i]));
        CHECK(linf < 0.02);
        for (std::size_t i = 1; i < bf.x.size(); ++i) CHECK(bf.x[i] >= bf.x[i - 1]);
        CHECK(bf.x.front() == 0.0);
    }

    SECTION("grid mismatch rejected") {
        std::vector<double> short_p(f.p_fired.begin(), f.p_fired.end() - 1);
        CHECK_THROWS_AS(burn_fraction(f.angle, short_p, f.p_motored, f.volume), Error);
    }
}

TEST_CASE("unburnt_temperature") {
    std::vector<double> p = {2e6};
    SECTION("identity at ignition pressure") {
        auto T = unburnt_temperature(std::array{2e6}, 2e6, 700.0, 1.35);
        CHECK(T[0] == Approx(700.0).epsilon(1e-14));
    }
    SECTION("pressure doubling with kappa = 1.4") {
        auto T = unburnt_temperature(std::array{4e6}, 2e6, 700.0, 1.4);
        CHECK(T[0] == Approx(700.0 * 1.2190136542044754).epsilon(1e-12));
    }
    SECTION("isothermal limit kappa = 1") {
        auto T = unburnt_temperature(std::array{4e6, 8e6}, 2e6, 700.0, 1.0);
        CHECK(T[0] == Approx(700.0).epsilon(1e-14));
        CHECK(T[1] == Approx(700.0).epsilon(1e-14));
    }
    SECTION("non-positive pressure rejected") {
        CHECK_THROWS_AS(unburnt_temperature(std::array{-1.0}, 2e6, 700.0, 1.35), Error);
    }
}

TEST_CASE("solve_tke") {
    SECTION("production only: k V^(2/3) conserved, V halved gives k = 10 * 2^(2/3)") {
        // smooth compression from V0 to V0/2
        std::size_t n = 2001;
        std::vector<double> t(n), V(n), l(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = static_cast<double>(i) / static_cast<double>(n - 1);
            t[i] = 0.01 * s;
            V[i] = 4e-4 * (1.0 - 0.5 * (0.5 - 0.5 * std::cos(std::numbers::pi * s)));
            l[i] = eddy_length(V[i]);
        }
        auto r = solve_tke(t, V, l, 10.0, 0.0);
        CHECK(r.k.back() == Approx(10.0 * std::pow(2.0, 2.0 / 3.0)).epsilon(1e-6));
        double c0 = r.k.front() * std::pow(V.front(), 2.0 / 3.0);
        for (std::size_t i = 0; i < n; i += 100)
            CHECK(r.k[i] * std::pow(V[i], 2.0 / 3.0) == Approx(c0).epsilon(1e-6));
    }

    SECTION("pure dissipation closed form: k = k0 / (1 + eps_c sqrt(k0) t / (2 l))^2") {
        std::size_t n = 2001;
        std::vector<double> t(n), V(n, 5e-4), l(n, 0.1);
        for (std::size_t i = 0; i < n; ++i) t[i] = 0.02 * static_cast<double>(i) / static_cast<double>(n - 1);
        auto r = solve_tke(t, V, l, 100.0, 1.0);
        CHECK(r.k.back() == Approx(25.0).epsilon(1e-6));
        // midpoint check against the closed form
        double tm = t[n / 2];
        double expected = 100.0 / std::pow(1.0 + std::sqrt(100.0) * tm / (2.0 * 0.1), 2.0);
        CHECK(r.k[n / 2] == Approx(expected).epsilon(1e-6));
    }

    SECTION("null initial state stays null") {
        std::vector<double> t = {0, 0.01, 0.02}, V = {4e-4, 3e-4, 2e-4}, l = {0.1, 0.09, 0.08};
        auto r = solve_tke(t, V, l, 0.0, 3.2);
        for (double k : r.k) CHECK(k == 0.0);
        CHECK(r.clamped_steps == 0);
    }
}

TEST_CASE("characteristic_velocity") {
    SECTION("before ignition the combustion term vanishes") {
        CHECK(characteristic_velocity(6.0, 10.0, 0.0, 123.0, 456.0, 700.0, 900.0, 0.086) ==
              Approx(std::sqrt(8.0 / 3.0 * 6.0 + 100.0)).epsilon(1e-14));
    }
    SECTION("kinematic zero at dead center") {
        CHECK(characteristic_velocity(0.0, 0.0, 0.0, 0.0, 0.0, 700.0, 900.0, 0.086) == 0.0);
    }
    SECTION("k=6, v_p=10, y=1, derivatives zero") {
        CHECK(characteristic_velocity(6.0, 10.0, 1.0, 0.0, 0.0, 700.0, 900.0, 0.086) ==
              Approx(10.770329614269007).epsilon(1e-12));
    }
}

TEST_CASE("htc_trace power law") {
    HtcClosure c{2.5e-3, 0.78};

    SECTION("doubling p multiplies alpha by 2^0.78") {
        double a1 = htc_point(5e6, 20.0, 1500.0, c);
        double a2 = htc_point(1e7, 20.0, 1500.0, c);
        CHECK(a2 / a1 == Approx(1.7171308728755075).epsilon(1e-12));
    }
    SECTION("zero velocity gives zero HTC") {
        CHECK(htc_point(5e6, 0.0, 1500.0, c) == 0.0);
    }
    SECTION("peak-normalized calibration") {
        std::vector<double> p = {1e6, 5e6, 2e6}, v = {5, 25, 10}, Tg = {500, 1800, 900};
        HtcClosure unit{1.0, 0.78};
        auto a = htc_trace(p, v, Tg, unit);
        double peak = *std::max_element(a.begin(), a.end());
        HtcClosure norm{1.0 / peak, 0.78};
        auto an = htc_trace(p, v, Tg, norm);
        CHECK(*std::max_element(an.begin(), an.end()) == Approx(1.0).epsilon(1e-14));
    }
    SECTION("homogeneity: scaling p by lambda scales alpha by lambda^m, argmax unchanged") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        std::vector<double> p(50), v(50), Tg(50);
        for (std::size_t i = 0; i < 50; ++i) {
            p[i] = 1e6 * u(rng);
            v[i] = 10.0 * u(rng);
            Tg[i] = 1000.0 * u(rng);
        }
        auto a0 = htc_trace(p, v, Tg, c);
        double lam = 1.7;
        std::vector<double> ps(p);
        for (double& x : ps) x *= lam;
        auto a1 = htc_trace(ps, v, Tg, c);
        double f = std::pow(lam, c.exponent);
        for (std::size_t i = 0; i < 50; ++i) CHECK(a1[i] == Approx(a0[i] * f).epsilon(1e-12));
        CHECK(std::max_element(a0.begin(), a0.end()) - a0.begin() ==
              std::max_element(a1.begin(), a1.end()) - a1.begin());
    }
}

TEST_CASE("cycle_aggregate") {
    SECTION("constant traces are unchanged") {
        std::vector<double> ang, a, T;
        for (double x = 0.0; x <= 720.0 + 1e-9; x += 1.0) {
            ang.push_back(x);
            a.push_back(850.0);
            T.push_back(1234.0);
        }
        auto r = cycle_aggregate(ang, a, T, 6000.0);
        CHECK(r.alpha_mean == Approx(850.0).epsilon(1e-12));
        CHECK(r.T_eff == Approx(1234.0).epsilon(1e-12));
    }

    SECTION("two-level fixture: alpha {500,1500}, Tg {800,1200} over equal durations") {
        std::vector<double> ang, a, T;
        for (double x = 0.0; x <= 720.0 + 1e-9; x += 0.5) {
            ang.push_back(x);
            bool first = x < 360.0;
            a.push_back(first ? 500.0 : 1500.0);
            T.push_back(first ? 800.0 : 1200.0);
        }
        auto r = cycle_aggregate(ang, a, T, 7000.0);
        // trapezoid sees one mixed step at the switch; tolerance covers it
        CHECK(r.alpha_mean == Approx(1000.0).epsilon(2e-3));
        CHECK(r.T_eff == Approx(1100.0).epsilon(2e-3));
    }

    SECTION("T_eff bounded by trace extrema") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.1, 1.0);
        std::vector<double> ang, a, T;
        for (double x = 0.0; x <= 720.0 + 1e-9; x += 1.0) {
            ang.push_back(x);
            a.push_back(2000.0 * u(rng));
            T.push_back(600.0 + 1500.0 * u(rng));
        }
        auto r = cycle_aggregate(ang, a, T, 9000.0);
        CHECK(r.T_eff >= *std::min_element(T.begin(), T.end()));
        CHECK(r.T_eff <= *std::max_element(T.begin(), T.end()));
    }

    SECTION("alpha_mean invariant under grid refinement within 0.1%") {
        auto eval = [](double step) {
            std::vector<double> ang, a, T;
            for (double x = 0.0; x <= 720.0 + 1e-9; x += step) {
                ang.push_back(x);
                double s = std::sin(x * std::numbers::pi / 360.0);
                a.push_back(900.0 + 500.0 * s * s);
                T.push_back(1000.0 + 400.0 * s);
            }
            return cycle_aggregate(ang, a, T, 7200.0).alpha_mean;
        };
        CHECK(eval(0.1) == Approx(eval(0.05)).epsilon(1e-3));
    }

    SECTION("incomplete cycle rejected") {
        std::vector<double> ang = {0, 100, 200}, a = {1, 1, 1}, T = {1, 1, 1};
        CHECK_THROWS_AS(cycle_aggregate(ang, a, T, 6000.0), Error);
    }
}

TEST_CASE("internal differentiator matches analytic derivatives") {
    // d/dt sin(w t) = w cos(w t); relative agreement 1e-4 on a 0.1 deg grid
    std::vector<double> t, f, ref;
    double w = 400.0;
    for (double a = 0.0; a <= 60.0 + 1e-9; a += 0.1) {
        double tt = a / (6.0 * 7000.0);
        t.push_back(tt);
        f.push_back(std::sin(w * tt));
        ref.push_back(w * std::cos(w * tt));
    }
    auto d = derivative(t, f);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(d[i] == Approx(ref[i]).epsilon(1e-4));
}

TEST_CASE("build_htc_pdf") {
    SECTION("identical cycles produce a single occupied bin with density 1/binvolume") {
        std::vector<CycleResult> ens(5);
        for (auto& c : ens) {
            c.alpha_mean = 1000.0;
            c.T_eff = 1100.0;
        }
        auto h = build_htc_pdf(ens);
        int occupied = 0;
        double dens = 0.0, vol = 0.0;
        h.for_each_occupied([&](std::size_t f, double) {
            ++occupied;
            dens = h.density_flat(f);
            vol = h.bin_volume_flat(f);
        });
        CHECK(occupied == 1);
        CHECK(dens == Approx(1.0 / vol).epsilon(1e-12));
        CHECK(h.integral() == Approx(1.0).margin(1e-12));
    }

    SECTION("two cycles in distinct bins get density 0.5 each (mass)") {
        std::vector<CycleResult> ens(2);
        ens[0].alpha_mean = 800.0;
        ens[0].T_eff = 900.0;
        ens[1].alpha_mean = 1600.0;
        ens[1].T_eff = 1400.0;
        auto h = build_htc_pdf(ens, 4, 4);
        int occupied = 0;
        h.for_each_occupied([&](std::size_t f, double) {
            ++occupied;
            CHECK(h.mass_flat(f) == Approx(0.5).epsilon(1e-14));
        });
        CHECK(occupied == 2);
    }

    SECTION("60-cycle Gaussian ensemble mean within 2 sigma / sqrt(60) of generator mean") {
        std::mt19937_64 rng(2024);
        std::normal_distribution<double> ga(1200.0, 60.0), gT(1300.0, 40.0);
        std::vector<CycleResult> ens(60);
        for (auto& c : ens) {
            c.alpha_mean = ga(rng);
            c.T_eff = gT(rng);
        }
        auto h = build_htc_pdf(ens, 16, 16);
        // Monte Carlo oracle: the sample mean itself
        double ma = 0.0, mT = 0.0;
        for (const auto& c : ens) {
            ma += c.alpha_mean / 60.0;
            mT += c.T_eff / 60.0;
        }
        CHECK(std::abs(h.mean(0) - ma) < 2.0 * 60.0 / std::sqrt(60.0));
        CHECK(std::abs(h.mean(1) - mT) < 2.0 * 40.0 / std::sqrt(60.0));
        CHECK(std::abs(h.mean(0) - 1200.0) < 2.0 * 60.0 / std::sqrt(60.0) + 10.0);
    }

    SECTION("fewer than two cycles rejected") {
        std::vector<CycleResult> ens(1);
        ens[0].alpha_mean = 1.0;
        ens[0].T_eff = 2.0;
        CHECK_THROWS_AS(build_htc_pdf(ens), Error);
    }
}
