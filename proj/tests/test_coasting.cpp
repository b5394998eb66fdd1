#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "thermolap/coasting.hpp"
#include "thermolap/numerics.hpp"

using namespace thermolap;
using Catch::Approx;

TEST_CASE("motored_pressure") {
    auto g = testutil::test_geom();
    CoastingParams params{1.4, 1e5, g.max_volume()};

    SECTION("identity at maximum volume") {
        auto p = motored_pressure(params, std::array{g.max_volume()});
        CHECK(p[0] == Approx(1e5).epsilon(1e-14));
    }
    SECTION("CR = 10, kappa = 1.4 gives p(TDC)/p_ini = 10^1.4") {
        auto p = motored_pressure(params, std::array{g.clearance_volume()});
        CHECK(p[0] / params.p_ini == Approx(25.118864315095795).epsilon(1e-12));
        CHECK(p[0] / params.p_ini == Approx(25.119).margin(1e-3));
    }
    SECTION("isothermal limit kappa -> 1 gives p(TDC) -> CR * p_ini") {
        CoastingParams iso{1.0 + 1e-12, 1e5, g.max_volume()};
        auto p = motored_pressure(iso, std::array{g.clearance_volume()});
        CHECK(p[0] / iso.p_ini == Approx(10.0).epsilon(1e-9));
    }
    SECTION("volume above V_max rejected") {
        CHECK_THROWS_AS(motored_pressure(params, std::array{g.max_volume() * 1.01}), Error);
    }
}

TEST_CASE("coasting_cycle") {
    auto g = testutil::test_geom();
    HtcClosure closure{2.0e-3, 0.78};
    CoastingConfig cfg;

    SECTION("requires T_i = 0") {
        EngineState fired{6000, 80, 293, 120, 9};
        CHECK_THROWS_AS(coasting_cycle(fired, g, closure, cfg), Error);
    }

    SECTION("zero air mass falls back to ambient pressure, alpha small but positive") {
        EngineState e{4000, 0, 300, 0, 0};
        auto c = coasting_cycle(e, g, closure, cfg);
        CHECK(c.p_ini == Approx(cfg.ambient_pressure).epsilon(1e-14));
        CHECK(c.result.alpha_mean > 0.0);
        for (double a : c.result.alpha) CHECK(a >= 0.0);
    }

    SECTION("p V^kappa constant along compression and expansion to 1e-12") {
        EngineState e{7000, 60, 310, 0, 0};
        auto c = coasting_cycle(e, g, closure, cfg);
        double ref = 0.0;
        for (std::size_t i = 0; i < c.angle.size(); ++i) {
            if (c.angle[i] < 180.0 || c.angle[i] > 540.0) continue;
            double pv = c.pressure[i] * std::pow(c.volume[i], cfg.kappa);
            if (ref == 0.0) ref = pv;
            CHECK(pv == Approx(ref).epsilon(1e-12));
        }
    }

    SECTION("alpha symmetric about firing TDC when dissipation is frozen") {
        CoastingConfig frozen = cfg;
        frozen.eps_c = 0.0;
        frozen.step_deg = 0.25;
        EngineState e{6000, 70, 300, 0, 0};
        auto c = coasting_cycle(e, g, closure, frozen);
        // locate index of 360 deg
        std::size_t mid = 0;
        for (std::size_t i = 0; i < c.angle.size(); ++i)
            if (std::abs(c.angle[i] - 360.0) < 1e-9) mid = i;
        std::size_t reach = static_cast<std::size_t>(std::round(170.0 / frozen.step_deg));
        for (std::size_t j = 1; j <= reach; j += 7) {
            double lo = c.result.alpha[mid - j], hi = c.result.alpha[mid + j];
            CHECK(lo == Approx(hi).epsilon(1e-6));
        }
    }

    SECTION("Dirac realization: identical coasting results occupy exactly one histogram bin") {
        EngineState e{5000, 55, 295, 0, 0};
        auto c = coasting_cycle(e, g, closure, cfg);
        std::vector<CycleResult> ens(3, c.result);
        auto h = build_htc_pdf(ens);
        int occupied = 0;
        h.for_each_occupied([&](std::size_t, double) { ++occupied; });
        CHECK(occupied == 1);
    }

    SECTION("coasting T_eff below fired T_eff at the same speed") {
        EngineState e{7000, 80, 300, 0, 0};
        auto c = coasting_cycle(e, g, closure, cfg);

        // paired fired evaluation on the Wiebe fixture (compression+expansion window)
        auto f = testutil::make_wiebe_fixture(g, 0.2);
        double N = 89e-6 / cfg.molar_mass;  // air + fuel charge
        std::size_t n = f.angle.size();
        std::vector<double> Tg(n), v(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            Tg[i] = mean_gas_temperature(f.p_fired[i], f.volume[i], N);
            double vp = piston_speed(g, f.angle[i], e.n_engine);
            v[i] = characteristic_velocity(50.0, vp, 0.0, 0.0, 0.0, Tg[i], Tg[i], g.bore);
            t[i] = crank_deg_to_seconds(f.angle[i] - 180.0, e.n_engine);
        }
        auto alpha = htc_trace(f.p_fired, v, Tg, closure);
        std::vector<double> aT(n);
        for (std::size_t i = 0; i < n; ++i) aT[i] = alpha[i] * Tg[i];
        double fired_T_eff = trapezoid(t, aT) / trapezoid(t, alpha);
        CHECK(c.result.T_eff < fired_T_eff);
    }
}
