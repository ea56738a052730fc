#include <doctest.h>

#include <cmath>
#include <vector>

#include "fermi/billiard.hpp"
#include "fermi/charts.hpp"
#include "fermi/rng.hpp"
#include "test_helpers.hpp"

using namespace fermi;

namespace {
struct ChartFixture {
    const DefaultModel& m = default_model();
    ChartSet charts{m.params, m.rc.profile};
};
}  // namespace

TEST_CASE("floor chart is exact and linear") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    const double t = 0.5 * (p.t1_star + p.t2_star);
    AdiabaticPoint a = fx.charts.to_adiabatic(t, 100.0, Chart::F);
    CHECK(a.action == doctest::Approx(p.L_star * 50.0).epsilon(1e-15));
    CHECK(a.angle == doctest::Approx(p.theta(t)).epsilon(1e-12));
    auto [t2, v2] = fx.charts.from_adiabatic(a);
    CHECK(t2 == doctest::Approx(t).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("upper chart angle for the constant slit has the closed form") {
    SlitProfile prof = SlitProfile::constant(0.5);
    ModelParams p = derive_params(prof, 0.5, 0.25);
    ChartSet charts(p, prof);
    // theta(1/4) = (2/5) * 4 * 0.25 = 0.4 from the piecewise-constant table
    AdiabaticPoint a = charts.to_adiabatic(0.25, 1000.0, Chart::U);
    CHECK(a.angle == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("chart domain checks") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    const double t_floor = 0.5 * (p.t1_star + p.t2_star);
    const double t_slit = reduce_mod2(p.t2_star + 0.3);
    CHECK_THROWS_AS(fx.charts.to_adiabatic(t_floor, -5.0, Chart::F), DomainError);
    CHECK_THROWS_AS(fx.charts.to_adiabatic(t_slit, 100.0, Chart::F), DomainError);
    CHECK_THROWS_AS(fx.charts.to_adiabatic(t_slit, -100.0, Chart::U), DomainError);
    CHECK_THROWS_AS(fx.charts.to_adiabatic(t_slit, 100.0, Chart::L), DomainError);
    AdiabaticPoint ok = fx.charts.to_adiabatic(t_slit, 500.0, Chart::U);
    CHECK_THROWS_AS(fx.charts.strip_coords(ok, Strip::R1), DomainError);
}

TEST_CASE("round trips reproduce angle and action to 1e-9") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    CounterRng rng(2024, 1);
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
        const Chart chart = i % 3 == 0 ? Chart::F : (i % 3 == 1 ? Chart::U : Chart::L);
        double t;
        if (chart == Chart::F)
            t = rng.uniform(p.t1_star + 1e-3, p.t2_star - 1e-3);
        else
            t = reduce_mod2(p.t2_star + 1e-3 + rng.uniform(0.0, 2.0 - (p.t2_star - p.t1_star) - 2e-3));
        const double action = std::exp(rng.uniform(std::log(1e3), std::log(1e6)));
        double v = 2.0 * action / p.L_star;  // close enough for a valid point
        if (chart == Chart::L) v = -v;
        AdiabaticPoint a;
        try {
            a = fx.charts.to_adiabatic(t, v, chart);
        } catch (const DomainError&) {
            continue;
        }
        auto [tb, vb] = fx.charts.from_adiabatic(a);
        AdiabaticPoint back = fx.charts.to_adiabatic(tb, vb, chart);
        CHECK(std::abs(back.angle - a.angle) < 1e-9);
        CHECK(std::abs(back.action - a.action) < 1e-9 * a.action);
        CHECK(std::abs(tb - t) < 1e-9);
        CHECK(std::abs(vb - v) < 1e-9 * std::abs(v));
        tested++;
    }
    CHECK(tested > 9000);
}

TEST_CASE("strip coordinates are the exact rescalings") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    // theta = theta1* gives sigma = 0
    AdiabaticPoint a{Chart::F, p.theta1_star, 500.0};
    StripPoint sp = fx.charts.strip_coords(a, Strip::R1);
    CHECK(sp.first == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sp.second == doctest::Approx(500.0 / p.L_star).epsilon(1e-15));
    // H = 500, theta offset 0.002 -> sigma = 1
    AdiabaticPoint b{Chart::F, reduce_mod2(p.theta1_star + 0.002), 500.0};
    StripPoint sb = fx.charts.strip_coords(b, Strip::R1);
    CHECK(sb.first == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("strip round trip to 1e-12") {
    ChartFixture fx;
    CounterRng rng(77, 3);
    for (int i = 0; i < 10000; ++i) {
        Strip strip = i % 3 == 0 ? Strip::R1 : (i % 3 == 1 ? Strip::R2plus : Strip::R2minus);
        StripPoint sp{strip, rng.uniform(0.0, 2.0), rng.uniform(1e3, 1e6)};
        AdiabaticPoint a = fx.charts.from_strip(sp);
        StripPoint back = fx.charts.strip_coords(a, strip);
        CHECK(std::abs(back.first - sp.first) < 1e-6);
        CHECK(std::abs(back.second - sp.second) < 1e-12 * sp.second);
    }
}

TEST_CASE("static slit keeps the upper action constant across collisions") {
    SlitProfile prof = SlitProfile::constant(0.5);
    ModelParams p = derive_params(prof, 0.5, 0.25);
    ChartSet charts(p, prof);
    Billiard bil(prof, p);
    const double t0 = reduce_mod2(p.t2_star + 0.05);
    BallState st;
    auto [x, dir] = bil.horizontal_at(t0);
    st.t = t0;
    st.x = x;
    st.dir_x = dir;
    st.y = 0.8;
    st.v = 1000.0;
    double I0 = -1.0;
    int n = 0;
    while (n < 100) {
        CollisionEvent ev = bil.next_collision(st);
        if (ev.surface != Surface::slit_top) continue;
        AdiabaticPoint a = charts.to_adiabatic(ev.t, ev.v_after, Chart::U);
        if (I0 < 0) I0 = a.action;
        CHECK(std::abs(a.action - I0) < 1e-9 * I0);
        ++n;
    }
}

TEST_CASE("inverting the action without its corrections leaves the expected residual") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    const double t = reduce_mod2(p.t2_star + 0.21);
    GapLimits l = p.l_of(t, fx.m.rc.profile);
    std::vector<double> actions = {1e3, 2e3};
    std::vector<double> resid0, resid1;
    for (double A : actions) {
        // zeroth guess: v = 2A/(L l); first order adds the l l' term
        const double v0 = 2.0 * A / (p.L_star * l.value);
        const double v1 = (2.0 * A / p.L_star - l.value * l.dot) / l.value;
        AdiabaticPoint a0 = fx.charts.to_adiabatic(t, v0, Chart::U);
        AdiabaticPoint a1 = fx.charts.to_adiabatic(t, v1, Chart::U);
        resid0.push_back(std::abs(a0.action - A));
        resid1.push_back(std::abs(a1.action - A));
    }
    // zeroth-order residual is O(1): roughly constant across levels
    CHECK(resid0[1] / resid0[0] > 0.5);
    CHECK(resid0[1] / resid0[0] < 2.0);
    // corrected residual is O(1/A): halves when the action doubles
    CHECK(resid1[1] / resid1[0] < 0.75);
    CHECK(resid1[1] / resid1[0] > 0.3);
    // the full inverse is exact to rounding
    auto [tt, vv] = fx.charts.from_adiabatic({Chart::U, p.theta(t), 1e3});
    AdiabaticPoint full = fx.charts.to_adiabatic(tt, vv, Chart::U);
    CHECK(std::abs(full.action - 1e3) < 1e-9);
}

TEST_CASE("adiabatic invariance and angle law scale with the expected powers") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    Billiard bil(fx.m.rc.profile, p);
    std::vector<double> levels = {1000.0, 2000.0, 4000.0};
    std::vector<double> max_dI, max_dAngle, logA;
    const double slit_period = 2.0 / fx.m.rc.omega;
    for (double A : levels) {
        double worstI = 0.0, worstTh = 0.0;
        // max over 50 collisions and over start phases across one slit cycle
        for (int j = 0; j < 8; ++j) {
            const double t0 = reduce_mod2(p.t2_star + 0.2 + j * slit_period / 8.0);
            auto [t_ex, v_ex] = fx.charts.from_adiabatic({Chart::U, p.theta(t0), A});
            BallState st;
            auto [x, dir] = bil.horizontal_at(t_ex);
            st.t = t_ex;
            st.x = x;
            st.dir_x = dir;
            st.y = fx.m.rc.profile.eval(t_ex).f;
            st.v = v_ex;
            double Iprev = -1.0, thprev = 0.0;
            int n = 0;
            while (n < 50) {
                CollisionEvent ev = bil.next_collision(st);
                if (ev.surface != Surface::slit_top) continue;
                AdiabaticPoint a = fx.charts.to_adiabatic(ev.t, ev.v_after, Chart::U);
                if (Iprev > 0.0) {
                    worstI = std::max(worstI, std::abs(a.action - Iprev));
                    const double gap = reduce_mod2(a.angle - thprev);
                    worstTh = std::max(worstTh, std::abs(gap - 2.0 / Iprev));
                }
                Iprev = a.action;
                thprev = a.angle;
                ++n;
            }
        }
        max_dI.push_back(std::log(worstI));
        max_dAngle.push_back(std::log(worstTh));
        logA.push_back(std::log(A));
    }
    auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double n = x.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double sI = slope(logA, max_dI);
    const double sTh = slope(logA, max_dAngle);
    CHECK(sI == doctest::Approx(-3.0).epsilon(0.17));   // slope -3 +- 0.5
    CHECK(sTh == doctest::Approx(-4.0).epsilon(0.18));  // slope -4 +- 0.7
}

TEST_CASE("phase increments along tables stay positive and below 2") {
    ChartFixture fx;
    const ModelParams& p = fx.m.params;
    double prev = p.theta(0.001);
    for (int i = 2; i < 2000; ++i) {
        const double t = 2.0 * i / 2000.0 - 1e-3;
        const double cur = p.theta(t);
        const double inc = reduce_mod2(cur - prev);
        CHECK(inc >= 0.0);
        CHECK(inc < 2.0);
        prev = cur;
    }
}
