#include <doctest.h>

#include <cmath>

#include "fermi/params.hpp"
#include "test_helpers.hpp"

using namespace fermi;

namespace {

// closed-form oracle for the constant-slit configuration of the examples:
// f = 1/2, lambda = 1/2, x0 = 1/4
struct ConstantCase {
    SlitProfile prof = SlitProfile::constant(0.5);
    ModelParams p = derive_params(prof, 0.5, 0.25);
};

}  // namespace

TEST_CASE("switch times follow from lambda and x0") {
    ConstantCase c;
    CHECK(c.p.t1_star == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(c.p.t2_star == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("normalizing integral of the constant slit has the closed form") {
    // l = 1/2 on [0, 1/4] and [5/4, 2] (total length 1), l = 1 in between:
    // L* = 4*1 + 1*1 = 5
    ConstantCase c;
    CHECK(c.p.L_star == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(c.p.M_star == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(c.p.theta1_star == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("derive_params rejects bad geometry and bad profiles") {
    ConstantCase c;
    CHECK_THROWS_AS(derive_params(c.prof, 0.5, 0.6), DomainError);
    SlitProfile bad = SlitProfile::constant(0.05);
    CHECK_THROWS_AS(derive_params(bad, 0.5, 0.25), ProfileError);
}

TEST_CASE("phase tables are consistent with the scalar quadrature") {
    const ModelParams& p = default_model().params;
    // theta(2) = 2 before mod reduction
    CHECK(p.theta_table.val.back() == doctest::Approx(p.L_star).epsilon(1e-12));
    CHECK(p.zeta_table.val.back() == doctest::Approx(p.M_star).epsilon(1e-12));
    CHECK(p.theta(p.t1_star) == doctest::Approx(p.theta1_star).epsilon(1e-10));
    CHECK(p.theta(p.t2_star) == doctest::Approx(p.theta2_star).epsilon(1e-10));
    // strictly increasing cumulative values
    for (std::size_t i = 1; i < p.theta_table.val.size(); ++i)
        CHECK(p.theta_table.val[i] >= p.theta_table.val[i - 1]);
    // interpolation against direct quadrature at off-node points,
    // integrating span by span so the jump at the switch times is respected
    auto lw = [&](double t) {
        double f = default_model().rc.profile.eval(t).f;
        double l = p.in_floor_window(t) ? 1.0 : 1.0 - f;
        return 1.0 / (l * l);
    };
    auto cumulative = [&](double t) {
        double acc = 0.0;
        const double marks[3] = {p.t1_star, p.t2_star, 2.0};
        double lo = 0.0;
        for (double hi : marks) {
            double up = std::min(t, hi);
            if (up > lo) acc += adaptive_simpson(lw, lo + 1e-13, up - 1e-13, 1e-12);
            if (t <= hi) break;
            lo = hi;
        }
        return acc;
    };
    for (double t : {0.1234, 0.9871, 1.7345}) {
        CHECK(p.theta_table(t) == doctest::Approx(cumulative(t)).epsilon(1e-8));
    }
    // inverse round trip
    for (double t : {0.05, 0.6, 1.1, 1.9}) {
        CHECK(p.theta_inverse(p.theta(t)) == doctest::Approx(t).epsilon(1e-11));
        CHECK(p.zeta_inverse(p.zeta(t)) == doctest::Approx(t).epsilon(1e-11));
    }
}

TEST_CASE("static slit zeroes every normal-form constant") {
    ConstantCase c;
    NormalFormConstants k = normal_form_constants(c.p);
    CHECK(k.delta1 == 0.0);
    CHECK(k.delta2 == 0.0);
    CHECK(k.delta1_p == 0.0);
    CHECK(k.delta2_pp == 0.0);
    CHECK(k.kappa_l == 0.0);
    CHECK(k.kappa_l_p == 0.0);
    CHECK(k.kappa_s_pp == 0.0);
    CHECK(k.chi_l == 0.0);
    CHECK(k.chi_l_p == 0.0);
    CHECK(k.chi_s_pp == 0.0);
}

TEST_CASE("lower-entry constant from prescribed one-sided limits") {
    // kappa_l = (1/2) m+ mdot+ with f2 = 0.6 and fdot2 = -20: m+ = -0.6,
    // mdot+ = +20, so kappa_l = -6
    ModelParams p{};
    p.m_t2_plus = {-0.6, 20.0, 0.0};
    NormalFormConstants k = normal_form_constants(p);
    CHECK(k.kappa_l == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK(k.kappa_l == doctest::Approx(0.5 * (-0.6) * 20.0).epsilon(1e-15));
}

TEST_CASE("delta1 agrees with its one-sided specialization") {
    const ModelParams& p = default_model().params;
    NormalFormConstants k = normal_form_constants(p);
    // l is continuous in value across t1* only in the trivial sense; the
    // two-sided formula must reduce to -l'(t1*-)/(2 l(t1*-)) here
    const double expected = -0.5 * p.l_t1_minus.dot / p.l_t1_minus.value;
    CHECK(k.delta1 == doctest::Approx(expected).epsilon(1e-12));
    const double expected2 = 0.5 * p.l_t2_plus.value * p.l_t2_plus.dot;
    CHECK(k.delta2 == doctest::Approx(expected2).epsilon(1e-12));
    CHECK(k.kappa_l == doctest::Approx(0.5 * p.f2 * p.fdot2).epsilon(1e-12));
    CHECK(k.chi_l == doctest::Approx(-0.5 * p.fdot1 / p.f1).epsilon(1e-12));
}

TEST_CASE("drift rate is the Bernoulli KL divergence") {
    CHECK(drift_rate(0.5, 0.5) == 0.0);
    CHECK(drift_rate(0.4, 0.6) == doctest::Approx(0.2 * std::log(1.5)).epsilon(1e-15));
    CHECK(drift_rate(0.6, 0.4) == doctest::Approx(0.2 * std::log(1.5)).epsilon(1e-15));
    CHECK_THROWS_AS(drift_rate(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(drift_rate(0.5, 1.0), DomainError);
}

TEST_CASE("drift rate is nonnegative, zero only on the diagonal") {
    for (int i = 1; i < 100; ++i) {
        for (int j = 1; j < 100; ++j) {
            const double a = i / 100.0, b = j / 100.0;
            const double e = drift_rate(a, b);
            CHECK(e >= -1e-14);
            if (i == j)
                CHECK(std::abs(e) <= 1e-14);
            else
                CHECK(e > 1e-8);
        }
    }
}

TEST_CASE("shipped configurations hit the advertised switch data") {
    const DefaultModel& m = default_model();
    CHECK(m.params.f1 == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(m.params.f2 == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(m.params.fdot1 == doctest::Approx(m.rc.fdot_switch).epsilon(1e-6));
    CHECK(m.params.fdot2 == doctest::Approx(m.rc.fdot_switch).epsilon(1e-6));
    CHECK(std::abs(m.rc.profile.velocity_jump_at_seam()) > 1e-4);
    CHECK(std::abs(m.rc.profile.velocity_jump_at_seam()) < 0.1);

    ResonantConfig null_cfg = make_null_config(18);
    ModelParams pn = derive_params(null_cfg.profile, null_cfg.lambda_slit, null_cfg.x0);
    CHECK(pn.f1 == doctest::Approx(pn.f2).epsilon(1e-10));
    CHECK(std::abs(pn.fdot1) > 10.0);
}
