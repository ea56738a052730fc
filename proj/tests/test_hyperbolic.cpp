#include <doctest.h>

#include <cmath>
#include <vector>

#include "fermi/hyperbolic.hpp"
#include "fermi/rng.hpp"
#include "fermi/stats.hpp"
#include "test_helpers.hpp"

using namespace fermi;

TEST_CASE("all four derivative matrices have unit determinant") {
    // sweep the shipped family plus amplitude variations: 50 configurations
    int checked = 0;
    for (int k = 5; k < 30; ++k) {
        ResonantConfig rc = make_resonant_config(k);
        ModelParams p = derive_params(rc.profile, rc.lambda_slit, rc.x0);
        NormalFormConstants c = normal_form_constants(p);
        for (MapId id : {MapId::U12, MapId::U21, MapId::Ll12, MapId::Ll21}) {
            CHECK(dg_matrix(id, p, c).det() == doctest::Approx(1.0).epsilon(1e-9));
            checked++;
        }
    }
    CHECK(checked == 100);
    // the two lower entries share a matrix, and so do the two exits
    const DefaultModel& m = default_model();
    Mat2 a = dg_matrix(MapId::Ll12, m.params, m.consts);
    Mat2 b = dg_matrix(MapId::Ls12, m.params, m.consts);
    CHECK(a.a == b.a);
    CHECK(a.d == b.d);
}

TEST_CASE("static slit reduces the matrices to shears with closed-form spectra") {
    SlitProfile prof = SlitProfile::constant(0.5);
    ModelParams p = derive_params(prof, 0.5, 0.25);
    NormalFormConstants c = normal_form_constants(p);
    Mat2 u12 = dg_matrix(MapId::U12, p, c);
    CHECK(u12.c == 0.0);  // zero constants -> triangular
    EigenPair e = eigen_decompose(u12);
    CHECK(std::abs(e.lambda_u) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("eigen pairs approach the vertical for stiff matrices") {
    EigenPair e = eigen_decompose({1.0, 1.0, 1000.0, 1001.0});
    CHECK(e.lambda_u == doctest::Approx(1001.999).epsilon(1e-5));
    CHECK(direction_distance(direction_angle(e.e_u), M_PI / 2.0) < 0.002);
    const double diag = direction_angle({-1.0, 1.0});
    CHECK(direction_distance(direction_angle(e.e_s), diag) < 0.002);
}

TEST_CASE("diagonal and parabolic matrices") {
    EigenPair e = eigen_decompose({2.0, 0.0, 0.0, 0.5});
    CHECK(e.lambda_u == doctest::Approx(2.0));
    CHECK(std::abs(e.e_u.x) == doctest::Approx(1.0));
    CHECK(std::abs(e.e_s.y) == doctest::Approx(1.0));
    CHECK_THROWS_AS(eigen_decompose({1.0, 1.0, 0.0, 1.0}), NotHyperbolic);
}

TEST_CASE("eigenvector convergence rate for the stiff family") {
    // A_N = [[1,1],[N,N+1]]: angles approach their limits like 1/N
    std::vector<double> logN, logAngU, logAngS;
    const double diag = direction_angle({-1.0, 1.0});
    for (double N : {1e2, 1e3, 1e4}) {
        EigenPair e = eigen_decompose({1.0, 1.0, N, N + 1.0});
        logN.push_back(std::log(N));
        logAngU.push_back(std::log(direction_distance(direction_angle(e.e_u), M_PI / 2.0)));
        logAngS.push_back(std::log(direction_distance(direction_angle(e.e_s), diag)));
    }
    LineFit fu = fit_line(logN, logAngU);
    LineFit fs = fit_line(logN, logAngS);
    CHECK(fu.slope == doctest::Approx(-1.0).epsilon(0.2));
    CHECK(fs.slope == doctest::Approx(-1.0).epsilon(0.2));
}

TEST_CASE("common cone exists at the shipped speed and contains the vertical") {
    const DefaultModel& m = default_model();
    ConeSpec cone = common_cone(m.params, m.consts);
    CHECK(cone.contains_angle(M_PI / 2.0));
    CHECK(cone.stable_margin > 0.0);
    CHECK(cone.min_linear_stretch > 2.0);
    CHECK(cone.gauge >= 2);
    for (MapId id : {MapId::U12, MapId::U21, MapId::Ll12, MapId::Ll21}) {
        EigenPair e = eigen_decompose(dg_matrix(id, m.params, m.consts));
        CHECK(cone.contains(e.e_u, 1e-9));
        CHECK(!cone.contains(e.e_s));
    }
}

TEST_CASE("slow slits fail cone construction") {
    // |fdot| ~ 1 violates the hyperbolicity hypotheses
    SlitProfile prof = SlitProfile::sine(0.5, 0.2, 2.17, M_PI / 2.0 - 2.17 * M_PI);
    ModelParams p = derive_params(prof, 0.5, 0.25);
    NormalFormConstants c = normal_form_constants(p);
    CHECK_THROWS_AS(common_cone(p, c), ConeConstructionFailed);
}

TEST_CASE("cone expansion beats the displayed gauge bound") {
    // (k lambda - 1/lambda)/(k+1) with lambda = 10, k = 3 gives 7.475
    const double lambda = 10.0, k = 3.0;
    const double bound = (k * lambda - 1.0 / lambda) / (k + 1.0);
    CHECK(bound == doctest::Approx(7.475).epsilon(1e-12));
    // per-matrix check at the shipped configuration with its own gauge
    const DefaultModel& m = default_model();
    ConeSpec cone = common_cone(m.params, m.consts);
    for (MapId id : {MapId::U12, MapId::U21, MapId::Ll12, MapId::Ll21}) {
        Mat2 mat = dg_matrix(id, m.params, m.consts);
        EigenPair e = eigen_decompose(mat);
        const double lam = std::abs(e.lambda_u);
        const double b = (cone.gauge * lam - 1.0 / lam) / (cone.gauge + 1.0);
        // minimal stretch over the matrix's own gauge cone
        double lo = 1e300;
        for (int j = 0; j <= 360; ++j) {
            const double s = -1.0 + 2.0 * j / 360.0;
            Vec2 v{cone.gauge * e.e_u.x + s * e.e_s.x, cone.gauge * e.e_u.y + s * e.e_s.y};
            const double n = std::hypot(v.x, v.y);
            lo = std::min(lo, mat.apply({v.x / n, v.y / n}).norm());
        }
        CHECK(lo >= b * 0.999);
    }
}

TEST_CASE("expansion rates grow linearly with the slit speed") {
    // rates are measured in one cone, built at the slowest sweep member:
    // the shared cone belongs to the threshold speed, not to each config
    ResonantConfig rc0 = make_resonant_config(15);
    ModelParams p0 = derive_params(rc0.profile, rc0.lambda_slit, rc0.x0);
    ConeSpec cone = common_cone(p0, normal_form_constants(p0));
    std::vector<double> fdot, lam_entry;
    for (int k = 15; k <= 25; k += 2) {
        ResonantConfig rc = make_resonant_config(k);
        ModelParams p = derive_params(rc.profile, rc.lambda_slit, rc.x0);
        NormalFormConstants c = normal_form_constants(p);
        ExpansionRates r = expansion_rates(p, c, cone);
        fdot.push_back(std::abs(p.fdot2));
        lam_entry.push_back(r.lambda_min[static_cast<int>(MapId::Ll12)]);
        CHECK(r.lambda_min[static_cast<int>(MapId::Ll12)] > 1.0);
        // the revolution rate is the displayed min-of-products
        const double up = r.lambda_min[0] * r.lambda_min[1];
        const double low = r.lambda_min[2] * r.lambda_min[4];
        CHECK(r.lambda_F == std::min(up, low));
    }
    LineFit f = fit_line(fdot, lam_entry);
    CHECK(f.r2 >= 0.99);
    CHECK(f.slope > 0.0);
}

TEST_CASE("numeric jacobian of the linear part matches the matrix") {
    const DefaultModel& m = default_model();
    NormalFormMaps maps(m.params, m.consts);
    CounterRng rng(11, 0);
    int done = 0;
    for (int i = 0; i < 1000; ++i) {
        StripPoint sp{Strip::R1, rng.uniform(0.0, 2.0), rng.uniform(2000.0, 8000.0)};
        RegionInfo info = maps.classify(sp, 0.0);
        if (info.ambiguous) continue;
        MapId id = info.tag == RegionTag::U_en
                       ? MapId::U12
                       : (info.tag == RegionTag::L_en_long ? MapId::Ll12 : MapId::Ls12);
        Mat2 expected = dg_matrix(id, m.params, m.consts);
        Mat2 got;
        try {
            got = numeric_jacobian(maps, id, sp, CorrectionOrder::G_only);
        } catch (const DomainError&) {
            continue;
        }
        const double scale = std::abs(expected.a) + std::abs(expected.b) +
                             std::abs(expected.c) + std::abs(expected.d);
        CHECK(std::abs(got.a - expected.a) < 1e-6 * scale);
        CHECK(std::abs(got.b - expected.b) < 1e-6 * scale);
        CHECK(std::abs(got.c - expected.c) < 1e-6 * scale);
        CHECK(std::abs(got.d - expected.d) < 1e-6 * scale);
        done++;
    }
    CHECK(done > 800);
}

TEST_CASE("linear cone verification runs clean; full maps stay clean above V*") {
    const DefaultModel& m = default_model();
    NormalFormMaps maps(m.params, m.consts);
    ConeSpec cone = common_cone(m.params, m.consts);
    ConeVerifyReport g = verify_cone_invariance(cone, maps, 4000.0, 1.0, 20000,
                                                CorrectionOrder::G_only, 17, 2);
    CHECK(g.cone_violations == 0);
    CHECK(g.stretch_violations == 0);
    CHECK(g.min_stretch > 1.0);
    ConeVerifyReport f = verify_cone_invariance(cone, maps, 4000.0, 2.0, 20000,
                                                CorrectionOrder::G_plus_H, 18, 2);
    CHECK(f.cone_violations == 0);
    CHECK(f.min_stretch > 2.0);
    // far below the threshold the corrections may push vectors out
    ConeVerifyReport low = verify_cone_invariance(cone, maps, 250.0, 2.0, 20000,
                                                  CorrectionOrder::G_plus_H, 19, 2);
    const double rate_low = static_cast<double>(low.cone_violations) /
                            std::max<long>(1, low.samples);
    const double rate_hi = static_cast<double>(f.cone_violations) /
                           std::max<long>(1, f.samples);
    CHECK(rate_hi <= rate_low + 1e-12);
}
