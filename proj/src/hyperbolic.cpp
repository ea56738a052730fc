#include "fermi/hyperbolic.hpp"

#include <algorithm>
#include <cmath>

#include "fermi/parallel.hpp"
#include "fermi/rng.hpp"

namespace fermi {

double Vec2::norm() const { return std::hypot(x, y); }

Mat2 dg_matrix(MapId id, const ModelParams& p, const NormalFormConstants& c) {
    const double f1 = p.f1, f2 = p.f2;
    switch (id) {
        case MapId::U12: {
            const double l2 = 1.0 - f2;
            return {1.0 / l2, -p.LT / l2, c.delta2 / l2, l2 - c.delta2 * p.LT / l2};
        }
        case MapId::U21: {
            const double l1 = 1.0 - f1;
            return {l1, -p.LTb * l1, c.delta1 * l1, 1.0 / l1 - c.delta1 * p.LTb * l1};
        }
        case MapId::Ll12:
        case MapId::Ls12:
            return {1.0 / f2, -p.LT / f2, c.kappa_l / f2, f2 - c.kappa_l * p.LT / f2};
        default:
            return {f1, -p.MZb * f1, c.chi_l * f1, 1.0 / f1 - c.chi_l * p.MZb * f1};
    }
}

EigenPair eigen_decompose(const Mat2& m) {
    const double tr = m.trace();
    if (!(std::abs(tr) > 2.0)) throw NotHyperbolic("|trace| <= 2");
    const double s = std::sqrt(tr * tr - 4.0);
    // the eigenvalue of largest modulus (det = 1 pairs them as l, 1/l)
    const double lu = 0.5 * (tr + std::copysign(s, tr));
    const double ls = 1.0 / lu;
    auto unit_eigvec = [&](double lam) -> Vec2 {
        Vec2 v{m.b, lam - m.a};
        if (v.norm() < 1e-12 * (std::abs(lam) + std::abs(m.a)))
            v = {lam - m.d, m.c};
        const double n = v.norm();
        return {v.x / n, v.y / n};
    };
    return {lu, unit_eigvec(lu), unit_eigvec(ls)};
}

double direction_angle(Vec2 v) {
    double a = std::atan2(v.y, v.x);
    if (a < 0.0) a += M_PI;
    if (a >= M_PI) a -= M_PI;
    return a;
}

double direction_distance(double a, double b) {
    double d = std::abs(a - b);
    return std::min(d, M_PI - d);
}

bool ConeSpec::contains_angle(double phi, double tol) const {
    return direction_distance(phi, angle_center) <= angle_halfwidth + tol;
}

Vec2 ConeSpec::direction(double s) const {
    const double phi = angle_center + s * angle_halfwidth;
    return {std::cos(phi), std::sin(phi)};
}

namespace {

struct Arc {
    double center;
    double halfwidth;
    bool empty = false;
};

Arc intersect(const Arc& A, const Arc& B) {
    if (A.empty || B.empty) return {0, 0, true};
    double cb = B.center;
    // lift B's center next to A's on the projective line
    if (cb - A.center > M_PI / 2.0) cb -= M_PI;
    if (A.center - cb > M_PI / 2.0) cb += M_PI;
    const double lo = std::max(A.center - A.halfwidth, cb - B.halfwidth);
    const double hi = std::min(A.center + A.halfwidth, cb + B.halfwidth);
    if (hi <= lo) return {0, 0, true};
    double c = 0.5 * (lo + hi);
    if (c < 0.0) c += M_PI;
    if (c >= M_PI) c -= M_PI;
    return {c, 0.5 * (hi - lo), false};
}

Arc matrix_cone_arc(const EigenPair& e, double k) {
    // boundary directions of {|c_u| > k |c_s|} in the eigenbasis
    Vec2 b1{k * e.e_u.x + e.e_s.x, k * e.e_u.y + e.e_s.y};
    Vec2 b2{k * e.e_u.x - e.e_s.x, k * e.e_u.y - e.e_s.y};
    const double cu = direction_angle(e.e_u);
    const double d1 = direction_distance(direction_angle(b1), cu);
    const double d2 = direction_distance(direction_angle(b2), cu);
    return {cu, std::max(d1, d2), false};
}

}  // namespace

ConeSpec common_cone(const ModelParams& params, const NormalFormConstants& consts) {
    const MapId reps[4] = {MapId::U12, MapId::U21, MapId::Ll12, MapId::Ll21};
    Mat2 mats[4];
    EigenPair eig[4];
    for (int i = 0; i < 4; ++i) {
        mats[i] = dg_matrix(reps[i], params, consts);
        try {
            eig[i] = eigen_decompose(mats[i]);
        } catch (const NotHyperbolic& e) {
            throw ConeConstructionFailed(reps[i], e.what());
        }
    }

    const double vertical = M_PI / 2.0;
    std::string last_reason = "no gauge in range";
    MapId last_offender = MapId::U12;
    for (int k = 2; k <= 64; ++k) {
        Arc arc = matrix_cone_arc(eig[0], k);
        for (int i = 1; i < 4; ++i) arc = intersect(arc, matrix_cone_arc(eig[i], k));
        if (arc.empty) {
            last_reason = "empty intersection at gauge " + std::to_string(k);
            continue;
        }
        ConeSpec cone;
        cone.angle_center = arc.center;
        cone.angle_halfwidth = arc.halfwidth;
        cone.gauge = k;

        if (!cone.contains_angle(vertical, -1e-9)) {
            last_reason = "vertical direction left the intersection";
            continue;
        }
        bool ok = true;
        for (int i = 0; i < 4 && ok; ++i) {
            if (!cone.contains(eig[i].e_u, -1e-12)) {
                ok = false;
                last_offender = reps[i];
                last_reason = "unstable direction outside intersection";
            }
        }
        if (!ok) continue;
        double margin = 1e300;
        for (int i = 0; i < 4; ++i) {
            const double d = direction_distance(direction_angle(eig[i].e_s), arc.center) -
                             arc.halfwidth;
            margin = std::min(margin, d);
        }
        if (margin <= 1e-6) {
            last_reason = "stable direction touches the cone";
            continue;
        }
        cone.stable_margin = margin;

        // invariance and expansion over sampled directions
        double min_stretch = 1e300;
        for (int i = 0; i < 4 && ok; ++i) {
            for (int j = 0; j <= 360; ++j) {
                Vec2 v = cone.direction(-1.0 + 2.0 * j / 360.0);
                Vec2 w = mats[i].apply(v);
                if (!cone.contains(w, 1e-9)) {
                    ok = false;
                    last_offender = reps[i];
                    last_reason = "image direction left the cone at gauge " + std::to_string(k);
                    break;
                }
                min_stretch = std::min(min_stretch, w.norm() / v.norm());
            }
        }
        if (!ok) continue;
        if (min_stretch <= 1.0) {
            last_reason = "no uniform expansion inside the cone";
            continue;
        }
        cone.min_linear_stretch = min_stretch;
        cone.slope_low = std::tan(arc.center - arc.halfwidth);
        cone.slope_high = std::tan(arc.center + arc.halfwidth);
        return cone;
    }
    throw ConeConstructionFailed(last_offender, last_reason);
}

ExpansionRates expansion_rates(const ModelParams& params, const NormalFormConstants& consts,
                               const ConeSpec& cone) {
    ExpansionRates r;
    const MapId ids[6] = {MapId::U12, MapId::U21, MapId::Ll12,
                          MapId::Ls12, MapId::Ll21, MapId::Ls21};
    for (int i = 0; i < 6; ++i) {
        Mat2 m = dg_matrix(ids[i], params, consts);
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j <= 720; ++j) {
            Vec2 v = cone.direction(-1.0 + 2.0 * j / 720.0);
            const double s = m.apply(v).norm() / v.norm();
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        r.lambda_min[i] = lo;
        r.lambda_max[i] = hi;
    }
    const double up = r.lambda_min[0] * r.lambda_min[1];
    const double low = r.lambda_min[2] * r.lambda_min[4];
    r.lambda_F = std::min(up, low);
    r.Lambda_F = std::max(r.lambda_max[0] * r.lambda_max[1], r.lambda_max[2] * r.lambda_max[4]);
    return r;
}

Mat2 numeric_jacobian(const NormalFormMaps& maps, MapId id, const StripPoint& p,
                      CorrectionOrder order) {
    const double h1 = 1e-6 * std::max(1.0, std::abs(p.first));
    const double h2 = 1e-6 * std::max(1.0, std::abs(p.second));
    auto guard_same_component = [&](const StripPoint& a, const StripPoint& b) {
        if (a.strip == Strip::R2plus) {
            const double coef = maps.classifier_coef(Strip::R2plus);
            if (classifier_component(coef, a.second, a.first) !=
                classifier_component(coef, b.second, b.first))
                throw DomainError("stencil straddles a singularity line");
            return;
        }
        RegionInfo ra = maps.classify(a, 0.0);
        RegionInfo rb = maps.classify(b, 0.0);
        if (ra.tag != rb.tag || ra.m != rb.m)
            throw DomainError("stencil straddles a singularity line");
    };
    StripPoint pxp{p.strip, p.first + h1, p.second};
    StripPoint pxm{p.strip, p.first - h1, p.second};
    StripPoint pyp{p.strip, p.first, p.second + h2};
    StripPoint pym{p.strip, p.first, p.second - h2};
    guard_same_component(pxp, pxm);
    guard_same_component(pyp, pym);
    StripPoint fxp = maps.apply_half(id, pxp, order, false);
    StripPoint fxm = maps.apply_half(id, pxm, order, false);
    StripPoint fyp = maps.apply_half(id, pyp, order, false);
    StripPoint fym = maps.apply_half(id, pym, order, false);
    return {(fxp.first - fxm.first) / (2 * h1), (fyp.first - fym.first) / (2 * h2),
            (fxp.second - fxm.second) / (2 * h1), (fyp.second - fym.second) / (2 * h2)};
}

ConeVerifyReport verify_cone_invariance(const ConeSpec& cone, const NormalFormMaps& maps,
                                        double V_star, double stretch_floor, long n_samples,
                                        CorrectionOrder order, std::uint64_t seed,
                                        int threads) {
    struct Slot {
        int cone_bad = 0, stretch_bad = 0, skipped = 0, counted = 0;
        double min_stretch = 1e300;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n_samples));

    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
        Slot& s = slots[i];
        CounterRng rng(seed, i);
        // rotate through the three strips to exercise all six maps
        const Strip strip = i % 3 == 0 ? Strip::R1 : (i % 3 == 1 ? Strip::R2minus : Strip::R2plus);
        const double energy = V_star * std::exp(rng.uniform(0.0, std::log(10.0)));
        StripPoint p{strip, rng.uniform(0.0, 2.0), energy};
        MapId id;
        try {
            if (strip == Strip::R2plus) {
                id = MapId::U21;
            } else {
                RegionInfo info = maps.classify(p, 0.0);
                if (info.ambiguous) {
                    s.skipped = 1;
                    return;
                }
                switch (info.tag) {
                    case RegionTag::U_en: id = MapId::U12; break;
                    case RegionTag::L_en_long: id = MapId::Ll12; break;
                    case RegionTag::L_en_short: id = MapId::Ls12; break;
                    case RegionTag::L_ex_long: id = MapId::Ll21; break;
                    default: id = MapId::Ls21; break;
                }
            }
            Mat2 J = numeric_jacobian(maps, id, p, order);
            Vec2 v = cone.direction(rng.uniform(-1.0, 1.0));
            Vec2 w = J.apply(v);
            s.counted = 1;
            s.min_stretch = w.norm() / v.norm();
            if (!cone.contains(w, 1e-7)) s.cone_bad = 1;
            if (s.min_stretch < stretch_floor) s.stretch_bad = 1;
        } catch (const DomainError&) {
            s.skipped = 1;
        }
    });

    ConeVerifyReport rep;
    rep.min_stretch = 1e300;
    for (const Slot& s : slots) {
        rep.samples += s.counted;
        rep.cone_violations += s.cone_bad;
        rep.stretch_violations += s.stretch_bad;
        rep.skipped_near_singularity += s.skipped;
        if (s.counted) rep.min_stretch = std::min(rep.min_stretch, s.min_stretch);
    }
    return rep;
}

}  // namespace fermi
