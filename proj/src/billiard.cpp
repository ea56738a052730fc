#include "fermi/billiard.hpp"

#include <cmath>
#include <limits>

namespace fermi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEdgeTol = 1e-12;
constexpr double kGrazeTol = 1e-9;
}  // namespace

std::pair<double, int> Billiard::horizontal_at(double t) const {
    double u = std::fmod(x0_ + t, 2.0);
    if (u < 0.0) u += 2.0;
    if (u < 1.0) return {u, +1};
    return {2.0 - u, -1};
}

double Billiard::find_slit_crossing(double t0, double y0, double v, double horizon,
                                    int side) const {
    if (horizon <= 0.0) return kInf;
    const double h =
        std::min({0.01, 0.1 / std::max(std::abs(v), 1.0), profile_->scan_step(), horizon});
    auto g = [&](double s) { return y0 + v * s - profile_->eval(t0 + s).f; };
    auto crossed = [&](double val) { return side > 0 ? val <= 0.0 : val >= 0.0; };

    double s_lo = 0.0;
    double g_lo = g(0.0);
    if (std::abs(g_lo) < 1e-13) {
        // fresh slit bounce: march off the surface in the departing direction
        bool found = false;
        for (double eps : {1e-9 * h, 1e-6 * h, 1e-3 * h}) {
            if (!crossed(g(eps))) {
                s_lo = eps;
                g_lo = g(eps);
                found = true;
                break;
            }
        }
        if (!found) throw OrbitAborted(OrbitAborted::Reason::grazing, t0);
    } else if (crossed(g_lo)) {
        // state is past the surface within tolerance; treat as no crossing here
        return kInf;
    }

    double s_hi = kInf;
    for (double s = s_lo + h;; s += h) {
        const bool last = s >= horizon;
        if (last) s = horizon;
        if (crossed(g(s))) {
            s_hi = s;
            break;
        }
        s_lo = s;
        if (last) return kInf;
    }

    // safeguarded Newton within [s_lo, s_hi]
    double x = 0.5 * (s_lo + s_hi);
    for (int it = 0; it < 100; ++it) {
        const double gx = g(x);
        if (crossed(gx))
            s_hi = x;
        else
            s_lo = x;
        const double gd = v - profile_->eval(t0 + x).fdot;
        double xn = gd != 0.0 ? x - gx / gd : 0.5 * (s_lo + s_hi);
        if (!(xn > s_lo && xn < s_hi)) xn = 0.5 * (s_lo + s_hi);
        if (s_hi - s_lo < 1e-14 * std::max(1.0, std::abs(t0))) break;
        x = xn;
    }
    const double root = 0.5 * (s_lo + s_hi);
    if (std::abs(v - profile_->eval(t0 + root).fdot) < kGrazeTol)
        throw OrbitAborted(OrbitAborted::Reason::grazing, t0 + root);
    return root;
}

CollisionEvent Billiard::next_collision(BallState& st,
                                        std::optional<CrossingRecord>* crossing) const {
    auto advance = [&](double dt) {
        st.t += dt;
        st.x += st.dir_x * dt;
        st.y += st.v * dt;
    };

    for (int guard = 0; guard < 16; ++guard) {
        const bool in_left = st.x < lambda_ || (st.x == lambda_ && st.dir_x < 0);
        const double t_wall = st.dir_x > 0 ? 1.0 - st.x : st.x;
        double t_lam = kInf;
        if (in_left && st.dir_x > 0) t_lam = lambda_ - st.x;
        if (!in_left && st.dir_x < 0) t_lam = st.x - lambda_;
        const double horizon = std::min(t_wall, t_lam);

        double dv = kInf;
        Surface surf = Surface::floor;
        Chamber cham = Chamber::right;
        if (!in_left) {
            if (st.v > 0.0) {
                dv = (1.0 - st.y) / st.v;
                surf = Surface::ceiling;
            } else if (st.v < 0.0) {
                dv = st.y / -st.v;
                surf = Surface::floor;
            }
        } else {
            const ProfileEval pe = profile_->eval(st.t);
            double d = st.y - pe.f;
            int side = std::abs(d) > kEdgeTol ? (d > 0.0 ? +1 : -1)
                                              : (st.v - pe.fdot > 0.0 ? +1 : -1);
            if (side > 0) {
                cham = Chamber::upper_left;
                if (st.v > 0.0) {
                    dv = (1.0 - st.y) / st.v;
                    surf = Surface::ceiling;
                }
                const double ds = find_slit_crossing(st.t, st.y, st.v, std::min(dv, horizon), +1);
                if (ds < dv) {
                    dv = ds;
                    surf = Surface::slit_top;
                }
            } else {
                cham = Chamber::lower_left;
                if (st.v < 0.0) {
                    dv = st.y / -st.v;
                    surf = Surface::floor;
                }
                const double ds = find_slit_crossing(st.t, st.y, st.v, std::min(dv, horizon), -1);
                if (ds < dv) {
                    dv = ds;
                    surf = Surface::slit_bottom;
                }
            }
        }

        if (dv <= horizon) {
            advance(dv);
            double v_before = st.v;
            switch (surf) {
                case Surface::floor:
                    st.y = 0.0;
                    st.v = -v_before;
                    break;
                case Surface::ceiling:
                    st.y = 1.0;
                    st.v = -v_before;
                    break;
                default: {
                    const ProfileEval pe = profile_->eval(st.t);
                    st.y = pe.f;
                    st.v = 2.0 * pe.fdot - v_before;
                    break;
                }
            }
            if (!in_left) cham = Chamber::right;
            return {st.t, surf, st.v, cham};
        }

        if (t_lam <= t_wall) {
            advance(t_lam);
            st.x = lambda_;
            const ProfileEval pe = profile_->eval(st.t);
            if (std::abs(st.y - pe.f) < kEdgeTol)
                throw OrbitAborted(OrbitAborted::Reason::slit_edge, st.t);
            const bool entering = st.dir_x < 0;
            const Chamber after = entering ? (st.y > pe.f ? Chamber::upper_left
                                                          : Chamber::lower_left)
                                           : Chamber::right;
            if (crossing) *crossing = CrossingRecord{st.t, st.y, st.v, entering, after};
            continue;
        }

        advance(t_wall);
        st.x = st.dir_x > 0 ? 1.0 : 0.0;
        const Surface wall = st.x == 1.0 ? Surface::right_wall : Surface::left_wall;
        st.dir_x = -st.dir_x;
        Chamber wall_cham = Chamber::right;
        if (st.x == 0.0)
            wall_cham = st.y > profile_->eval(st.t).f ? Chamber::upper_left : Chamber::lower_left;
        return {st.t, wall, st.v, wall_cham};
    }
    throw NumericalError("next_collision failed to make progress");
}

BallState Billiard::state_from_interaction(double t, double v) const {
    const double r = reduce_mod2(t);
    auto [x, dir] = horizontal_at(t);
    BallState st;
    st.t = t;
    st.x = x;
    st.dir_x = dir;
    if (r > t1_star_ && r < t2_star_) {
        if (v <= 0.0) throw DomainError("floor record needs outgoing v > 0");
        st.y = 0.0;
        st.v = v;
    } else {
        st.y = profile_->eval(t).f;
        st.v = v;
    }
    return st;
}

std::pair<double, double> Billiard::interaction_map(double t, double v) const {
    BallState st = state_from_interaction(t, v);
    for (long guard = 0; guard < 100000000L; ++guard) {
        CollisionEvent ev = next_collision(st);
        if (interacting(ev)) return {ev.t, ev.v_after};
    }
    throw NumericalError("interaction_map: no interacting collision found");
}

HalfRecord Billiard::first_slit_after_entry(double t, double v) const {
    BallState st = state_from_interaction(t, v);
    HalfRecord out{};
    bool entered = false;
    for (long guard = 0; guard < 100000000L; ++guard) {
        std::optional<CrossingRecord> cr;
        CollisionEvent ev = next_collision(st, &cr);
        if (cr && cr->entering_left) {
            if (entered) {  // full pass through the chamber with no slit hit
                out.t = st.t;
                out.v = st.v;
                out.valid = false;
                return out;
            }
            entered = true;
            out.chamber = cr->chamber_after;
            out.entered_long = cr->v < 0.0;
        }
        if (entered && (ev.surface == Surface::slit_top || ev.surface == Surface::slit_bottom)) {
            out.t = ev.t;
            out.v = ev.v_after;
            return out;
        }
    }
    throw NumericalError("first_slit_after_entry: ran out of events");
}

HalfRecord Billiard::first_floor_after_exit(double t, double v) const {
    BallState st = state_from_interaction(t, v);
    HalfRecord out{};
    bool exited = false;
    for (long guard = 0; guard < 100000000L; ++guard) {
        std::optional<CrossingRecord> cr;
        CollisionEvent ev = next_collision(st, &cr);
        if (cr && !cr->entering_left) {
            exited = true;
            out.exited_long = cr->v > 0.0;
        } else if (cr && cr->entering_left && exited) {
            out.valid = false;  // re-entered before touching the right floor
        }
        if (exited && ev.surface == Surface::floor && ev.chamber == Chamber::right) {
            out.t = ev.t;
            out.v = ev.v_after;
            out.chamber = Chamber::right;
            return out;
        }
    }
    throw NumericalError("first_floor_after_exit: ran out of events");
}

RevolutionRecord Billiard::revolution(double t, double v) const {
    RevolutionRecord rec{};
    HalfRecord h1 = first_slit_after_entry(t, v);
    if (!h1.valid) {
        HalfRecord h2 = first_floor_after_exit(h1.t, h1.v);
        rec.t_out = h2.t;
        rec.v_out = h2.v;
        rec.route = RouteKind::degenerate;
        return rec;
    }
    rec.t_slit = h1.t;
    rec.v_slit = h1.v;
    rec.has_slit = true;
    HalfRecord h2 = first_floor_after_exit(h1.t, h1.v);
    rec.t_out = h2.t;
    rec.v_out = h2.v;
    if (h1.chamber == Chamber::upper_left) {
        rec.route = RouteKind::upper;
    } else if (h1.entered_long) {
        rec.route = h2.exited_long ? RouteKind::lower_long_long : RouteKind::lower_long_short;
    } else {
        rec.route = h2.exited_long ? RouteKind::lower_short_long : RouteKind::lower_short_short;
    }
    return rec;
}

}  // namespace fermi
