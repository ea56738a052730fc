#include "fermi/profile.hpp"

#include <algorithm>
#include <cmath>

namespace fermi {

double reduce_mod2(double t) {
    double r = std::fmod(t, 2.0);
    if (r < 0.0) r += 2.0;
    // fmod can return 2.0 - eps rounded up through the addition above
    if (r >= 2.0) r -= 2.0;
    return r;
}

ProfileEval ProfilePiece::eval(double t) const {
    ProfileEval out;
    const double u = t - t0;
    // Horner for value and first two derivatives
    double p = 0.0, dp = 0.0, ddp = 0.0;
    for (std::size_t k = poly.size(); k-- > 0;) {
        ddp = ddp * u + 2.0 * dp;
        dp = dp * u + p;
        p = p * u + poly[k];
    }
    out.f = p;
    out.fdot = dp;
    out.fddot = ddp;
    for (const SineTerm& s : sines) {
        const double arg = s.freq * t + s.phase;
        const double sn = std::sin(arg), cs = std::cos(arg);
        out.f += s.amp * sn;
        out.fdot += s.amp * s.freq * cs;
        out.fddot -= s.amp * s.freq * s.freq * sn;
    }
    return out;
}

double ProfilePiece::third_derivative(double t) const {
    const double u = t - t0;
    double d3 = 0.0;
    for (std::size_t k = poly.size(); k-- > 3;) {
        double c = poly[k] * static_cast<double>(k * (k - 1) * (k - 2));
        d3 = d3 * u + c;
    }
    for (const SineTerm& s : sines) {
        const double arg = s.freq * t + s.phase;
        d3 -= s.amp * s.freq * s.freq * s.freq * std::cos(arg);
    }
    return d3;
}

SlitProfile SlitProfile::sine(double h0, double amp, double omega, double phi0) {
    ProfilePiece p;
    p.t0 = 0.0;
    p.t1 = 2.0;
    p.poly = {h0};
    p.sines = {{amp, M_PI * omega, phi0}};
    return from_pieces({p});
}

SlitProfile SlitProfile::constant(double h) {
    ProfilePiece p;
    p.t0 = 0.0;
    p.t1 = 2.0;
    p.poly = {h};
    return from_pieces({p});
}

SlitProfile SlitProfile::from_pieces(std::vector<ProfilePiece> pieces) {
    if (pieces.empty()) throw ProfileError("profile has no pieces");
    std::sort(pieces.begin(), pieces.end(),
              [](const ProfilePiece& a, const ProfilePiece& b) { return a.t0 < b.t0; });
    if (std::abs(pieces.front().t0) > 1e-14 || std::abs(pieces.back().t1 - 2.0) > 1e-14)
        throw ProfileError("profile pieces must cover [0,2)");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
        if (std::abs(pieces[i].t1 - pieces[i + 1].t0) > 1e-14)
            throw ProfileError("profile pieces must tile [0,2) without gaps at t=" +
                               std::to_string(pieces[i].t1));
    }
    SlitProfile prof;
    prof.pieces_ = std::move(pieces);
    prof.breaks_.push_back(0.0);
    for (const ProfilePiece& p : prof.pieces_) prof.breaks_.push_back(p.t1);
    double max_freq = 0.0;
    for (const ProfilePiece& p : prof.pieces_)
        for (const SineTerm& s : p.sines) max_freq = std::max(max_freq, std::abs(s.freq));
    prof.scan_step_ = max_freq > 0.0 ? std::min(0.01, 0.7 / max_freq) : 0.01;
    return prof;
}

const ProfilePiece& SlitProfile::piece_at(double t, Side side) const {
    // t in [0,2); left limits at t=0 mean the end of the last piece
    if (side == Side::left && t <= 1e-15) return pieces_.back();
    for (const ProfilePiece& p : pieces_) {
        if (side == Side::right ? (t >= p.t0 - 1e-15 && t < p.t1) : (t > p.t0 && t <= p.t1))
            return p;
    }
    return pieces_.back();
}

ProfileEval SlitProfile::eval(double t, Side side) const {
    double r = reduce_mod2(t);
    if (side == Side::left && r <= 1e-15) {
        return pieces_.back().eval(2.0);
    }
    return piece_at(r, side).eval(r);
}

std::pair<double, double> SlitProfile::height_range() const {
    double lo = 1e300, hi = -1e300;
    for (const ProfilePiece& p : pieces_) {
        const double len = p.t1 - p.t0;
        const int n = std::max(32, static_cast<int>(std::ceil(len / scan_step_)) * 4);
        double max_fdot = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = p.t0 + len * i / n;
            ProfileEval e = p.eval(std::min(t, p.t1));
            lo = std::min(lo, e.f);
            hi = std::max(hi, e.f);
            max_fdot = std::max(max_fdot, std::abs(e.fdot));
        }
        // pad by the worst slope over one grid cell
        const double pad = 0.5 * max_fdot * len / n;
        lo -= pad;
        hi += pad;
    }
    return {lo, hi};
}

void SlitProfile::validate(double c_bound) const {
    if (!(c_bound > 0.0 && c_bound < 0.5))
        throw ProfileError("c_bound must lie in (0, 1/2)");
    auto [lo, hi] = height_range();
    if (lo < c_bound - 1e-12 || hi > 1.0 - c_bound + 1e-12) {
        // locate a violating t for the error message
        double bad_t = 0.0, bad_f = 0.0;
        for (double t = 0.0; t < 2.0; t += scan_step_ / 4.0) {
            double f = eval(t).f;
            if (f < c_bound || f > 1.0 - c_bound) {
                bad_t = t;
                bad_f = f;
                break;
            }
        }
        throw ProfileError("slit height violates c-bounds: f(" + std::to_string(bad_t) +
                           ") = " + std::to_string(bad_f));
    }
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
        const double b = pieces_[i].t1;
        ProfileEval l = pieces_[i].eval(b);
        ProfileEval r = pieces_[i + 1].eval(b);
        if (std::abs(l.f - r.f) > 1e-10)
            throw ProfileError("profile discontinuous at interior breakpoint t=" +
                               std::to_string(b));
        if (std::abs(l.fdot - r.fdot) > 1e-10)
            throw ProfileError("velocity jump at interior breakpoint t=" + std::to_string(b) +
                               " (jumps are only allowed at t in 2Z)");
    }
    ProfileEval seam_l = eval(0.0, Side::left);
    ProfileEval seam_r = eval(0.0, Side::right);
    if (std::abs(seam_l.f - seam_r.f) > 1e-10)
        throw ProfileError("profile not continuous across the period seam");
}

double SlitProfile::velocity_jump_at_seam() const {
    return eval(0.0, Side::right).fdot - eval(0.0, Side::left).fdot;
}

}  // namespace fermi
