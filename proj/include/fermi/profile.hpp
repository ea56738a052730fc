#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fermi {

struct ProfileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// f(t), ft' and ft'' at a point; one-sided at the period seam.
struct ProfileEval {
    double f = 0.0;
    double fdot = 0.0;
    double fddot = 0.0;
};

enum class Side { right, left };

struct SineTerm {
    double amp = 0.0;
    double freq = 0.0;   // f += amp * sin(freq * t + phase)
    double phase = 0.0;
};

// One smooth section of the slit motion on [t0, t1) in base-period time.
// f(t) = sum_k poly[k] * (t - t0)^k + sum_j amp_j sin(freq_j t + phase_j)
struct ProfilePiece {
    double t0 = 0.0;
    double t1 = 2.0;
    std::vector<double> poly;
    std::vector<SineTerm> sines;

    ProfileEval eval(double t) const;
    double third_derivative(double t) const;
};

// Height f(t) of the oscillating slit, 2-periodic, continuous, piecewise C^3,
// with the velocity jump pinned to t in 2Z. Evaluation reduces t mod 2 and
// returns right limits at the seam unless Side::left is requested.
class SlitProfile {
public:
    static SlitProfile sine(double h0, double amp, double omega, double phi0);
    static SlitProfile constant(double h);
    static SlitProfile from_pieces(std::vector<ProfilePiece> pieces);

    ProfileEval eval(double t, Side side = Side::right) const;
    double height(double t) const { return eval(t).f; }

    // Breakpoints of the smooth pieces inside [0,2); quadrature never
    // straddles these.
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<ProfilePiece>& pieces() const { return pieces_; }

    // Sampling step small enough to resolve the fastest sine term.
    double scan_step() const { return scan_step_; }

    // min/max of f over a dense grid plus a derivative-bound margin.
    std::pair<double, double> height_range() const;

    // Throws ProfileError (with the offending t) unless
    // c <= f <= 1-c everywhere, f is continuous, velocity is continuous at
    // interior breakpoints and jumps at the period seam.
    void validate(double c_bound) const;

    double velocity_jump_at_seam() const;

private:
    std::vector<ProfilePiece> pieces_;
    std::vector<double> breaks_;
    double scan_step_ = 0.01;

    const ProfilePiece& piece_at(double t_reduced, Side side) const;
};

// Reduce t into [0,2).
double reduce_mod2(double t);

}  // namespace fermi
