#pragma once

#include <optional>
#include <vector>

#include "fermi/params.hpp"
#include "fermi/profile.hpp"

namespace fermi {

struct OrbitAborted : std::runtime_error {
    enum class Reason { slit_edge, grazing };
    Reason reason;
    double when;
    OrbitAborted(Reason r, double t)
        : std::runtime_error(r == Reason::slit_edge ? "orbit hit the slit edge"
                                                    : "grazing slit impact"),
          reason(r),
          when(t) {}
};

enum class Surface { floor, ceiling, slit_top, slit_bottom, left_wall, right_wall };
enum class Chamber { right, upper_left, lower_left };

struct BallState {
    double t = 0.0;
    double x = 0.0;
    int dir_x = +1;  // horizontal speed is exactly 1
    double y = 0.0;
    double v = 0.0;
};

struct CollisionEvent {
    double t;
    Surface surface;
    double v_after;
    Chamber chamber;
};

// Crossing of x = lambda processed while searching for the next collision.
struct CrossingRecord {
    double t;
    double y;
    double v;
    bool entering_left;
    Chamber chamber_after;
};

enum class RouteKind {
    upper,
    lower_long_long,   // entry label then exit label
    lower_long_short,
    lower_short_long,
    lower_short_short,
    degenerate,  // no slit interaction during the revolution (static or very slow)
};

struct HalfRecord {
    double t, v;          // collision record reached
    Chamber chamber;      // chamber of the slit collision (for entries)
    bool entered_long;    // lower entries: floor first (true) or slit directly
    bool exited_long;     // lower exits: left moving up (true) or down
    bool valid = true;
};

struct RevolutionRecord {
    double t_out, v_out;
    RouteKind route;
    double t_slit = 0.0, v_slit = 0.0;  // first slit collision inside the chamber
    bool has_slit = false;
};

// Event-driven dynamics of the ball in the unit square with the oscillating
// slit over [0, lambda]. The horizontal zigzag is the exact resonant one
// fixed by x0; every collision is resolved to absolute tolerance ~1e-13.
class Billiard {
public:
    Billiard(const SlitProfile& profile, double lambda_slit, double x0)
        : profile_(&profile), lambda_(lambda_slit), x0_(x0),
          t1_star_(lambda_slit - x0), t2_star_(2.0 - lambda_slit - x0) {}
    Billiard(const SlitProfile& profile, const ModelParams& params)
        : Billiard(profile, params.lambda_slit, params.x0) {}

    // Advances the state to the next collision and returns the event.
    // Chamber crossings on the way are reported through `crossing`.
    CollisionEvent next_collision(BallState& state,
                                  std::optional<CrossingRecord>* crossing = nullptr) const;

    // Builds the full state of an interacting collision from its (t, v)
    // record (v is the velocity immediately after the collision).
    BallState state_from_interaction(double t, double v) const;

    // Iterates to the next collision at the interacting region (slit on the
    // left, floor on the right) and returns its record.
    std::pair<double, double> interaction_map(double t, double v) const;

    // From an R1 record (right-floor collision), runs to the first slit
    // collision after the ball enters the left chamber.
    HalfRecord first_slit_after_entry(double t, double v) const;

    // From a slit record inside the left chamber, runs to the first
    // right-floor collision after the ball exits.
    HalfRecord first_floor_after_exit(double t, double v) const;

    // Full revolution of the return dynamics on R1.
    RevolutionRecord revolution(double t, double v) const;

    // zigzag position/direction of the resonant horizontal motion
    std::pair<double, int> horizontal_at(double t) const;

    bool interacting(const CollisionEvent& ev) const {
        return ev.surface == Surface::slit_top || ev.surface == Surface::slit_bottom ||
               (ev.surface == Surface::floor && ev.chamber == Chamber::right);
    }

    double lambda_slit() const { return lambda_; }

private:
    const SlitProfile* profile_;
    double lambda_, x0_, t1_star_, t2_star_;

    double find_slit_crossing(double t0, double y0, double v, double horizon, int side) const;
};

}  // namespace fermi
