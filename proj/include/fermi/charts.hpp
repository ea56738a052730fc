#pragma once

#include "fermi/params.hpp"
#include "fermi/profile.hpp"

namespace fermi {

enum class Chart { U, L, F };
enum class Strip { R1, R2plus, R2minus };

// Action-angle-like point: (theta, I) above the slit, (zeta, J) below,
// (theta, H) over the right floor.
struct AdiabaticPoint {
    Chart chart;
    double angle;   // in [0,2)
    double action;  // > 0
};

// Rescaled coordinates on the singular strips: (sigma, H/L*) on R1,
// (tau, I/L*) on R2+, (rho, J/M*) on R2-.
struct StripPoint {
    Strip strip;
    double first;
    double second;
};

inline Chart chart_for(Strip s) {
    switch (s) {
        case Strip::R1: return Chart::F;
        case Strip::R2plus: return Chart::U;
        default: return Chart::L;
    }
}

// Coordinate changes between exact collision records (t, v) and the adiabatic
// / strip coordinates. Immutable; shares the quadrature tables in params.
class ChartSet {
public:
    ChartSet(const ModelParams& params, const SlitProfile& profile)
        : params_(&params), profile_(&profile) {}

    AdiabaticPoint to_adiabatic(double t, double v, Chart chart) const;
    std::pair<double, double> from_adiabatic(const AdiabaticPoint& p) const;

    StripPoint strip_coords(const AdiabaticPoint& p, Strip strip) const;
    AdiabaticPoint from_strip(const StripPoint& sp) const;

    StripPoint tv_to_strip(double t, double v, Strip strip) const {
        return strip_coords(to_adiabatic(t, v, chart_for(strip)), strip);
    }
    std::pair<double, double> strip_to_tv(const StripPoint& sp) const {
        return from_adiabatic(from_strip(sp));
    }

    const ModelParams& params() const { return *params_; }
    const SlitProfile& profile() const { return *profile_; }

private:
    const ModelParams* params_;
    const SlitProfile* profile_;
};

// difference reduced into (-1, 1]: phase offsets near a strip anchor
double wrap_centered(double d);

}  // namespace fermi
