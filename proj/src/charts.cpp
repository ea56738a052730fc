#include "fermi/charts.hpp"

#include <cmath>

namespace fermi {

double wrap_centered(double d) {
    double r = reduce_mod2(d);
    if (r > 1.0) r -= 2.0;
    return r;
}

AdiabaticPoint ChartSet::to_adiabatic(double t, double v, Chart chart) const {
    const ModelParams& p = *params_;
    switch (chart) {
        case Chart::F: {
            if (v <= 0.0) throw DomainError("chart F needs v > 0");
            if (!p.in_floor_window(t)) throw DomainError("chart F needs t in the floor window");
            return {Chart::F, p.theta(t), p.L_star * v / 2.0};
        }
        case Chart::U: {
            if (v <= 0.0) throw DomainError("chart U needs v > 0");
            if (p.in_floor_window(t)) throw DomainError("chart U needs t in the slit window");
            GapLimits l = p.l_of(t, *profile_);
            const double I =
                p.L_star / 2.0 * (l.value * v + l.value * l.dot + l.value * l.value * l.ddot / (3.0 * v));
            return {Chart::U, p.theta(t), I};
        }
        default: {
            if (v >= 0.0) throw DomainError("chart L needs v < 0");
            if (p.in_floor_window(t)) throw DomainError("chart L needs t in the slit window");
            GapLimits m = p.m_of(t, *profile_);
            const double J =
                p.M_star / 2.0 * (m.value * v + m.value * m.dot + m.value * m.value * m.ddot / (3.0 * v));
            return {Chart::L, p.zeta(t), J};
        }
    }
}

std::pair<double, double> ChartSet::from_adiabatic(const AdiabaticPoint& pt) const {
    const ModelParams& p = *params_;
    if (pt.chart == Chart::F) {
        return {p.theta_inverse(pt.angle), 2.0 * pt.action / p.L_star};
    }
    // Invert action = (N/2)(g v + g gdot + g^2 gddot/(3v)) for v: a quadratic
    //   g v^2 + (g gdot - 2 action/N) v + g^2 gddot/3 = 0
    // taking the large root with the sign the chart demands.
    double t, a, b, c;
    if (pt.chart == Chart::U) {
        t = p.theta_inverse(pt.angle);
        GapLimits l = p.l_of(t, *profile_);
        a = l.value;
        b = l.value * l.dot - 2.0 * pt.action / p.L_star;
        c = l.value * l.value * l.ddot / 3.0;
    } else {
        t = p.zeta_inverse(pt.angle);
        GapLimits m = p.m_of(t, *profile_);
        a = m.value;
        b = m.value * m.dot - 2.0 * pt.action / p.M_star;
        c = m.value * m.value * m.ddot / 3.0;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) throw NumericalError("action inversion: no real solution");
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    const double v = q / a;  // the large-|v| root; the other is c/q
    if (pt.chart == Chart::U && v <= 0.0) throw NumericalError("action inversion: wrong sign");
    if (pt.chart == Chart::L && v >= 0.0) throw NumericalError("action inversion: wrong sign");
    return {t, v};
}

StripPoint ChartSet::strip_coords(const AdiabaticPoint& pt, Strip strip) const {
    if (chart_for(strip) != pt.chart) throw DomainError("chart/strip pairing mismatch");
    const ModelParams& p = *params_;
    switch (strip) {
        case Strip::R1:
            return {Strip::R1, pt.action * wrap_centered(pt.angle - p.theta1_star),
                    pt.action / p.L_star};
        case Strip::R2plus:
            return {Strip::R2plus, pt.action * wrap_centered(pt.angle - p.theta2_star),
                    pt.action / p.L_star};
        default:
            return {Strip::R2minus, pt.action * wrap_centered(pt.angle - p.zeta2_star),
                    pt.action / p.M_star};
    }
}

AdiabaticPoint ChartSet::from_strip(const StripPoint& sp) const {
    const ModelParams& p = *params_;
    switch (sp.strip) {
        case Strip::R1: {
            const double H = sp.second * p.L_star;
            if (H <= 0.0) throw DomainError("strip energy must be positive");
            return {Chart::F, reduce_mod2(p.theta1_star + sp.first / H), H};
        }
        case Strip::R2plus: {
            const double I = sp.second * p.L_star;
            if (I <= 0.0) throw DomainError("strip energy must be positive");
            return {Chart::U, reduce_mod2(p.theta2_star + sp.first / I), I};
        }
        default: {
            const double J = sp.second * p.M_star;
            if (J <= 0.0) throw DomainError("strip energy must be positive");
            return {Chart::L, reduce_mod2(p.zeta2_star + sp.first / J), J};
        }
    }
}

}  // namespace fermi
