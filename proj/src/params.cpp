#include "fermi/params.hpp"

#include <algorithm>
#include <cmath>

namespace fermi {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw NumericalError("adaptive quadrature failed to converge");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    // keep the child tolerance above what doubles can resolve
    const double child = std::max(0.5 * tol, 1e-16 * (1.0 + std::abs(whole)));
    return simpson_rec(f, a, m, fa, flm, fm, left, child, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, child, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, 48);
}

double ModelParams::Table::operator()(double x) const {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (i + 1 >= t.size()) i = t.size() - 2;
    const double h = t[i + 1] - t[i];
    const double s = (x - t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * val[i] + (s3 - 2 * s2 + s) * h * deriv[i] +
           (-2 * s3 + 3 * s2) * val[i + 1] + (s3 - s2) * h * deriv[i + 1];
}

double ModelParams::Table::inverse(double v) const {
    auto it = std::upper_bound(val.begin(), val.end(), v);
    std::size_t i = it == val.begin() ? 0 : static_cast<std::size_t>(it - val.begin()) - 1;
    if (i + 1 >= val.size()) i = val.size() - 2;
    double lo = t[i], hi = t[i + 1];
    double x = lo + (hi - lo) * (v - val[i]) / std::max(val[i + 1] - val[i], 1e-300);
    // safeguarded Newton on the Hermite segment
    for (int iter = 0; iter < 60; ++iter) {
        const double g = (*this)(x)-v;
        if (g > 0.0)
            hi = x;
        else
            lo = x;
        const double h = t[i + 1] - t[i];
        const double s = (x - t[i]) / h;
        const double dg = ((6 * s * s - 6 * s) * (val[i] - val[i + 1]) +
                           (3 * s * s - 4 * s + 1) * h * deriv[i] +
                           (3 * s * s - 2 * s) * h * deriv[i + 1]) /
                          h;
        double step = dg != 0.0 ? g / dg : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

double ModelParams::theta(double t) const {
    const double r = reduce_mod2(t);
    return reduce_mod2(2.0 * theta_table(r) / L_star);
}

double ModelParams::zeta(double t) const {
    const double r = reduce_mod2(t);
    return reduce_mod2(2.0 * zeta_table(r) / M_star);
}

double ModelParams::theta_inverse(double theta_val) const {
    return theta_table.inverse(reduce_mod2(theta_val) * L_star / 2.0);
}

double ModelParams::zeta_inverse(double zeta_val) const {
    return zeta_table.inverse(reduce_mod2(zeta_val) * M_star / 2.0);
}

bool ModelParams::in_floor_window(double t) const {
    const double r = reduce_mod2(t);
    return r > t1_star && r < t2_star;
}

GapLimits ModelParams::l_of(double t, const SlitProfile& profile, Side side) const {
    const double r = reduce_mod2(t);
    const bool floor_side = (r > t1_star && r < t2_star) ||
                            (r == t1_star && side == Side::right) ||
                            (r == t2_star && side == Side::left);
    if (floor_side) return {1.0, 0.0, 0.0};
    ProfileEval e = profile.eval(r, side);
    return {1.0 - e.f, -e.fdot, -e.fddot};
}

GapLimits ModelParams::m_of(double t, const SlitProfile& profile, Side side) const {
    const double r = reduce_mod2(t);
    const bool floor_side = (r > t1_star && r < t2_star) ||
                            (r == t1_star && side == Side::right) ||
                            (r == t2_star && side == Side::left);
    if (floor_side) return {-1.0, 0.0, 0.0};
    ProfileEval e = profile.eval(r, side);
    return {-e.f, -e.fdot, -e.fddot};
}

namespace {

// Cumulative integral table over [0,2], nodes uniform within each smooth
// span, with exact node derivatives for Hermite interpolation. 4-point Gauss
// per cell keeps the cumulative error well under the 1e-12 budget. The
// integrand factory supplies the correct one-sided branch per span, so node
// derivatives at a jump belong to the span being tabulated.
ModelParams::Table build_cumulative_table(
    const std::function<std::function<double(double)>(double, double)>& integrand_for_span,
    const std::vector<double>& spans, double node_spacing) {
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    ModelParams::Table tab;
    double acc = 0.0;
    tab.t.push_back(0.0);
    tab.val.push_back(0.0);
    {
        auto g0 = integrand_for_span(spans[0], spans[1]);
        tab.deriv.push_back(g0(0.0));
    }
    for (std::size_t s = 0; s + 1 < spans.size(); ++s) {
        const double a = spans[s], b = spans[s + 1];
        if (b - a < 1e-15) continue;
        auto g = integrand_for_span(a, b);
        if (s > 0) {
            // duplicate the shared node carrying this span's one-sided slope;
            // upper_bound lookups land past the pair, never between
            tab.t.push_back(a);
            tab.val.push_back(acc);
            tab.deriv.push_back(g(a));
        }
        const int n = std::max(8, static_cast<int>(std::ceil((b - a) / node_spacing)));
        const double h = (b - a) / n;
        for (int i = 1; i <= n; ++i) {
            const double lo = a + (i - 1) * h, hi = a + i * h;
            double cell = 0.0;
            for (int q = 0; q < 4; ++q)
                cell += gw[q] * g(0.5 * (lo + hi) + 0.5 * h * gx[q]);
            acc += 0.5 * h * cell;
            tab.t.push_back(hi);
            tab.val.push_back(acc);
            tab.deriv.push_back(g(hi));
        }
    }
    return tab;
}

}  // namespace

ModelParams derive_params(const SlitProfile& profile, double lambda_slit, double x0,
                          double c_bound) {
    if (!(x0 > 0.0 && x0 < lambda_slit && lambda_slit < 1.0))
        throw DomainError("need 0 < x0 < lambda < 1");
    profile.validate(c_bound);

    ModelParams p;
    p.lambda_slit = lambda_slit;
    p.x0 = x0;
    p.c_bound = c_bound;
    p.t1_star = lambda_slit - x0;
    p.t2_star = 2.0 - lambda_slit - x0;

    ProfileEval e1 = profile.eval(p.t1_star);
    ProfileEval e2 = profile.eval(p.t2_star);
    p.f1 = e1.f;
    p.f2 = e2.f;
    p.fdot1 = e1.fdot;
    p.fdot2 = e2.fdot;
    p.fddot1 = e1.fddot;
    p.fddot2 = e2.fddot;

    p.l_t1_minus = {1.0 - e1.f, -e1.fdot, -e1.fddot};
    p.l_t1_plus = {1.0, 0.0, 0.0};
    p.l_t2_minus = {1.0, 0.0, 0.0};
    p.l_t2_plus = {1.0 - e2.f, -e2.fdot, -e2.fddot};
    p.m_t1_minus = {-e1.f, -e1.fdot, -e1.fddot};
    p.m_t1_plus = {-1.0, 0.0, 0.0};
    p.m_t2_minus = {-1.0, 0.0, 0.0};
    p.m_t2_plus = {-e2.f, -e2.fdot, -e2.fddot};

    // integration spans: profile pieces split further at the switch times
    std::vector<double> spans = profile.breakpoints();
    spans.push_back(p.t1_star);
    spans.push_back(p.t2_star);
    std::sort(spans.begin(), spans.end());
    spans.erase(std::unique(spans.begin(), spans.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                spans.end());

    // Each span lies in one regime (over the floor or beside the slit); pick
    // the regime at the span midpoint so endpoint evaluations stay one-sided.
    auto span_integrand = [&](double lo, double hi, bool lower_gap) {
        const double mid = 0.5 * (lo + hi);
        const bool floor_side = mid > p.t1_star && mid < p.t2_star;
        return std::function<double(double)>([&profile, floor_side, lower_gap](double t) {
            if (floor_side) return 1.0;  // both |l| and |m| are 1 there
            const double f = profile.eval(t).f;
            const double g = lower_gap ? f : 1.0 - f;
            return 1.0 / (g * g);
        });
    };

    auto integrate_spans = [&](bool lower_gap, double a, double b) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
            const double lo = std::max(spans[i], a), hi = std::min(spans[i + 1], b);
            if (hi - lo > 1e-15)
                total += adaptive_simpson(span_integrand(lo, hi, lower_gap), lo, hi, 1e-13);
        }
        return total;
    };

    p.L_star = integrate_spans(false, 0.0, 2.0);
    p.M_star = integrate_spans(true, 0.0, 2.0);
    const double S1_l = integrate_spans(false, 0.0, p.t1_star);
    const double S2_l = integrate_spans(false, 0.0, p.t2_star);
    const double S1_m = integrate_spans(true, 0.0, p.t1_star);
    const double S2_m = integrate_spans(true, 0.0, p.t2_star);
    p.theta1_star = 2.0 * S1_l / p.L_star;
    p.theta2_star = 2.0 * S2_l / p.L_star;
    p.zeta1_star = 2.0 * S1_m / p.M_star;
    p.zeta2_star = 2.0 * S2_m / p.M_star;
    p.LT = 2.0 * (S2_l - S1_l);
    p.LTb = 2.0 * (p.L_star - (S2_l - S1_l));
    p.MZb = 2.0 * (p.M_star - (S2_m - S1_m));

    // node spacing resolving the fastest profile oscillation
    const double spacing = std::min(5e-4, profile.scan_step() / 40.0);
    p.theta_table = build_cumulative_table(
        [&](double lo, double hi) { return span_integrand(lo, hi, false); }, spans, spacing);
    p.zeta_table = build_cumulative_table(
        [&](double lo, double hi) { return span_integrand(lo, hi, true); }, spans, spacing);

    return p;
}

NormalFormConstants normal_form_constants(const ModelParams& p) {
    NormalFormConstants c;
    auto delta = [](const GapLimits& lm, const GapLimits& lp) {
        return 0.5 * (lp.value / lm.value) * (lm.value * lp.dot - lp.value * lm.dot);
    };
    auto delta_p = [](const GapLimits& lm, const GapLimits& lp) {
        return (lp.value * lp.value / 8.0) * (lm.value * lp.ddot - lp.value * lm.ddot);
    };
    auto delta_pp = [](const GapLimits& lm, const GapLimits& lp) {
        return (lm.value * lp.value / 24.0) * (lm.value * lp.ddot - lp.value * lm.ddot);
    };
    c.delta1 = delta(p.l_t1_minus, p.l_t1_plus);
    c.delta2 = delta(p.l_t2_minus, p.l_t2_plus);
    c.delta1_p = delta_p(p.l_t1_minus, p.l_t1_plus);
    c.delta2_p = delta_p(p.l_t2_minus, p.l_t2_plus);
    c.delta1_pp = delta_pp(p.l_t1_minus, p.l_t1_plus);
    c.delta2_pp = delta_pp(p.l_t2_minus, p.l_t2_plus);

    const GapLimits& mp = p.m_t2_plus;   // entry constants live at t2*
    c.kappa_l = 0.5 * mp.value * mp.dot;
    c.kappa_l_p = mp.value * mp.value * mp.ddot / 24.0;
    c.kappa_l_pp = mp.value * mp.value * mp.ddot / 8.0;
    c.kappa_s_p = mp.value * mp.value * mp.ddot / 8.0;
    c.kappa_s_pp = -mp.value * mp.value * mp.ddot / 24.0;

    const GapLimits& mm = p.m_t1_minus;  // exit constants live at t1*
    c.chi_l = -0.5 * mm.dot / mm.value;
    c.chi_l_p = mm.ddot * (1.0 - mm.value * mm.value / 3.0) / 8.0;
    c.chi_l_pp = -0.25 * mm.ddot;
    c.chi_s_p = 0.25 * mm.ddot;
    c.chi_s_pp = mm.value * (mm.value * mm.value * mm.ddot - 3.0 * mm.ddot) / 24.0;
    return c;
}

double drift_rate(double f1, double f2) {
    if (!(f1 > 0.0 && f1 < 1.0 && f2 > 0.0 && f2 < 1.0))
        throw DomainError("drift_rate needs f1, f2 in (0,1)");
    if (f1 == f2) return 0.0;
    return (1.0 - f2) * std::log((1.0 - f2) / (1.0 - f1)) + f2 * std::log(f2 / f1);
}

namespace {

// Switch times of the sine family hitting given phase targets near t1 ~ 1/4,
// t2 ~ 5/4; theta(t) = pi omega t + phi0.
double sine_time_at_phase(double omega, double phi0, double phase, double t_near) {
    const double k = std::round((M_PI * omega * t_near + phi0 - phase) / (2.0 * M_PI));
    return (phase + 2.0 * M_PI * k - phi0) / (M_PI * omega);
}

}  // namespace

ResonantConfig make_resonant_config(int k, double seam_jump) {
    if (k < 4) throw DomainError("resonant family needs k >= 4");
    // omega just off the integer 2k: the velocity jump at the period seam is
    // 2 A pi omega sin(pi omega) ~ seam_jump, kept small so the half-maps
    // stay accurate, while the switch speeds grow with omega.
    const int N = 2 * k;
    const double A = 0.2;
    double eps = seam_jump / (2.0 * A * M_PI * M_PI * N);
    const double omega = N + eps;
    const double phi0 = M_PI / 2.0 - M_PI * omega;
    // f = 0.4 with fdot < 0 at phase 7pi/6; f = 0.6 with fdot < 0 at 5pi/6
    const double t1 = sine_time_at_phase(omega, phi0, 7.0 * M_PI / 6.0, 0.25);
    const double t2 = sine_time_at_phase(omega, phi0, 5.0 * M_PI / 6.0, 1.25);
    ResonantConfig cfg;
    cfg.profile = SlitProfile::sine(0.5, A, omega, phi0);
    cfg.lambda_slit = 1.0 - (t2 - t1) / 2.0;
    cfg.x0 = cfg.lambda_slit - t1;
    cfg.omega = omega;
    cfg.fdot_switch = -A * M_PI * omega * std::sqrt(3.0) / 2.0;
    if (!(cfg.x0 > 0.0 && cfg.x0 < cfg.lambda_slit && cfg.lambda_slit < 1.0))
        throw NumericalError("resonant family produced an invalid geometry");
    return cfg;
}

ResonantConfig make_null_config(int k, double seam_jump) {
    if (k < 4) throw DomainError("null family needs k >= 4");
    const int N = 2 * k;
    const double A = 0.2;
    double eps = seam_jump / (2.0 * A * M_PI * M_PI * N);
    const double omega = N + eps;
    const double phi0 = M_PI / 2.0 - M_PI * omega;
    // both switch heights at the midline f = 1/2, full-speed slit: phase pi
    const double t1 = sine_time_at_phase(omega, phi0, M_PI, 0.25);
    const double t2 = sine_time_at_phase(omega, phi0, M_PI, 1.25);
    ResonantConfig cfg;
    cfg.profile = SlitProfile::sine(0.5, A, omega, phi0);
    cfg.lambda_slit = 1.0 - (t2 - t1) / 2.0;
    cfg.x0 = cfg.lambda_slit - t1;
    cfg.omega = omega;
    cfg.fdot_switch = -A * M_PI * omega;
    if (!(cfg.x0 > 0.0 && cfg.x0 < cfg.lambda_slit && cfg.lambda_slit < 1.0))
        throw NumericalError("null family produced an invalid geometry");
    return cfg;
}

}  // namespace fermi
