#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "fermi/profile.hpp"

namespace fermi {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Simpson on [a,b]; the integrand must be smooth there.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12);

// One-sided values of the chamber gap functions at a switch time.
//   l(t) = 1 - f(t) while the ball is left of the slit, 1 on the right floor
//   m(t) = -f(t) on the left, -1 on the right (kept negative on purpose)
struct GapLimits {
    double value, dot, ddot;
};

// Every scalar the half-revolution maps and the analysis need, derived once
// from (profile, lambda, x0).
struct ModelParams {
    double lambda_slit = 0.5;
    double x0 = 0.25;
    double c_bound = 0.25;

    double t1_star = 0.0, t2_star = 0.0;
    double f1 = 0.0, f2 = 0.0;
    double fdot1 = 0.0, fdot2 = 0.0;
    double fddot1 = 0.0, fddot2 = 0.0;

    double L_star = 0.0;  // integral of l^-2 over one period
    double M_star = 0.0;  // integral of m^-2 over one period
    double theta1_star = 0.0, theta2_star = 0.0;
    double zeta1_star = 0.0, zeta2_star = 0.0;

    // Map coefficients, computed directly by quadrature (not as products of
    // the mod-reduced phases):
    //   LT  = L_star (theta2* - theta1*)      = 2 int_{t1*}^{t2*} l^-2
    //   LTb = L_star (2 + theta1* - theta2*)  = 2 int_{t2*}^{t1*+2} l^-2
    //   MZb = M_star (2 + zeta1* - zeta2*)    = 2 int_{t2*}^{t1*+2} m^-2
    double LT = 0.0, LTb = 0.0, MZb = 0.0;

    GapLimits l_t1_minus, l_t1_plus, l_t2_minus, l_t2_plus;
    GapLimits m_t1_minus, m_t1_plus, m_t2_minus, m_t2_plus;

    // theta(t)/zeta(t) by cached quadrature; strictly increasing, theta(2)=2.
    double theta(double t) const;
    double zeta(double t) const;
    double theta_inverse(double theta_val) const;
    double zeta_inverse(double zeta_val) const;

    // gap functions at arbitrary t (right limits at the switch times)
    GapLimits l_of(double t, const SlitProfile& profile, Side side = Side::right) const;
    GapLimits m_of(double t, const SlitProfile& profile, Side side = Side::right) const;

    bool in_floor_window(double t) const;  // t1* < t mod 2 < t2*

    struct Table {
        std::vector<double> t, val, deriv;  // monotone cubic Hermite data
        double operator()(double t) const;
        double inverse(double v) const;
    };
    Table theta_table, zeta_table;
};

ModelParams derive_params(const SlitProfile& profile, double lambda_slit, double x0,
                          double c_bound = 0.25);

// The constants of the half-revolution normal forms, from one-sided limits of
// l, m and their derivatives at the switch times.
struct NormalFormConstants {
    double delta1 = 0.0, delta2 = 0.0;
    double delta1_p = 0.0, delta2_p = 0.0;
    double delta1_pp = 0.0, delta2_pp = 0.0;
    double kappa_l = 0.0, kappa_l_p = 0.0, kappa_l_pp = 0.0;
    double kappa_s_p = 0.0, kappa_s_pp = 0.0;
    double chi_l = 0.0, chi_l_p = 0.0, chi_l_pp = 0.0;
    double chi_s_p = 0.0, chi_s_pp = 0.0;
};

NormalFormConstants normal_form_constants(const ModelParams& params);

// Kullback-Leibler divergence of Bernoulli(f2) from Bernoulli(f1) in nats:
// the expected log-energy gain per revolution.
double drift_rate(double f1, double f2);

// Builds the shipped sine-profile configurations: the phases at both switch
// times are pinned so that f(t1*) = 0.4 and f(t2*) = 0.6 exactly, |fdot| at
// the switches grows linearly in k, and the velocity jump at the period seam
// stays at the small configured value (the jump must exist, but a large one
// degrades the half-revolution normal forms, whose derivation splits at the
// switch times only).
struct ResonantConfig {
    SlitProfile profile;
    double lambda_slit;
    double x0;
    double omega;
    double fdot_switch;  // common fdot value at both switch times
};
ResonantConfig make_resonant_config(int k, double seam_jump = 2e-6);

// f1 = f2 = 1/2 control with full-speed slit at both switches: zero drift.
ResonantConfig make_null_config(int k, double seam_jump = 2e-6);

}  // namespace fermi
