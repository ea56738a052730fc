#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fermi/maps.hpp"

namespace fermi {

struct Vec2 {
    double x = 0.0, y = 0.0;
    double norm() const;
};

struct Mat2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a, b], [c, d]]
    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
};

struct NotHyperbolic : DomainError {
    using DomainError::DomainError;
};

struct EigenPair {
    double lambda_u;  // |lambda_u| > 1
    Vec2 e_u, e_s;    // unit eigenvectors
};

// Derivatives of the linear parts. The two lower entries share one matrix and
// so do the two lower exits, leaving four distinct matrices.
Mat2 dg_matrix(MapId id, const ModelParams& params, const NormalFormConstants& consts);

EigenPair eigen_decompose(const Mat2& m);

// direction angle of a line through the origin, in [0, pi)
double direction_angle(Vec2 v);
// distance between projective directions
double direction_distance(double a, double b);

// Common invariant unstable cone of the four DG matrices, as an angular arc
// around the vertical direction in strip tangent space.
struct ConeSpec {
    double angle_center = 0.0;
    double angle_halfwidth = 0.0;
    int gauge = 0;                 // opening gauge k of the per-matrix cones
    double slope_low = 0.0;        // bounding tangent slopes dH/dsigma
    double slope_high = 0.0;
    double stable_margin = 0.0;    // angular margin to the nearest stable dir
    double min_linear_stretch = 0.0;

    bool contains_angle(double phi, double tol = 0.0) const;
    bool contains(Vec2 v, double tol = 0.0) const { return contains_angle(direction_angle(v), tol); }
    Vec2 direction(double s) const;  // s in [-1, 1] across the arc
};

struct ConeConstructionFailed : std::runtime_error {
    MapId offender;
    ConeConstructionFailed(MapId id, const std::string& why)
        : std::runtime_error("cone construction failed at " + std::string(map_id_name(id)) +
                             ": " + why),
          offender(id) {}
};

ConeSpec common_cone(const ModelParams& params, const NormalFormConstants& consts);

struct ExpansionRates {
    // same order as MapId: U12, U21, Ll12, Ls12, Ll21, Ls21
    std::array<double, 6> lambda_min{};
    std::array<double, 6> lambda_max{};
    double lambda_F = 0.0;   // min{l12U*l21U, l12L*l21L}
    double Lambda_F = 0.0;   // max of the products
};

ExpansionRates expansion_rates(const ModelParams& params, const NormalFormConstants& consts,
                               const ConeSpec& cone);

struct ConeVerifyReport {
    long samples = 0;
    long cone_violations = 0;
    long stretch_violations = 0;
    long skipped_near_singularity = 0;
    double min_stretch = 0.0;
};

// Monte Carlo verification that the numerically differentiated full maps
// (G + H) keep cone vectors inside the cone and stretch them.
ConeVerifyReport verify_cone_invariance(const ConeSpec& cone, const NormalFormMaps& maps,
                                        double V_star, double stretch_floor, long n_samples,
                                        CorrectionOrder order, std::uint64_t seed,
                                        int threads);

// central-difference Jacobian of a half map; steps shrink away from
// singularity lines, throws DomainError if the stencil straddles one
Mat2 numeric_jacobian(const NormalFormMaps& maps, MapId id, const StripPoint& p,
                      CorrectionOrder order);

}  // namespace fermi
