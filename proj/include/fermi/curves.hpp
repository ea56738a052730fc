#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fermi/billiard.hpp"
#include "fermi/charts.hpp"
#include "fermi/hyperbolic.hpp"
#include "fermi/maps.hpp"

namespace fermi {

struct RefinementOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConeViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CurveVertex {
    double first;
    double second;
    double mu;  // cumulative transported measure (preimage arclength)
};

// Ordered polyline on one strip with cone-tangent segments. The measure
// coordinate mu rides along under maps and cuts, so pushforward conserves
// curve measure by construction.
struct UnstableCurve {
    Strip strip = Strip::R1;
    std::vector<CurveVertex> v;
    bool begin_on_boundary = false;
    bool end_on_boundary = false;

    double length() const;             // polyline arclength in strip units
    double measure() const { return v.empty() ? 0.0 : v.back().mu - v.front().mu; }
    bool complete() const { return begin_on_boundary && end_on_boundary; }
    double min_energy() const;
};

UnstableCurve make_vertical_curve(Strip strip, double first, double energy_lo,
                                  double energy_hi, int n_vertices = 9);

struct CurveOptions {
    CorrectionOrder order = CorrectionOrder::G_plus_H;
    bool modified = true;  // forced lower entry below V_0
    ModifiedSystemConfig mod;
    const ConeSpec* cone = nullptr;  // when set, every output segment is checked
    double max_seg = 0.02;
    double chord_tol = 3e-5;
    std::size_t max_vertices = 400000;
    double min_piece_measure = 1e-13;
};

// Pushforward of unstable curves under the revolution dynamics, cut exactly
// at the region boundaries of each half map.
class CurvePusher {
public:
    CurvePusher(const NormalFormMaps& maps, CurveOptions opt) : maps_(&maps), opt_(opt) {}

    // cut an R1/R2 curve at the region boundaries of its strip
    std::vector<UnstableCurve> cut(const UnstableCurve& c) const;

    // one full revolution of the normal-form dynamics
    std::vector<UnstableCurve> revolution(const UnstableCurve& c) const;

    // same revolution through the exact billiard, transported by charts
    std::vector<UnstableCurve> revolution_exact(const UnstableCurve& c, const Billiard& bil,
                                                const ChartSet& charts) const;

    std::vector<UnstableCurve> iterate(std::vector<UnstableCurve> cs, int n_revolutions) const;

    const NormalFormMaps& maps() const { return *maps_; }
    const CurveOptions& options() const { return opt_; }

private:
    const NormalFormMaps* maps_;
    CurveOptions opt_;

    using PointMap = std::function<StripPoint(const StripPoint&)>;
    UnstableCurve map_piece(const UnstableCurve& piece, const PointMap& fn) const;
    std::vector<UnstableCurve> half_step(const std::vector<UnstableCurve>& pieces,
                                         bool entry_stage) const;
};

// largest curve length that is guaranteed to meet at most one singularity
// line per half map (with a 0.8 safety factor)
double complexity_scale(const ModelParams& params, const ExpansionRates& rates);

struct ComplexityScan {
    int max_pieces = 0;
    std::vector<long> histogram;  // histogram[k] = curves cut into k pieces
    int trials = 0;
};
ComplexityScan complexity_scan(const CurvePusher& pusher, double delta0, int trials,
                               double energy_lo, double energy_hi, std::uint64_t seed);

// sup-ratio distortion within single components of the n-step image
double distortion_estimate(const CurvePusher& pusher, const UnstableCurve& curve, int n);

struct RouteProportions {
    double frac_accelerating = 0.0;  // measure fraction of S_{+1}
    double frac_decelerating = 0.0;
    double frac_enter_lower = 0.0;
    double frac_enter_upper = 0.0;
    int components_spanned = 0;
    bool wide_uncertainty = false;  // curve too short for the estimate
};
RouteProportions route_proportions(const NormalFormMaps& maps, const UnstableCurve& curve,
                                   double V_star);

// Measured constants of the growth analysis.
struct GrowthConstants {
    double delta0 = 0.0;
    double kappa1 = 0.0;      // measured complexity at delta0
    double K_dist = 1.0;      // measured distortion
    double lambda_min = 0.0;  // minimal revolution expansion in the cone
    double theta1 = 0.0;      // kappa1 K^2 / lambda_min; long-curve scale
    double theta2 = 0.0, theta3 = 0.0, b1 = 1.0, eps0 = 0.0;  // k* = 2 defaults
    double C2 = 0.0, C3 = 0.0;
};
GrowthConstants derive_growth_constants(const ModelParams& params,
                                        const ExpansionRates& rates, double kappa1_meas,
                                        double K_meas);

struct TailFit {
    double ratio = 0.0;      // fitted geometric ratio
    double amplitude = 0.0;  // fitted prefactor
    double r2 = 0.0;
    int points_used = 0;
};
TailFit fit_geometric_tail(const std::vector<double>& measure_by_step);

struct GrowthTailReport {
    double theta1 = 0.0;
    std::vector<double> first_hit;    // m(first hit = n)/|gamma|, n = 1..
    TailFit first_hit_fit;            // theta4-hat
    std::vector<double> delayed;      // m(delayed hit = N0 + j)/|gamma|, j = 1..
    TailFit delayed_fit;
    std::vector<double> nhat_q99_over_k;  // 99th pct of renewal sums / k
    double a_hat = 0.0;                   // stabilized value
    double unresolved_measure = 0.0;      // mass never reaching a long curve
};

GrowthTailReport growth_statistics(const CurvePusher& pusher,
                                   const std::vector<UnstableCurve>& long_curves,
                                   double theta1, int N0, int horizon, int n_renewals,
                                   std::uint64_t seed);

}  // namespace fermi
