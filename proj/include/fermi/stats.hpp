#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fermi/billiard.hpp"
#include "fermi/charts.hpp"
#include "fermi/curves.hpp"
#include "fermi/maps.hpp"

namespace fermi {

enum class DynamicsKind { exact, normal_form_P, modified_P0 };
enum class InitKind { rect, curve };
enum class Termination { completed, aborted_edge, fell_below_threshold };

struct EnsembleConfig {
    std::uint64_t seed = 1;
    int n_orbits = 1000;
    double v_lo = 1000.0, v_hi = 2000.0;  // initial energy window (strip units)
    int horizon = 100;                    // revolutions
    DynamicsKind dynamics = DynamicsKind::modified_P0;
    InitKind init = InitKind::rect;
    double curve_sigma = 1.0;   // curve init: vertical segment at this sigma
    double z_floor = -1.0;      // orbit stops below this energy; <0 => V_star
    bool track_stopping_time = false;  // co-evolve a curve for the delayed time
    double theta1 = 0.05;              // long-curve scale for the detector
    int N0 = 50;                       // delay of the stopping time
    int threads = 1;

    void validate() const;
};

struct OrbitRecord {
    double sigma0 = 0.0, z0 = 0.0;
    std::vector<signed char> itinerary;  // +1 lower route, -1 upper
    std::vector<double> log_energy;      // ln z_n for n = 0.. (while alive)
    Termination termination = Termination::completed;
    int nhat = -1;        // delayed long-curve hitting time (curve detector)
    int nhat_proxy = -1;  // tangent-expansion proxy
};

// Deterministic given (seed, orbit index) for any thread count. billiard and
// charts are only needed for exact dynamics.
std::vector<OrbitRecord> run_ensemble(const EnsembleConfig& cfg, const NormalFormMaps& maps,
                                      const ModifiedSystemConfig& mod,
                                      const Billiard* billiard = nullptr,
                                      const ChartSet* charts = nullptr);

struct DriftReport {
    double mean = 0.0, ci_lo = 0.0, ci_hi = 0.0;
    int n_used = 0;
    int N0 = 0;
};
DriftReport drift_estimate(const std::vector<OrbitRecord>& records, int N0,
                           std::uint64_t seed = 7);

struct WalkReport {
    double mean_step_analytic = 0.0;  // drift_rate + log(ell)
    double empirical_mean_step = 0.0;
    std::vector<double> final_log_gain;  // per walk, over N steps
};
WalkReport bernoulli_walk(double ell, double f1, double f2, int N, int n_walks,
                          std::uint64_t seed);

// P(sum of first n steps < (h - r) n) per n, against exp(-2 n r^2)
struct WalkTailReport {
    std::vector<double> frac_below;
    std::vector<double> envelope;
};
WalkTailReport bernoulli_tail(double ell, double f1, double f2, int N, int n_walks, double r,
                              std::uint64_t seed);

inline double hoeffding_envelope(int n, double r) { return std::exp(-2.0 * n * r * r); }

struct ItineraryReport {
    int depth = 0;
    std::vector<double> freq;       // index bits: bit k set iff symbol +1 at lag k
    std::vector<double> predicted;  // Bernoulli product
    double tv_distance = 0.0;
    long n_windows = 0;
};
ItineraryReport itinerary_stats(const std::vector<OrbitRecord>& records, int depth,
                                double f2, int burn_in = 5);

struct MomentReport {
    double estimate = 0.0, ci_lo = 0.0, ci_hi = 0.0;
    double kappa = 0.0;
    int n_used = 0;
};
MomentReport moment_check(const std::vector<OrbitRecord>& records, double kappa,
                          bool use_proxy = false, std::uint64_t seed = 11);

struct EscapeReport {
    std::vector<int> T_values;
    std::vector<double> fraction;            // P(z_n >= e^{alpha n} z_0 for all n in [T, horizon])
    double fraction_never_below_V0 = -1.0;   // only when V0 > 0 was passed
    int horizon = 0;
    int n_orbits = 0;
};
EscapeReport escape_fraction(const std::vector<OrbitRecord>& records, double alpha,
                             const std::vector<int>& T_values, int horizon, double V0 = -1.0);

// least-squares fit of y against x; returns slope, intercept, r^2
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    int n = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fermi
