#pragma once

#include <cstdint>

#include "fermi/charts.hpp"
#include "fermi/params.hpp"

namespace fermi {

enum class MapId { U12, U21, Ll12, Ls12, Ll21, Ls21 };
enum class CorrectionOrder { G_only, G_plus_H };

const char* map_id_name(MapId id);

enum class RegionTag { U_en, L_en_long, L_en_short, L_ex_long, L_ex_short };

const char* region_tag_name(RegionTag tag);

struct RegionInfo {
    RegionTag tag;
    long long m = 0;       // connected-component index
    double u = 0.0;        // classifier value in [0, 2)
    bool ambiguous = false;  // within 10/energy of a region boundary
    int sign_class = +1;   // -1 on decelerating components entirely above V*
};

struct ModifiedSystemConfig {
    double V_star = 1000.0;
    double V_0 = 10000.0;
    double ell = 0.99;
    void validate(double f1, double f2) const;
};

struct RouteRecord {
    bool lower = false;          // +1 itinerary symbol iff lower route
    RegionTag entry_tag{};
    RegionTag exit_tag{};        // meaningful on the lower route
    bool forced = false;         // modified system replaced the entry map
    bool ambiguous = false;      // any classification was near a boundary
    int itinerary() const { return lower ? +1 : -1; }
    const char* label() const;   // "U", "LlLl", "LlLs", "LsLl", "LsLs"
};

// {coef*energy - offset} mod 2, with the product split into exact high/low
// parts so the fractional value survives energies far above 2^26.
double classifier_value(double coef, double energy, double offset);
// component index: floor((coef*energy - offset)/2)
long long classifier_component(double coef, double energy, double offset);

// The half-revolution normal forms between the singular strips, their
// composition over a revolution, and the modified system that forces the
// accelerating route below V_0.
class NormalFormMaps {
public:
    NormalFormMaps(const ModelParams& params, const NormalFormConstants& consts);

    // R1 or R2minus points only; R2plus offers no choice of route.
    RegionInfo classify(const StripPoint& sp, double V_star) const;

    // One half revolution. check_region validates that the classifier agrees
    // with the requested map (skipped for forced applications).
    StripPoint apply_half(MapId id, const StripPoint& sp, CorrectionOrder order,
                          bool check_region = true) const;

    // Full revolution of the return map on R1 (entry then exit half).
    std::pair<StripPoint, RouteRecord> apply_revolution(const StripPoint& sp,
                                                        CorrectionOrder order,
                                                        double V_star) const;

    // Same, with upper-route entries on components entirely below V_0
    // replaced by the linear lower-route entry.
    std::pair<StripPoint, RouteRecord> apply_revolution_modified(
        const StripPoint& sp, CorrectionOrder order, const ModifiedSystemConfig& cfg) const;

    // The replacement entry of the modified system: the linear short-entry
    // formula continued across U_en with the phase folded back into [0,2).
    StripPoint apply_entry_forced(const StripPoint& sp) const;

    // Smallest energy of the component of U_en with index m / largest energy.
    double uen_component_min_energy(long long m) const;
    double uen_component_max_energy(long long m) const;

    const ModelParams& params() const { return *p_; }
    const NormalFormConstants& consts() const { return c_; }

    // classifier coefficient by strip: LT on R1, LTb on R2+, MZb on R2-
    double classifier_coef(Strip strip) const;

private:
    const ModelParams* p_;
    NormalFormConstants c_;
    // First-order correction coefficients actually applied by the maps;
    // validated against the exact simulator (a few displayed labels carry
    // typos, see the README notes on the corrections).
    double h12u_quad_ = 0, h12u_const_ = 0;  // upper entry, in (tau-1), over energy
    double h21u_quad_ = 0, h21u_const_ = 0;  // upper return, in (sigma-1)
    double h12l_quad_ = 0, h12l_const_ = 0;  // both lower entries, in (rho-1)
    double h21l_quad_ = 0, h21l_const_ = 0;  // both lower exits, in the wrapped phase
};

struct EnvelopeReport {
    struct PerMap {
        double D_fit = 0.0;          // smallest |second - slope*energy| envelope
        double slope = 0.0;          // f2, 1/f1, 1-f2 or 1/(1-f1)
        int holdout_violations = 0;  // fitted envelope exceeded on fresh half
        double max_abs_dev_holdout = 0.0;
        int n = 0;
    };
    PerMap lower_entry, lower_exit, upper_entry, upper_exit;
    // multiplicative revolution bounds at the configured ell
    int ratio_violations = 0;
    double min_ratio_lower = 0.0, max_ratio_lower = 0.0;
    double min_ratio_upper = 0.0, max_ratio_upper = 0.0;
};

EnvelopeReport energy_bound_report(const NormalFormMaps& maps, int n_samples,
                                   double energy_lo, double energy_hi,
                                   const ModifiedSystemConfig& cfg, std::uint64_t seed);

}  // namespace fermi
