#pragma once

#include <array>
#include <cstdint>

#include "fermi/billiard.hpp"
#include "fermi/charts.hpp"
#include "fermi/maps.hpp"
#include "fermi/stats.hpp"

namespace fermi {

// Exact-simulator check of the half-revolution normal forms: sampled R1
// points are run through the billiard, transported by the charts, and
// compared against G (+H) map images, per energy level.
struct NormalFormErrorTable {
    std::vector<double> levels;
    // [map][level]: max over samples of max(|err_first|, |err_second|)
    std::array<std::vector<double>, 6> max_err{};
    std::array<std::vector<long>, 6> n_samples{};
    std::array<LineFit, 6> slope{};  // log max_err vs log level
    LineFit overall;                 // pooled over maps
    long route_agree = 0, route_total = 0, route_ambiguous = 0;
};

NormalFormErrorTable validate_normal_forms(const NormalFormMaps& maps, const ChartSet& charts,
                                           const Billiard& billiard,
                                           const std::vector<double>& levels, int n_per_level,
                                           CorrectionOrder order, std::uint64_t seed,
                                           int threads);

// Smallest energy in a doubling scan where the measured relative error of the
// normal forms drops below rel_target.
double calibrate_v_star(const NormalFormMaps& maps, const ChartSet& charts,
                        const Billiard& billiard, double rel_target, int n_per_level,
                        std::uint64_t seed, int threads);

}  // namespace fermi
