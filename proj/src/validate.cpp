#include "fermi/validate.hpp"

#include <algorithm>
#include <cmath>

#include "fermi/parallel.hpp"
#include "fermi/rng.hpp"

namespace fermi {

namespace {

int map_index(MapId id) { return static_cast<int>(id); }

struct SampleResult {
    // entry and exit comparisons, -1 when skipped
    int entry_map = -1, exit_map = -1;
    double entry_err = 0.0, exit_err = 0.0;
    int route_state = 0;  // 0 skipped/ambiguous, 1 agree, 2 disagree
};

}  // namespace

NormalFormErrorTable validate_normal_forms(const NormalFormMaps& maps, const ChartSet& charts,
                                           const Billiard& billiard,
                                           const std::vector<double>& levels, int n_per_level,
                                           CorrectionOrder order, std::uint64_t seed,
                                           int threads) {
    NormalFormErrorTable table;
    table.levels = levels;
    for (int m = 0; m < 6; ++m) {
        table.max_err[m].assign(levels.size(), 0.0);
        table.n_samples[m].assign(levels.size(), 0);
    }

    for (std::size_t li = 0; li < levels.size(); ++li) {
        const double level = levels[li];
        std::vector<SampleResult> slots(static_cast<std::size_t>(n_per_level));
        parallel_for(slots.size(), threads, [&](std::size_t i) {
            SampleResult& out = slots[i];
            CounterRng rng(seed + li, i);
            StripPoint p{Strip::R1, rng.uniform(0.0, 2.0),
                         level * rng.uniform(0.95, 1.05)};
            RegionInfo info;
            try {
                info = maps.classify(p, 0.0);
            } catch (const DomainError&) {
                return;
            }
            if (info.ambiguous) return;

            try {
                auto [t0, v0] = charts.strip_to_tv(p);
                HalfRecord h1 = billiard.first_slit_after_entry(t0, v0);
                if (!h1.valid) return;

                // entry label must match the classifier for a clean comparison
                MapId entry_id;
                bool label_ok;
                if (info.tag == RegionTag::U_en) {
                    entry_id = MapId::U12;
                    label_ok = h1.chamber == Chamber::upper_left;
                } else if (info.tag == RegionTag::L_en_long) {
                    entry_id = MapId::Ll12;
                    label_ok = h1.chamber == Chamber::lower_left && h1.entered_long;
                } else {
                    entry_id = MapId::Ls12;
                    label_ok = h1.chamber == Chamber::lower_left && !h1.entered_long;
                }
                const bool upper = h1.chamber == Chamber::upper_left;
                StripPoint mid_exact = charts.tv_to_strip(
                    h1.t, h1.v, upper ? Strip::R2plus : Strip::R2minus);

                if (label_ok) {
                    StripPoint mid_nf = maps.apply_half(entry_id, p, order, false);
                    out.entry_map = map_index(entry_id);
                    out.entry_err = std::max(std::abs(mid_nf.first - mid_exact.first),
                                             std::abs(mid_nf.second - mid_exact.second));
                }

                // exit comparison from the exact mid point
                HalfRecord h2 = billiard.first_floor_after_exit(h1.t, h1.v);
                if (!h2.valid) return;
                StripPoint out_exact = charts.tv_to_strip(h2.t, h2.v, Strip::R1);
                MapId exit_id;
                bool exit_ok = true;
                if (upper) {
                    exit_id = MapId::U21;
                    // skip points close to the wrap of the return phase; the
                    // map components split there just like the labeled regions
                    const double x = classifier_value(maps.params().LTb, mid_exact.second,
                                                      mid_exact.first);
                    if (std::min(x, 2.0 - x) < 10.0 / mid_exact.second) exit_ok = false;
                } else {
                    RegionInfo exit_info = maps.classify(mid_exact, 0.0);
                    if (exit_info.ambiguous) exit_ok = false;
                    exit_id = h2.exited_long ? MapId::Ll21 : MapId::Ls21;
                    const MapId classified =
                        exit_info.tag == RegionTag::L_ex_long ? MapId::Ll21 : MapId::Ls21;
                    if (classified != exit_id) exit_ok = false;
                }
                if (exit_ok) {
                    StripPoint out_nf = maps.apply_half(exit_id, mid_exact, order, false);
                    out.exit_map = map_index(exit_id);
                    out.exit_err = std::max(std::abs(out_nf.first - out_exact.first),
                                            std::abs(out_nf.second - out_exact.second));
                }

                // route agreement of the composed revolution
                auto [q, rec] = maps.apply_revolution(p, order, 0.0);
                (void)q;
                RevolutionRecord rr = billiard.revolution(t0, v0);
                const char* exact_label;
                switch (rr.route) {
                    case RouteKind::upper: exact_label = "U"; break;
                    case RouteKind::lower_long_long: exact_label = "LlLl"; break;
                    case RouteKind::lower_long_short: exact_label = "LlLs"; break;
                    case RouteKind::lower_short_long: exact_label = "LsLl"; break;
                    case RouteKind::lower_short_short: exact_label = "LsLs"; break;
                    default: exact_label = "?"; break;
                }
                if (rec.ambiguous)
                    out.route_state = 0;
                else
                    out.route_state = std::string(rec.label()) == exact_label ? 1 : 2;
            } catch (const OrbitAborted&) {
            } catch (const NumericalError&) {
            } catch (const DomainError&) {
            }
        });

        for (const SampleResult& s : slots) {
            if (s.entry_map >= 0) {
                table.max_err[s.entry_map][li] =
                    std::max(table.max_err[s.entry_map][li], s.entry_err);
                table.n_samples[s.entry_map][li]++;
            }
            if (s.exit_map >= 0) {
                table.max_err[s.exit_map][li] =
                    std::max(table.max_err[s.exit_map][li], s.exit_err);
                table.n_samples[s.exit_map][li]++;
            }
            if (s.route_state == 1) {
                table.route_agree++;
                table.route_total++;
            } else if (s.route_state == 2) {
                table.route_total++;
            } else {
                table.route_ambiguous++;
            }
        }
    }

    // log-log slope fits
    std::vector<double> pooled_x, pooled_y;
    for (int m = 0; m < 6; ++m) {
        std::vector<double> xs, ys;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            if (table.max_err[m][li] > 0.0) {
                xs.push_back(std::log(levels[li]));
                ys.push_back(std::log(table.max_err[m][li]));
            }
        }
        table.slope[m] = fit_line(xs, ys);
        pooled_x.insert(pooled_x.end(), xs.begin(), xs.end());
        pooled_y.insert(pooled_y.end(), ys.begin(), ys.end());
    }
    table.overall = fit_line(pooled_x, pooled_y);
    return table;
}

double calibrate_v_star(const NormalFormMaps& maps, const ChartSet& charts,
                        const Billiard& billiard, double rel_target, int n_per_level,
                        std::uint64_t seed, int threads) {
    // error measured against the O(1) width of the strips; both coordinates
    // live on scales of order 2
    for (double level = 125.0; level <= 64000.0; level *= 2.0) {
        NormalFormErrorTable t = validate_normal_forms(maps, charts, billiard, {level},
                                                       n_per_level, CorrectionOrder::G_plus_H,
                                                       seed, threads);
        double worst = 0.0;
        for (int m = 0; m < 6; ++m) worst = std::max(worst, t.max_err[m][0]);
        if (worst / 2.0 < rel_target) return level;
    }
    throw NumericalError("calibration found no level meeting the error target");
}

}  // namespace fermi
