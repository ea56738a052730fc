#include "fermi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fermi/parallel.hpp"
#include "fermi/rng.hpp"

namespace fermi {

void EnsembleConfig::validate() const {
    if (n_orbits <= 0 || horizon <= 0) throw DomainError("ensemble needs orbits and horizon");
    if (!(v_lo > 0.0 && v_hi >= v_lo)) throw DomainError("bad initial energy window");
    if (track_stopping_time && N0 >= horizon)
        throw DomainError("stopping-time tracking needs horizon > N0");
}

namespace {

// Tracks the component of a co-evolving curve that contains the orbit, kept
// cropped to a window around it; long-curve detection uses the uncropped
// component length.
class StoppingTimeTracker {
public:
    StoppingTimeTracker(const CurvePusher& pusher, double theta1, double sigma0, double z0)
        : pusher_(&pusher), theta1_(theta1) {
        const double l0 = theta1 / 100.0;
        curve_ = make_vertical_curve(Strip::R1, sigma0, z0 - l0 / 2.0, z0 + l0 / 2.0, 5);
        mu_star_ = curve_.measure() / 2.0;
    }

    // advances one revolution; returns the uncropped length of the component
    // containing the tracked point (or -1 when tracking got lost)
    double step() {
        if (lost_) return -1.0;
        std::vector<UnstableCurve> imgs;
        try {
            imgs = pusher_->revolution(curve_);
        } catch (const std::runtime_error&) {
            lost_ = true;
            return -1.0;
        }
        for (UnstableCurve& c : imgs) {
            if (c.v.front().mu <= mu_star_ && mu_star_ <= c.v.back().mu) {
                const double len = c.length();
                crop(c);
                curve_ = std::move(c);
                return len;
            }
        }
        lost_ = true;
        return -1.0;
    }

    bool lost() const { return lost_; }

private:
    const CurvePusher* pusher_;
    double theta1_;
    UnstableCurve curve_;
    double mu_star_ = 0.0;
    bool lost_ = false;

    void crop(UnstableCurve& c) {
        const double window = 3.0 * theta1_;
        if (c.length() <= window) return;
        // arclength position of the tracked point
        std::vector<double> acc(c.v.size(), 0.0);
        std::size_t at = 0;
        for (std::size_t i = 1; i < c.v.size(); ++i) {
            acc[i] = acc[i - 1] + std::hypot(c.v[i].first - c.v[i - 1].first,
                                             c.v[i].second - c.v[i - 1].second);
            if (c.v[i - 1].mu <= mu_star_ && mu_star_ <= c.v[i].mu) at = i - 1;
        }
        const double s_star = acc[at];
        const double lo = s_star - window / 2.0, hi = s_star + window / 2.0;
        UnstableCurve out;
        out.strip = c.strip;
        for (std::size_t i = 0; i < c.v.size(); ++i)
            if (acc[i] >= lo && acc[i] <= hi) out.v.push_back(c.v[i]);
        if (out.v.size() >= 2) c = std::move(out);
    }
};

}  // namespace

std::vector<OrbitRecord> run_ensemble(const EnsembleConfig& cfg, const NormalFormMaps& maps,
                                      const ModifiedSystemConfig& mod,
                                      const Billiard* billiard, const ChartSet* charts) {
    cfg.validate();
    if (cfg.dynamics == DynamicsKind::exact && (!billiard || !charts))
        throw DomainError("exact dynamics needs the billiard and charts");
    const double z_floor = cfg.z_floor >= 0.0 ? cfg.z_floor : mod.V_star;

    std::vector<OrbitRecord> out(static_cast<std::size_t>(cfg.n_orbits));

    CurveOptions copt;
    copt.modified = cfg.dynamics == DynamicsKind::modified_P0;
    copt.mod = mod;
    CurvePusher pusher(maps, copt);

    parallel_for(static_cast<std::size_t>(cfg.n_orbits), cfg.threads, [&](std::size_t i) {
        CounterRng rng(cfg.seed, i);
        OrbitRecord& rec = out[i];
        rec.sigma0 = cfg.init == InitKind::rect ? rng.uniform(0.0, 2.0) : cfg.curve_sigma;
        rec.z0 = rng.uniform(cfg.v_lo, cfg.v_hi);
        rec.log_energy.reserve(cfg.horizon + 1);
        rec.log_energy.push_back(std::log(rec.z0));

        StripPoint p{Strip::R1, rec.sigma0, rec.z0};
        double t = 0.0, v = 0.0;
        if (cfg.dynamics == DynamicsKind::exact) {
            auto tv = charts->strip_to_tv(p);
            t = tv.first;
            v = tv.second;
        }

        StoppingTimeTracker* tracker = nullptr;
        StoppingTimeTracker tracker_store(pusher, cfg.theta1, rec.sigma0, rec.z0);
        Vec2 tangent{0.0, 1.0};
        double log_stretch = 0.0;
        const double target_stretch = std::log(100.0);  // theta1 / (theta1/100)
        if (cfg.track_stopping_time) tracker = &tracker_store;

        for (int n = 1; n <= cfg.horizon; ++n) {
            double z_next;
            int symbol;
            try {
                if (cfg.dynamics == DynamicsKind::exact) {
                    RevolutionRecord rr = billiard->revolution(t, v);
                    t = rr.t_out;
                    v = rr.v_out;
                    z_next = v / 2.0;
                    symbol = rr.route == RouteKind::upper ? -1 : +1;
                } else {
                    std::pair<StripPoint, RouteRecord> r =
                        cfg.dynamics == DynamicsKind::modified_P0
                            ? maps.apply_revolution_modified(p, CorrectionOrder::G_plus_H, mod)
                            : maps.apply_revolution(p, CorrectionOrder::G_plus_H, mod.V_star);
                    if (cfg.track_stopping_time && rec.nhat_proxy < 0) {
                        MapId entry = r.second.lower
                                          ? (r.second.entry_tag == RegionTag::L_en_long
                                                 ? MapId::Ll12
                                                 : MapId::Ls12)
                                          : MapId::U12;
                        MapId exit = r.second.lower
                                         ? (r.second.exit_tag == RegionTag::L_ex_long
                                                ? MapId::Ll21
                                                : MapId::Ls21)
                                         : MapId::U21;
                        Vec2 w = dg_matrix(entry, maps.params(), maps.consts()).apply(tangent);
                        w = dg_matrix(exit, maps.params(), maps.consts()).apply(w);
                        const double nw = w.norm();
                        log_stretch += std::log(nw);
                        tangent = {w.x / nw, w.y / nw};
                        if (n > cfg.N0 && log_stretch >= target_stretch) rec.nhat_proxy = n;
                    }
                    p = r.first;
                    z_next = p.second;
                    symbol = r.second.itinerary();
                }
            } catch (const OrbitAborted&) {
                rec.termination = Termination::aborted_edge;
                break;
            } catch (const DomainError&) {
                rec.termination = Termination::fell_below_threshold;
                break;
            }
            rec.itinerary.push_back(static_cast<signed char>(symbol));
            rec.log_energy.push_back(std::log(z_next));
            if (tracker && rec.nhat < 0) {
                const double len = tracker->step();
                if (n > cfg.N0 && len >= cfg.theta1 / 2.0) rec.nhat = n;
                if (tracker->lost() && rec.nhat < 0) rec.nhat = -2;
            }
            if (z_next < z_floor) {
                rec.termination = Termination::fell_below_threshold;
                break;
            }
        }
    });
    return out;
}

namespace {

std::pair<double, double> bootstrap_ci(const std::vector<double>& xs, std::uint64_t seed) {
    if (xs.empty()) return {0.0, 0.0};
    const int B = 1000;
    std::vector<double> means(B);
    for (int b = 0; b < B; ++b) {
        CounterRng rng(seed, static_cast<std::uint64_t>(b));
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            s += xs[static_cast<std::size_t>(rng.next_u64() % xs.size())];
        means[b] = s / static_cast<double>(xs.size());
    }
    std::sort(means.begin(), means.end());
    return {means[static_cast<std::size_t>(0.025 * B)],
            means[static_cast<std::size_t>(0.975 * B) - 1]};
}

}  // namespace

DriftReport drift_estimate(const std::vector<OrbitRecord>& records, int N0,
                           std::uint64_t seed) {
    DriftReport rep;
    rep.N0 = N0;
    std::vector<double> gains;
    for (const OrbitRecord& r : records) {
        if (static_cast<int>(r.log_energy.size()) > N0)
            gains.push_back((r.log_energy[N0] - r.log_energy[0]) / N0);
    }
    rep.n_used = static_cast<int>(gains.size());
    if (gains.empty()) throw NumericalError("drift_estimate: no completed records");
    rep.mean = std::accumulate(gains.begin(), gains.end(), 0.0) / gains.size();
    auto ci = bootstrap_ci(gains, seed);
    rep.ci_lo = ci.first;
    rep.ci_hi = ci.second;
    return rep;
}

WalkReport bernoulli_walk(double ell, double f1, double f2, int N, int n_walks,
                          std::uint64_t seed) {
    WalkReport rep;
    const double up = std::log(ell * f2 / f1);
    const double down = std::log(ell * (1.0 - f2) / (1.0 - f1));
    rep.mean_step_analytic = drift_rate(f1, f2) + std::log(ell);
    rep.final_log_gain.resize(n_walks);
    double acc = 0.0;
    for (int w = 0; w < n_walks; ++w) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w));
        double s = 0.0;
        for (int n = 0; n < N; ++n) s += rng.bernoulli(f2) ? up : down;
        rep.final_log_gain[w] = s;
        acc += s;
    }
    rep.empirical_mean_step = acc / (static_cast<double>(n_walks) * N);
    return rep;
}

WalkTailReport bernoulli_tail(double ell, double f1, double f2, int N, int n_walks, double r,
                              std::uint64_t seed) {
    WalkTailReport rep;
    rep.frac_below.assign(N + 1, 0.0);
    rep.envelope.assign(N + 1, 1.0);
    const double up = std::log(ell * f2 / f1);
    const double down = std::log(ell * (1.0 - f2) / (1.0 - f1));
    const double h = drift_rate(f1, f2) + std::log(ell);
    for (int w = 0; w < n_walks; ++w) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w));
        double s = 0.0;
        for (int n = 1; n <= N; ++n) {
            s += rng.bernoulli(f2) ? up : down;
            if (s < (h - r) * n) rep.frac_below[n] += 1.0;
        }
    }
    for (int n = 0; n <= N; ++n) {
        rep.frac_below[n] /= n_walks;
        rep.envelope[n] = hoeffding_envelope(n, r);
    }
    return rep;
}

ItineraryReport itinerary_stats(const std::vector<OrbitRecord>& records, int depth,
                                double f2, int burn_in) {
    if (depth < 1 || depth > 6) throw DomainError("itinerary depth must be in [1,6]");
    ItineraryReport rep;
    rep.depth = depth;
    const std::size_t n_patterns = std::size_t{1} << depth;
    rep.freq.assign(n_patterns, 0.0);
    rep.predicted.assign(n_patterns, 0.0);
    for (const OrbitRecord& r : records) {
        const int len = static_cast<int>(r.itinerary.size());
        for (int start = burn_in; start + depth <= len; ++start) {
            std::size_t idx = 0;
            for (int k = 0; k < depth; ++k)
                if (r.itinerary[start + k] > 0) idx |= std::size_t{1} << k;
            rep.freq[idx] += 1.0;
            rep.n_windows++;
        }
    }
    for (std::size_t idx = 0; idx < n_patterns; ++idx) {
        if (rep.n_windows > 0) rep.freq[idx] /= static_cast<double>(rep.n_windows);
        double q = 1.0;
        for (int k = 0; k < depth; ++k)
            q *= (idx >> k) & 1 ? f2 : 1.0 - f2;
        rep.predicted[idx] = q;
        rep.tv_distance += 0.5 * std::abs(rep.freq[idx] - q);
    }
    return rep;
}

MomentReport moment_check(const std::vector<OrbitRecord>& records, double kappa,
                          bool use_proxy, std::uint64_t seed) {
    MomentReport rep;
    rep.kappa = kappa;
    std::vector<double> vals;
    for (const OrbitRecord& r : records) {
        const int nh = use_proxy ? r.nhat_proxy : r.nhat;
        if (nh <= 0 || nh >= static_cast<int>(r.log_energy.size())) continue;
        const double delta = r.log_energy[nh] - r.log_energy[0];
        vals.push_back(std::exp(-kappa * delta));
    }
    rep.n_used = static_cast<int>(vals.size());
    if (vals.empty()) throw NumericalError("moment_check: no records carry a stopping time");
    rep.estimate = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    auto ci = bootstrap_ci(vals, seed);
    rep.ci_lo = ci.first;
    rep.ci_hi = ci.second;
    return rep;
}

EscapeReport escape_fraction(const std::vector<OrbitRecord>& records, double alpha,
                             const std::vector<int>& T_values, int horizon, double V0) {
    EscapeReport rep;
    rep.T_values = T_values;
    rep.horizon = horizon;
    rep.n_orbits = static_cast<int>(records.size());
    rep.fraction.assign(T_values.size(), 0.0);
    long never_below = 0;
    const double logV0 = V0 > 0.0 ? std::log(V0) : 0.0;
    for (const OrbitRecord& r : records) {
        const bool alive = static_cast<int>(r.log_energy.size()) > horizon &&
                           r.termination == Termination::completed;
        // last n in [1, horizon] violating ln z_n - ln z_0 >= alpha n
        int last_fail = alive ? 0 : horizon;
        if (alive) {
            for (int n = horizon; n >= 1; --n) {
                if (r.log_energy[n] - r.log_energy[0] < alpha * n) {
                    last_fail = n;
                    break;
                }
            }
        }
        for (std::size_t k = 0; k < T_values.size(); ++k)
            if (last_fail < T_values[k]) rep.fraction[k] += 1.0;
        if (V0 > 0.0 && alive) {
            bool ok = true;
            for (double le : r.log_energy)
                if (le < logV0) {
                    ok = false;
                    break;
                }
            if (ok) never_below++;
        }
    }
    for (double& f : rep.fraction) f /= std::max(1, rep.n_orbits);
    if (V0 > 0.0) rep.fraction_never_below_V0 =
        static_cast<double>(never_below) / std::max(1, rep.n_orbits);
    return rep;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.n = static_cast<int>(std::min(x.size(), y.size()));
    if (f.n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = f.n * sxx - sx * sx;
    if (denom == 0.0) return f;
    f.slope = (f.n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / f.n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / f.n;
    for (int i = 0; i < f.n; ++i) {
        const double pred = f.intercept + f.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace fermi
