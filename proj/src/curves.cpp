#include "fermi/curves.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fermi/rng.hpp"

namespace fermi {

double UnstableCurve::length() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        s += std::hypot(v[i + 1].first - v[i].first, v[i + 1].second - v[i].second);
    return s;
}

double UnstableCurve::min_energy() const {
    double e = 1e300;
    for (const CurveVertex& x : v) e = std::min(e, x.second);
    return e;
}

UnstableCurve make_vertical_curve(Strip strip, double first, double energy_lo,
                                  double energy_hi, int n_vertices) {
    UnstableCurve c;
    c.strip = strip;
    for (int i = 0; i < n_vertices; ++i) {
        const double s = static_cast<double>(i) / (n_vertices - 1);
        const double e = energy_lo + s * (energy_hi - energy_lo);
        c.v.push_back({first, e, e - energy_lo});
    }
    return c;
}

namespace {

std::vector<double> strip_boundaries(Strip strip, const ModelParams& p) {
    switch (strip) {
        case Strip::R1: return {0.0, p.f2, 2.0 - p.f2};
        case Strip::R2minus: return {0.0, 1.0};
        default: return {0.0};
    }
}

// interpolate a vertex at parameter s within segment [a, b]
CurveVertex lerp_vertex(const CurveVertex& a, const CurveVertex& b, double s) {
    return {a.first + s * (b.first - a.first), a.second + s * (b.second - a.second),
            a.mu + s * (b.mu - a.mu)};
}

}  // namespace

std::vector<UnstableCurve> CurvePusher::cut(const UnstableCurve& c) const {
    const ModelParams& p = maps_->params();
    const double coef = maps_->classifier_coef(c.strip);
    const std::vector<double> bounds = strip_boundaries(c.strip, p);

    std::vector<UnstableCurve> out;
    UnstableCurve cur;
    cur.strip = c.strip;
    cur.begin_on_boundary = c.begin_on_boundary;
    if (c.v.size() < 2) return {};
    cur.v.push_back(c.v.front());

    for (std::size_t i = 0; i + 1 < c.v.size(); ++i) {
        const CurveVertex& a = c.v[i];
        const CurveVertex& b = c.v[i + 1];
        const double ua = classifier_value(coef, a.second, a.first);
        const double dF = coef * (b.second - a.second) - (b.first - a.first);
        // boundary crossings of u(s) = ua + s*dF at values {bound + 2j}
        std::vector<double> cuts;
        if (std::abs(dF) > 1e-300) {
            for (double bnd : bounds) {
                const double j0 = std::floor((std::min(ua, ua + dF) - bnd) / 2.0);
                const double j1 = std::ceil((std::max(ua, ua + dF) - bnd) / 2.0);
                for (double j = j0; j <= j1; ++j) {
                    const double s = (bnd + 2.0 * j - ua) / dF;
                    if (s > 1e-12 && s < 1.0 - 1e-12) cuts.push_back(s);
                }
            }
        }
        std::sort(cuts.begin(), cuts.end());
        for (double s : cuts) {
            CurveVertex cv = lerp_vertex(a, b, s);
            cur.v.push_back(cv);
            cur.end_on_boundary = true;
            if (cur.measure() > opt_.min_piece_measure) out.push_back(cur);
            cur = UnstableCurve{};
            cur.strip = c.strip;
            cur.begin_on_boundary = true;
            cur.v.push_back(cv);
        }
        cur.v.push_back(b);
    }
    cur.end_on_boundary = c.end_on_boundary;
    if (cur.measure() > opt_.min_piece_measure) out.push_back(cur);
    return out;
}

UnstableCurve CurvePusher::map_piece(const UnstableCurve& piece, const PointMap& fn) const {
    UnstableCurve img;
    img.begin_on_boundary = piece.begin_on_boundary;
    img.end_on_boundary = piece.end_on_boundary;

    struct Node {
        CurveVertex pre;
        StripPoint post;
    };
    auto eval = [&](const CurveVertex& pre) -> Node {
        StripPoint sp = fn(StripPoint{piece.strip, pre.first, pre.second});
        return {pre, sp};
    };

    std::vector<Node> chain;
    chain.reserve(piece.v.size());
    for (const CurveVertex& cv : piece.v) chain.push_back(eval(cv));
    img.strip = chain.front().post.strip;

    // midpoint refinement against the chord, bounded segment length
    std::vector<Node> refined;
    refined.push_back(chain.front());
    std::size_t budget = opt_.max_vertices;
    std::function<void(const Node&, const Node&, int)> refine =
        [&](const Node& A, const Node& B, int depth) {
            const double dx = B.post.first - A.post.first;
            const double dy = B.post.second - A.post.second;
            const double seg = std::hypot(dx, dy);
            bool split = seg > opt_.max_seg;
            if (!split && depth < 40) {
                Node M = eval(lerp_vertex(A.pre, B.pre, 0.5));
                const double mx = 0.5 * (A.post.first + B.post.first);
                const double my = 0.5 * (A.post.second + B.post.second);
                const double dev = std::hypot(M.post.first - mx, M.post.second - my);
                if (dev > opt_.chord_tol * (1.0 + seg)) {
                    if (std::abs(B.pre.mu - A.pre.mu) < 1e-14) {
                        // unresolvable discontinuity; keep the chord
                        refined.push_back(B);
                        return;
                    }
                    refine(A, M, depth + 1);
                    refine(M, B, depth + 1);
                    return;
                }
                refined.push_back(B);
                return;
            }
            if (split && depth < 40 && refined.size() < budget) {
                Node M = eval(lerp_vertex(A.pre, B.pre, 0.5));
                refine(A, M, depth + 1);
                refine(M, B, depth + 1);
                return;
            }
            if (refined.size() >= budget)
                throw RefinementOverflow("curve refinement exceeded the vertex budget");
            refined.push_back(B);
        };
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) refine(chain[i], chain[i + 1], 0);

    img.v.reserve(refined.size());
    for (const Node& n : refined)
        img.v.push_back({n.post.first, n.post.second, n.pre.mu});

    if (opt_.cone) {
        for (std::size_t i = 0; i + 1 < img.v.size(); ++i) {
            Vec2 d{img.v[i + 1].first - img.v[i].first,
                   img.v[i + 1].second - img.v[i].second};
            if (d.norm() == 0.0) continue;
            if (!opt_.cone->contains(d, 1e-9))
                throw ConeViolation("image segment slope left the unstable cone near first=" +
                                    std::to_string(img.v[i].first) +
                                    " energy=" + std::to_string(img.v[i].second));
        }
    }
    return img;
}

std::vector<UnstableCurve> CurvePusher::half_step(const std::vector<UnstableCurve>& pieces,
                                                  bool entry_stage) const {
    std::vector<UnstableCurve> out;
    for (const UnstableCurve& piece : pieces) {
        if (piece.v.size() < 2) continue;
        const CurveVertex mid = piece.v[piece.v.size() / 2];
        StripPoint probe{piece.strip, mid.first, mid.second};
        if (entry_stage) {
            RegionInfo info = maps_->classify(probe, 0.0);
            const bool forced = opt_.modified && info.tag == RegionTag::U_en &&
                                maps_->uen_component_max_energy(info.m) < opt_.mod.V_0;
            MapId id;
            if (forced) {
                out.push_back(map_piece(piece, [&](const StripPoint& sp) {
                    return maps_->apply_entry_forced(sp);
                }));
                continue;
            }
            switch (info.tag) {
                case RegionTag::U_en: id = MapId::U12; break;
                case RegionTag::L_en_long: id = MapId::Ll12; break;
                default: id = MapId::Ls12; break;
            }
            out.push_back(map_piece(piece, [&](const StripPoint& sp) {
                return maps_->apply_half(id, sp, opt_.order, false);
            }));
        } else {
            MapId id;
            if (piece.strip == Strip::R2plus) {
                id = MapId::U21;
            } else {
                RegionInfo info = maps_->classify(probe, 0.0);
                id = info.tag == RegionTag::L_ex_long ? MapId::Ll21 : MapId::Ls21;
            }
            out.push_back(map_piece(piece, [&](const StripPoint& sp) {
                return maps_->apply_half(id, sp, opt_.order, false);
            }));
        }
    }
    return out;
}

std::vector<UnstableCurve> CurvePusher::revolution(const UnstableCurve& c) const {
    std::vector<UnstableCurve> entry_pieces = cut(c);
    std::vector<UnstableCurve> mid = half_step(entry_pieces, true);
    std::vector<UnstableCurve> mid_pieces;
    for (const UnstableCurve& m : mid) {
        std::vector<UnstableCurve> cs = cut(m);
        mid_pieces.insert(mid_pieces.end(), cs.begin(), cs.end());
    }
    return half_step(mid_pieces, false);
}

std::vector<UnstableCurve> CurvePusher::revolution_exact(const UnstableCurve& c,
                                                         const Billiard& bil,
                                                         const ChartSet& charts) const {
    if (c.strip != Strip::R1) throw DomainError("exact revolution starts on R1");
    auto fn = [&](const StripPoint& sp) -> StripPoint {
        auto [t, v] = charts.strip_to_tv(sp);
        RevolutionRecord rec = bil.revolution(t, v);
        return charts.tv_to_strip(rec.t_out, rec.v_out, Strip::R1);
    };
    std::vector<UnstableCurve> out;
    for (const UnstableCurve& piece : cut(c)) {
        if (piece.v.size() < 2) continue;
        out.push_back(map_piece(piece, fn));
    }
    return out;
}

std::vector<UnstableCurve> CurvePusher::iterate(std::vector<UnstableCurve> cs,
                                                int n_revolutions) const {
    for (int k = 0; k < n_revolutions; ++k) {
        std::vector<UnstableCurve> next;
        for (const UnstableCurve& c : cs) {
            std::vector<UnstableCurve> imgs = revolution(c);
            next.insert(next.end(), imgs.begin(), imgs.end());
        }
        cs = std::move(next);
    }
    return cs;
}

double complexity_scale(const ModelParams& p, const ExpansionRates& rates) {
    const double g_r1 = std::min(p.f2, 2.0 - 2.0 * p.f2);
    const double L12U = rates.lambda_max[0];
    const double L12L = rates.lambda_max[2];
    double d = std::min({g_r1 / p.LT, 1.0 / (p.MZb * L12L), 2.0 / (p.LTb * L12U)});
    d = std::min(d, std::min(1.0 / L12U, 1.0 / L12L));
    return 0.8 * d;
}

ComplexityScan complexity_scan(const CurvePusher& pusher, double delta0, int trials,
                               double energy_lo, double energy_hi, std::uint64_t seed) {
    ComplexityScan scan;
    scan.trials = trials;
    for (int i = 0; i < trials; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const double len = rng.uniform(0.3 * delta0, delta0);
        const double e0 = rng.uniform(energy_lo, energy_hi);
        UnstableCurve c =
            make_vertical_curve(Strip::R1, rng.uniform(0.0, 2.0), e0, e0 + len, 7);
        const int pieces = static_cast<int>(pusher.revolution(c).size());
        if (pieces >= static_cast<int>(scan.histogram.size()))
            scan.histogram.resize(pieces + 1, 0);
        scan.histogram[pieces]++;
        scan.max_pieces = std::max(scan.max_pieces, pieces);
    }
    return scan;
}

double distortion_estimate(const CurvePusher& pusher, const UnstableCurve& curve, int n) {
    std::vector<UnstableCurve> imgs = pusher.iterate({curve}, n);
    double K = 1.0;
    for (const UnstableCurve& c : imgs) {
        double rmin = 1e300, rmax = 0.0;
        for (std::size_t i = 0; i + 1 < c.v.size(); ++i) {
            const double dmu = c.v[i + 1].mu - c.v[i].mu;
            if (dmu < 1e-13) continue;
            const double dl = std::hypot(c.v[i + 1].first - c.v[i].first,
                                         c.v[i + 1].second - c.v[i].second);
            const double r = dl / dmu;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        if (rmax > 0.0 && rmin < 1e300) K = std::max(K, rmax / rmin);
    }
    return K;
}

RouteProportions route_proportions(const NormalFormMaps& maps, const UnstableCurve& curve,
                                   double V_star) {
    CurveOptions opt;
    opt.modified = false;
    CurvePusher pusher(maps, opt);
    RouteProportions rp;
    double total = 0.0;
    for (const UnstableCurve& piece : pusher.cut(curve)) {
        const CurveVertex mid = piece.v[piece.v.size() / 2];
        RegionInfo info = maps.classify({Strip::R1, mid.first, mid.second}, V_star);
        const double m = piece.measure();
        total += m;
        if (info.tag == RegionTag::U_en) {
            rp.frac_enter_upper += m;
            if (info.sign_class < 0)
                rp.frac_decelerating += m;
            else
                rp.frac_accelerating += m;
        } else {
            rp.frac_enter_lower += m;
            rp.frac_accelerating += m;
        }
        rp.components_spanned++;
    }
    if (total > 0.0) {
        rp.frac_accelerating /= total;
        rp.frac_decelerating /= total;
        rp.frac_enter_lower /= total;
        rp.frac_enter_upper /= total;
    }
    rp.wide_uncertainty = rp.components_spanned < 10;
    return rp;
}

GrowthConstants derive_growth_constants(const ModelParams& params,
                                        const ExpansionRates& rates, double kappa1_meas,
                                        double K_meas) {
    GrowthConstants g;
    g.delta0 = complexity_scale(params, rates);
    g.kappa1 = kappa1_meas;
    g.K_dist = K_meas;
    g.lambda_min = rates.lambda_F;
    g.theta1 = g.kappa1 * K_meas * K_meas / g.lambda_min;
    if (g.theta1 >= 1.0)
        throw DomainError("theta1 >= 1: expansion too weak for the growth analysis");
    g.C2 = 2.0 * K_meas * K_meas / (g.delta0 * (1.0 - g.theta1));
    g.C3 = 1.0 + g.C2;
    g.theta2 = std::sqrt(g.theta1);
    g.b1 = 1.0;
    g.eps0 = g.theta1;
    g.theta3 = g.theta2 * (1.0 + g.C3 * K_meas * g.b1);
    return g;
}

TailFit fit_geometric_tail(const std::vector<double>& m) {
    TailFit fit;
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < m.size(); ++n) {
        if (m[n] > 0.0) {
            xs.push_back(static_cast<double>(n + 1));
            ys.push_back(std::log(m[n]));
        }
    }
    fit.points_used = static_cast<int>(xs.size());
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    const double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
    const double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    fit.ratio = std::exp(slope);
    fit.amplitude = std::exp(intercept);
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = intercept + slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

// chop a curve that grew past theta1 into long pieces
std::vector<UnstableCurve> chop_to_long(const UnstableCurve& c, double theta1) {
    const double len = c.length();
    const int k = std::max(1, static_cast<int>(std::ceil(len / theta1)));
    if (k == 1) return {c};
    std::vector<UnstableCurve> out;
    // split at vertex indices closest to equal arclength
    std::vector<double> acc(c.v.size(), 0.0);
    for (std::size_t i = 1; i < c.v.size(); ++i)
        acc[i] = acc[i - 1] + std::hypot(c.v[i].first - c.v[i - 1].first,
                                         c.v[i].second - c.v[i - 1].second);
    std::size_t start = 0;
    for (int piece = 1; piece <= k; ++piece) {
        const double target = len * piece / k;
        std::size_t end = start + 1;
        while (end + 1 < c.v.size() && acc[end] < target) ++end;
        if (piece == k) end = c.v.size() - 1;
        UnstableCurve part;
        part.strip = c.strip;
        part.v.assign(c.v.begin() + start, c.v.begin() + end + 1);
        if (part.v.size() >= 2) out.push_back(std::move(part));
        start = end;
    }
    return out;
}

struct WeightedCurve {
    UnstableCurve c;
    double weight;
    double t_acc;
};

}  // namespace

GrowthTailReport growth_statistics(const CurvePusher& pusher,
                                   const std::vector<UnstableCurve>& long_curves,
                                   double theta1, int N0, int horizon, int n_renewals,
                                   std::uint64_t seed) {
    GrowthTailReport rep;
    rep.theta1 = theta1;
    rep.first_hit.assign(horizon, 0.0);
    rep.delayed.assign(horizon, 0.0);

    double total = 0.0;
    for (const UnstableCurve& g : long_curves) total += g.measure();
    if (total <= 0.0) return rep;

    // first-hit distribution: push, harvest components that reached theta1/2
    auto harvest_run = [&](const UnstableCurve& gamma, int delay_start,
                           std::vector<double>& hist,
                           std::vector<UnstableCurve>* harvested) {
        std::vector<UnstableCurve> active = {gamma};
        for (int d = 0; d < delay_start; ++d) active = pusher.iterate(std::move(active), 1);
        for (int n = delay_start + 1; n <= horizon && !active.empty(); ++n) {
            std::vector<UnstableCurve> next;
            for (const UnstableCurve& c : active) {
                for (UnstableCurve& img : pusher.revolution(c)) {
                    if (img.length() >= theta1 / 2.0) {
                        hist[n - delay_start - 1] += img.measure();
                        if (harvested) harvested->push_back(img);
                    } else if (img.measure() > 1e-10 * gamma.measure()) {
                        next.push_back(std::move(img));
                    } else {
                        rep.unresolved_measure += img.measure();
                    }
                }
            }
            active = std::move(next);
        }
        for (const UnstableCurve& c : active) rep.unresolved_measure += c.measure();
    };

    for (const UnstableCurve& g : long_curves) {
        harvest_run(g, 0, rep.first_hit, nullptr);
        harvest_run(g, N0, rep.delayed, nullptr);
    }
    for (double& x : rep.first_hit) x /= total;
    for (double& x : rep.delayed) x /= total;
    rep.first_hit_fit = fit_geometric_tail(rep.first_hit);
    rep.delayed_fit = fit_geometric_tail(rep.delayed);

    // renewal sums: particle population with measure-weighted resampling
    const std::size_t max_particles = 256;
    std::vector<WeightedCurve> pop;
    for (const UnstableCurve& g : long_curves) pop.push_back({g, g.measure(), 0.0});
    CounterRng rng(seed, 0xabcdef);
    for (int k = 1; k <= n_renewals; ++k) {
        std::vector<WeightedCurve> grown;
        for (const WeightedCurve& wc : pop) {
            const double m0 = wc.c.measure();
            std::vector<UnstableCurve> active = {wc.c};
            for (int d = 0; d < N0; ++d) active = pusher.iterate(std::move(active), 1);
            for (int n = N0 + 1; n <= horizon && !active.empty(); ++n) {
                std::vector<UnstableCurve> next;
                for (const UnstableCurve& c : active) {
                    for (UnstableCurve& img : pusher.revolution(c)) {
                        if (img.length() >= theta1 / 2.0) {
                            for (UnstableCurve& piece : chop_to_long(img, theta1)) {
                                const double w =
                                    wc.weight * piece.measure() / std::max(m0, 1e-300);
                                grown.push_back({std::move(piece), w,
                                                 wc.t_acc + static_cast<double>(n)});
                            }
                        } else if (img.measure() > 1e-10 * m0) {
                            next.push_back(std::move(img));
                        }
                    }
                }
                active = std::move(next);
            }
        }
        if (grown.empty()) break;
        // weighted 99th percentile of t_acc / k
        std::sort(grown.begin(), grown.end(),
                  [](const WeightedCurve& a, const WeightedCurve& b) {
                      return a.t_acc < b.t_acc;
                  });
        double wsum = 0.0;
        for (const WeightedCurve& wc : grown) wsum += wc.weight;
        double acc = 0.0, q99 = grown.back().t_acc;
        for (const WeightedCurve& wc : grown) {
            acc += wc.weight;
            if (acc >= 0.99 * wsum) {
                q99 = wc.t_acc;
                break;
            }
        }
        rep.nhat_q99_over_k.push_back(q99 / k);

        // systematic resampling down to max_particles
        if (grown.size() > max_particles) {
            std::vector<WeightedCurve> res;
            const double step = wsum / max_particles;
            double u = rng.uniform(0.0, step);
            double cum = 0.0;
            std::size_t idx = 0;
            for (std::size_t i = 0; i < max_particles; ++i) {
                const double target = u + step * i;
                while (idx + 1 < grown.size() && cum + grown[idx].weight < target) {
                    cum += grown[idx].weight;
                    ++idx;
                }
                WeightedCurve pick = grown[idx];
                pick.weight = step;
                res.push_back(std::move(pick));
            }
            pop = std::move(res);
        } else {
            pop = std::move(grown);
        }
    }
    if (!rep.nhat_q99_over_k.empty()) rep.a_hat = rep.nhat_q99_over_k.back();
    return rep;
}

}  // namespace fermi
