#include "fermi/maps.hpp"

#include <cmath>

#include "fermi/rng.hpp"

namespace fermi {

const char* map_id_name(MapId id) {
    switch (id) {
        case MapId::U12: return "U12";
        case MapId::U21: return "U21";
        case MapId::Ll12: return "Ll12";
        case MapId::Ls12: return "Ls12";
        case MapId::Ll21: return "Ll21";
        default: return "Ls21";
    }
}

const char* region_tag_name(RegionTag tag) {
    switch (tag) {
        case RegionTag::U_en: return "U_en";
        case RegionTag::L_en_long: return "L_en_long";
        case RegionTag::L_en_short: return "L_en_short";
        case RegionTag::L_ex_long: return "L_ex_long";
        default: return "L_ex_short";
    }
}

const char* RouteRecord::label() const {
    if (!lower) return "U";
    const bool el = entry_tag == RegionTag::L_en_long;
    const bool xl = exit_tag == RegionTag::L_ex_long;
    return el ? (xl ? "LlLl" : "LlLs") : (xl ? "LsLl" : "LsLs");
}

void ModifiedSystemConfig::validate(double f1, double f2) const {
    if (!(V_0 > V_star && V_star >= 1.0))
        throw DomainError("need V_0 > V_star >= 1");
    if (!(ell > 0.0 && ell < 1.0)) throw DomainError("need ell in (0,1)");
    if (!(ell * f2 / f1 > 1.0))
        throw DomainError("need ell*f2/f1 > 1 (accelerating lower route)");
    if (!(ell * (1.0 - f2) / (1.0 - f1) < 1.0))
        throw DomainError("need ell*(1-f2)/(1-f1) < 1 (decelerating upper route)");
}

namespace {

// exact split of coef*energy into hi + lo
inline void two_product(double a, double b, double& hi, double& lo) {
    hi = a * b;
    lo = std::fma(a, b, -hi);
}

}  // namespace

double classifier_value(double coef, double energy, double offset) {
    double hi, lo;
    two_product(coef, energy, hi, lo);
    // fmod by 2 is exact for doubles; the compensation term re-enters after
    double r = std::fmod(hi, 2.0) - offset + lo;
    return reduce_mod2(r);
}

long long classifier_component(double coef, double energy, double offset) {
    double hi, lo;
    two_product(coef, energy, hi, lo);
    return static_cast<long long>(std::floor((hi - offset) / 2.0 + lo / 2.0));
}

NormalFormMaps::NormalFormMaps(const ModelParams& params, const NormalFormConstants& consts)
    : p_(&params), c_(consts) {
    // First-order corrections, checked against the exact simulator. The
    // quadratic coefficients follow the displayed formulas; two constant
    // terms and the long-entry correction are taken in the form the data
    // supports (the displayed versions mix up powers/labels).
    const GapLimits& l2m = p_->l_t2_minus;
    const GapLimits& l2p = p_->l_t2_plus;
    const GapLimits& l1m = p_->l_t1_minus;
    const GapLimits& l1p = p_->l_t1_plus;
    const GapLimits& m2p = p_->m_t2_plus;
    const GapLimits& m1m = p_->m_t1_minus;

    // quadratic terms as displayed; constants in the form the measurements
    // single out (the slit-side gap squared times its curvature)
    h12u_quad_ = c_.delta2_p;
    h12u_const_ = -(l2p.value * l2p.value / 24.0) * l2p.ddot;
    h21u_quad_ = c_.delta1_p;
    h21u_const_ = (l1m.value * l1m.value / 24.0) * l1m.ddot;

    // both lower entries share the short-entry display (the long-entry
    // display shifts every power of (rho-1) by one)
    h12l_quad_ = -m2p.value * m2p.value * m2p.ddot / 8.0;
    h12l_const_ = m2p.value * m2p.value * m2p.ddot / 24.0;

    // both lower exits reduce to one correction in the wrapped exit phase
    // (expanding the displayed long-exit terms cancels the linear part);
    // chi_l' + chi_l''/2 = -(1/24) m^2 m''
    h21l_quad_ = m1m.ddot / 8.0;
    h21l_const_ = -m1m.value * m1m.value * m1m.ddot / 24.0;
    (void)l1p;
    (void)l2m;
}

double NormalFormMaps::classifier_coef(Strip strip) const {
    switch (strip) {
        case Strip::R1: return p_->LT;
        case Strip::R2plus: return p_->LTb;
        default: return p_->MZb;
    }
}

RegionInfo NormalFormMaps::classify(const StripPoint& sp, double V_star) const {
    if (sp.strip == Strip::R2plus)
        throw DomainError("no route choice on R2+: the ball has to return");
    if (!(sp.second > V_star))
        throw DomainError("classification needs energy above V_star");
    RegionInfo info;
    const double f2 = p_->f2;
    const double eps = 10.0 / sp.second;
    if (sp.strip == Strip::R1) {
        info.u = classifier_value(p_->LT, sp.second, sp.first);
        info.m = classifier_component(p_->LT, sp.second, sp.first);
        if (info.u < f2)
            info.tag = RegionTag::L_en_short;
        else if (info.u <= 2.0 - f2)
            info.tag = RegionTag::U_en;
        else
            info.tag = RegionTag::L_en_long;
        info.ambiguous = std::min({std::abs(info.u - f2), std::abs(info.u - (2.0 - f2)),
                                   info.u, 2.0 - info.u}) < eps;
        info.sign_class =
            (info.tag == RegionTag::U_en && uen_component_min_energy(info.m) > V_star) ? -1
                                                                                       : +1;
    } else {
        info.u = classifier_value(p_->MZb, sp.second, sp.first);
        info.m = classifier_component(p_->MZb, sp.second, sp.first);
        info.tag = info.u < 1.0 ? RegionTag::L_ex_short : RegionTag::L_ex_long;
        info.ambiguous =
            std::min({std::abs(info.u - 1.0), info.u, 2.0 - info.u}) < eps;
    }
    return info;
}

double NormalFormMaps::uen_component_min_energy(long long m) const {
    return (2.0 * static_cast<double>(m) + p_->f2) / p_->LT;
}

double NormalFormMaps::uen_component_max_energy(long long m) const {
    return (2.0 * static_cast<double>(m) + 4.0 - p_->f2) / p_->LT;
}

StripPoint NormalFormMaps::apply_half(MapId id, const StripPoint& sp, CorrectionOrder order,
                                      bool check_region) const {
    const double f1 = p_->f1, f2 = p_->f2;
    const double E = sp.second;
    const bool with_h = order == CorrectionOrder::G_plus_H;

    auto expect = [&](Strip strip, RegionTag tag) {
        if (sp.strip != strip) throw DomainError("half map applied on the wrong strip");
        if (!check_region) return;
        RegionInfo info = classify(sp, 0.0);
        if (info.tag != tag && !info.ambiguous)
            throw DomainError(std::string("half map ") + map_id_name(id) +
                              " applied outside its region (classified " +
                              region_tag_name(info.tag) + ")");
    };

    switch (id) {
        case MapId::U12: {
            expect(Strip::R1, RegionTag::U_en);
            const double u = classifier_value(p_->LT, E, sp.first);
            const double tau = -u / (1.0 - f2) + (2.0 - f2) / (1.0 - f2);
            double I = (1.0 - f2) * E + c_.delta2 * (tau - 1.0);
            if (with_h) I += (h12u_quad_ * (tau - 1.0) * (tau - 1.0) + h12u_const_) / E;
            return {Strip::R2plus, tau, I};
        }
        case MapId::U21: {
            if (sp.strip != Strip::R2plus)
                throw DomainError("half map U21 expects a point on R2+");
            const double x = classifier_value(p_->LTb, E, sp.first);
            const double sig = -(1.0 - f1) * x + 2.0 - f1;
            double H = E / (1.0 - f1) + c_.delta1 * (sig - 1.0);
            if (with_h) H += (h21u_quad_ * (sig - 1.0) * (sig - 1.0) + h21u_const_) / E;
            return {Strip::R1, sig, H};
        }
        case MapId::Ll12: {
            expect(Strip::R1, RegionTag::L_en_long);
            const double u = classifier_value(p_->LT, E, sp.first);
            const double rho = -u / f2 + (f2 + 2.0) / f2;
            double J = f2 * E + c_.kappa_l * (rho - 1.0);
            if (with_h)
                J += (h12l_quad_ * (rho - 1.0) * (rho - 1.0) + h12l_const_) / E;
            return {Strip::R2minus, rho, J};
        }
        case MapId::Ls12: {
            expect(Strip::R1, RegionTag::L_en_short);
            const double u = classifier_value(p_->LT, E, sp.first);
            const double rho = -u / f2 + 1.0;
            double J = f2 * E + c_.kappa_l * (rho - 1.0);
            if (with_h)
                J += (h12l_quad_ * (rho - 1.0) * (rho - 1.0) + h12l_const_) / E;
            return {Strip::R2minus, rho, J};
        }
        case MapId::Ll21: {
            expect(Strip::R2minus, RegionTag::L_ex_long);
            const double w = classifier_value(p_->MZb, E, sp.first);
            const double sig = -f1 * w + 2.0 + f1;
            double H = E / f1 + c_.chi_l * (sig - 2.0);
            if (with_h)
                H += (h21l_quad_ * (sig - 2.0) * (sig - 2.0) + h21l_const_) / E;
            return {Strip::R1, sig, H};
        }
        default: {
            expect(Strip::R2minus, RegionTag::L_ex_short);
            const double w = classifier_value(p_->MZb, E, sp.first);
            const double sig = -f1 * w + f1;
            double H = E / f1 + c_.chi_l * sig;
            if (with_h) H += (h21l_quad_ * sig * sig + h21l_const_) / E;
            return {Strip::R1, sig, H};
        }
    }
}

StripPoint NormalFormMaps::apply_entry_forced(const StripPoint& sp) const {
    // linear lower-route entry on a decelerating component: the short-entry
    // formula continued across U_en, with the phase folded back into [0,2)
    const double u = classifier_value(p_->LT, sp.second, sp.first);
    const double rho = reduce_mod2(-u / p_->f2 + 1.0);
    const double J = p_->f2 * sp.second + c_.kappa_l * (rho - 1.0);
    return {Strip::R2minus, rho, J};
}

std::pair<StripPoint, RouteRecord> NormalFormMaps::apply_revolution(const StripPoint& sp,
                                                                    CorrectionOrder order,
                                                                    double V_star) const {
    RegionInfo entry = classify(sp, V_star);
    RouteRecord rec;
    rec.entry_tag = entry.tag;
    rec.ambiguous = entry.ambiguous;
    if (entry.tag == RegionTag::U_en) {
        rec.lower = false;
        StripPoint mid = apply_half(MapId::U12, sp, order, false);
        return {apply_half(MapId::U21, mid, order, false), rec};
    }
    rec.lower = true;
    const MapId entry_map =
        entry.tag == RegionTag::L_en_long ? MapId::Ll12 : MapId::Ls12;
    StripPoint mid = apply_half(entry_map, sp, order, false);
    RegionInfo exit = classify(mid, 0.0);
    rec.exit_tag = exit.tag;
    rec.ambiguous = rec.ambiguous || exit.ambiguous;
    const MapId exit_map =
        exit.tag == RegionTag::L_ex_long ? MapId::Ll21 : MapId::Ls21;
    return {apply_half(exit_map, mid, order, false), rec};
}

std::pair<StripPoint, RouteRecord> NormalFormMaps::apply_revolution_modified(
    const StripPoint& sp, CorrectionOrder order, const ModifiedSystemConfig& cfg) const {
    RegionInfo entry = classify(sp, cfg.V_star);
    if (entry.tag == RegionTag::U_en && uen_component_max_energy(entry.m) < cfg.V_0) {
        RouteRecord rec;
        rec.entry_tag = RegionTag::L_en_short;
        rec.lower = true;
        rec.forced = true;
        rec.ambiguous = entry.ambiguous;
        StripPoint mid = apply_entry_forced(sp);
        RegionInfo exit = classify(mid, 0.0);
        rec.exit_tag = exit.tag;
        rec.ambiguous = rec.ambiguous || exit.ambiguous;
        const MapId exit_map =
            exit.tag == RegionTag::L_ex_long ? MapId::Ll21 : MapId::Ls21;
        return {apply_half(exit_map, mid, order, false), rec};
    }
    return apply_revolution(sp, order, cfg.V_star);
}

EnvelopeReport energy_bound_report(const NormalFormMaps& maps, int n_samples,
                                   double energy_lo, double energy_hi,
                                   const ModifiedSystemConfig& cfg, std::uint64_t seed) {
    const ModelParams& p = maps.params();
    EnvelopeReport rep;
    rep.lower_entry.slope = p.f2;
    rep.lower_exit.slope = 1.0 / p.f1;
    rep.upper_entry.slope = 1.0 - p.f2;
    rep.upper_exit.slope = 1.0 / (1.0 - p.f1);
    rep.min_ratio_lower = rep.min_ratio_upper = 1e300;
    rep.max_ratio_lower = rep.max_ratio_upper = -1e300;

    const double rl_lo = cfg.ell * p.f2 / p.f1, rl_hi = p.f2 / (p.f1 * cfg.ell);
    const double ru_lo = cfg.ell * (1.0 - p.f2) / (1.0 - p.f1);
    const double ru_hi = (1.0 - p.f2) / ((1.0 - p.f1) * cfg.ell);

    for (int pass = 0; pass < 2; ++pass) {
        CounterRng rng(seed, static_cast<std::uint64_t>(pass));
        for (int i = 0; i < n_samples; ++i) {
            StripPoint sp{Strip::R1, rng.uniform(0.0, 2.0),
                          rng.uniform(energy_lo, energy_hi)};
            RegionInfo info = maps.classify(sp, 0.0);
            StripPoint mid, out;
            EnvelopeReport::PerMap* en;
            EnvelopeReport::PerMap* ex;
            if (info.tag == RegionTag::U_en) {
                mid = maps.apply_half(MapId::U12, sp, CorrectionOrder::G_plus_H, false);
                out = maps.apply_half(MapId::U21, mid, CorrectionOrder::G_plus_H, false);
                en = &rep.upper_entry;
                ex = &rep.upper_exit;
            } else {
                MapId entry_map =
                    info.tag == RegionTag::L_en_long ? MapId::Ll12 : MapId::Ls12;
                mid = maps.apply_half(entry_map, sp, CorrectionOrder::G_plus_H, false);
                RegionInfo exi = maps.classify(mid, 0.0);
                MapId exit_map =
                    exi.tag == RegionTag::L_ex_long ? MapId::Ll21 : MapId::Ls21;
                out = maps.apply_half(exit_map, mid, CorrectionOrder::G_plus_H, false);
                en = &rep.lower_entry;
                ex = &rep.lower_exit;
            }
            const double dev_en = std::abs(mid.second - en->slope * sp.second);
            const double dev_ex = std::abs(out.second - ex->slope * mid.second);
            if (pass == 0) {
                en->D_fit = std::max(en->D_fit, dev_en);
                ex->D_fit = std::max(ex->D_fit, dev_ex);
                en->n++;
                ex->n++;
            } else {
                if (dev_en > en->D_fit) en->holdout_violations++;
                if (dev_ex > ex->D_fit) ex->holdout_violations++;
                en->max_abs_dev_holdout = std::max(en->max_abs_dev_holdout, dev_en);
                ex->max_abs_dev_holdout = std::max(ex->max_abs_dev_holdout, dev_ex);
            }
            if (pass == 1 && sp.second > cfg.V_star) {
                const double ratio = out.second / sp.second;
                if (info.tag == RegionTag::U_en) {
                    rep.min_ratio_upper = std::min(rep.min_ratio_upper, ratio);
                    rep.max_ratio_upper = std::max(rep.max_ratio_upper, ratio);
                    if (ratio < ru_lo || ratio > ru_hi) rep.ratio_violations++;
                } else {
                    rep.min_ratio_lower = std::min(rep.min_ratio_lower, ratio);
                    rep.max_ratio_lower = std::max(rep.max_ratio_lower, ratio);
                    if (ratio < rl_lo || ratio > rl_hi) rep.ratio_violations++;
                }
            }
        }
    }
    return rep;
}

}  // namespace fermi
