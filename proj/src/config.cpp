#include "fermi/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace fermi {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

double need_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError("missing numeric \"" + key + "\" in " + where);
    return j[key].get<double>();
}

SlitProfile parse_profile(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("profile needs a \"kind\"");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "sine") {
        reject_unknown(j, {"kind", "h0", "A", "omega", "phi0"}, "profile");
        return SlitProfile::sine(need_number(j, "h0", "profile"), need_number(j, "A", "profile"),
                                 need_number(j, "omega", "profile"),
                                 need_number(j, "phi0", "profile"));
    }
    if (kind == "constant") {
        reject_unknown(j, {"kind", "h"}, "profile");
        return SlitProfile::constant(need_number(j, "h", "profile"));
    }
    if (kind == "pieces") {
        reject_unknown(j, {"kind", "pieces"}, "profile");
        if (!j.contains("pieces") || !j["pieces"].is_array())
            throw ConfigError("piecewise profile needs a \"pieces\" array");
        std::vector<ProfilePiece> pieces;
        for (const json& pj : j["pieces"]) {
            reject_unknown(pj, {"t0", "t1", "poly", "sines"}, "profile piece");
            ProfilePiece p;
            p.t0 = need_number(pj, "t0", "profile piece");
            p.t1 = need_number(pj, "t1", "profile piece");
            if (pj.contains("poly"))
                for (const json& c : pj["poly"]) p.poly.push_back(c.get<double>());
            if (pj.contains("sines"))
                for (const json& s : pj["sines"]) {
                    reject_unknown(s, {"amp", "freq", "phase"}, "sine term");
                    p.sines.push_back({need_number(s, "amp", "sine term"),
                                       need_number(s, "freq", "sine term"),
                                       need_number(s, "phase", "sine term")});
                }
            pieces.push_back(std::move(p));
        }
        return SlitProfile::from_pieces(std::move(pieces));
    }
    throw ConfigError("profile kind must be one of sine, constant, pieces");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"profile", "lambda", "x0", "c_bound", "thresholds", "ensemble", "alpha",
                    "T", "N0", "kappa", "itinerary_depth", "seed", "out"},
                   "config root");
    RunConfig cfg;
    if (!j.contains("profile")) throw ConfigError("config needs a \"profile\" section");
    try {
        cfg.profile = parse_profile(j["profile"]);
    } catch (const ProfileError& e) {
        throw ConfigError(e.what());
    }
    cfg.lambda_slit = need_number(j, "lambda", "config");
    cfg.x0 = need_number(j, "x0", "config");
    if (j.contains("c_bound")) cfg.c_bound = j["c_bound"].get<double>();

    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        reject_unknown(t, {"v_star", "v0", "ell"}, "thresholds");
        if (t.contains("v_star")) cfg.thresholds.V_star = t["v_star"].get<double>();
        if (t.contains("v0")) cfg.thresholds.V_0 = t["v0"].get<double>();
        if (t.contains("ell")) cfg.thresholds.ell = t["ell"].get<double>();
    }

    if (j.contains("ensemble")) {
        const json& e = j["ensemble"];
        reject_unknown(e,
                       {"seed", "n_orbits", "v_range", "horizon", "dynamics", "init",
                        "curve_sigma", "z_floor", "track_stopping_time", "theta1", "N0"},
                       "ensemble");
        if (e.contains("seed")) cfg.ensemble.seed = e["seed"].get<std::uint64_t>();
        if (e.contains("n_orbits")) cfg.ensemble.n_orbits = e["n_orbits"].get<int>();
        if (e.contains("v_range")) {
            if (!e["v_range"].is_array() || e["v_range"].size() != 2)
                throw ConfigError("ensemble.v_range must be [lo, hi]");
            cfg.ensemble.v_lo = e["v_range"][0].get<double>();
            cfg.ensemble.v_hi = e["v_range"][1].get<double>();
        }
        if (e.contains("horizon")) cfg.ensemble.horizon = e["horizon"].get<int>();
        if (e.contains("dynamics")) {
            const std::string d = e["dynamics"].get<std::string>();
            if (d == "exact")
                cfg.ensemble.dynamics = DynamicsKind::exact;
            else if (d == "normal_form_P")
                cfg.ensemble.dynamics = DynamicsKind::normal_form_P;
            else if (d == "modified_P0")
                cfg.ensemble.dynamics = DynamicsKind::modified_P0;
            else
                throw ConfigError("dynamics must be exact, normal_form_P or modified_P0");
        }
        if (e.contains("init")) {
            const std::string i = e["init"].get<std::string>();
            if (i == "rect")
                cfg.ensemble.init = InitKind::rect;
            else if (i == "curve")
                cfg.ensemble.init = InitKind::curve;
            else
                throw ConfigError("init must be rect or curve");
        }
        if (e.contains("curve_sigma")) cfg.ensemble.curve_sigma = e["curve_sigma"].get<double>();
        if (e.contains("z_floor")) cfg.ensemble.z_floor = e["z_floor"].get<double>();
        if (e.contains("track_stopping_time"))
            cfg.ensemble.track_stopping_time = e["track_stopping_time"].get<bool>();
        if (e.contains("theta1")) cfg.ensemble.theta1 = e["theta1"].get<double>();
        if (e.contains("N0")) cfg.ensemble.N0 = e["N0"].get<int>();
    }

    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("T")) {
        cfg.T_values.clear();
        for (const json& t : j["T"]) cfg.T_values.push_back(t.get<int>());
    }
    if (j.contains("N0")) {
        cfg.N0 = j["N0"].get<int>();
        cfg.ensemble.N0 = cfg.N0;
    }
    if (j.contains("kappa")) cfg.kappa = j["kappa"].get<double>();
    if (j.contains("itinerary_depth")) cfg.itinerary_depth = j["itinerary_depth"].get<int>();
    if (j.contains("seed")) cfg.ensemble.seed = j["seed"].get<std::uint64_t>();

    cfg.echo = j.dump();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

}  // namespace fermi
