#pragma once

#include "fermi/params.hpp"

// Shared fixture: the shipped fast-slit configuration and its derived data,
// built once per test binary.
struct DefaultModel {
    fermi::ResonantConfig rc = fermi::make_resonant_config(18);
    fermi::ModelParams params =
        fermi::derive_params(rc.profile, rc.lambda_slit, rc.x0, 0.25);
    fermi::NormalFormConstants consts = fermi::normal_form_constants(params);
};

inline const DefaultModel& default_model() {
    static DefaultModel m;
    return m;
}
