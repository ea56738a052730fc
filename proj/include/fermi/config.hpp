#pragma once

#include <string>
#include <vector>

#include "fermi/maps.hpp"
#include "fermi/profile.hpp"
#include "fermi/stats.hpp"

namespace fermi {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One JSON document drives every subcommand; unknown keys are rejected and
// the document is echoed into every output header.
struct RunConfig {
    SlitProfile profile;
    double lambda_slit = 0.5;
    double x0 = 0.25;
    double c_bound = 0.25;
    ModifiedSystemConfig thresholds;
    EnsembleConfig ensemble;
    double alpha = -1.0;           // escape threshold rate; <= 0 means drift/2
    std::vector<int> T_values = {5, 10, 15, 20, 25};
    int N0 = 50;
    double kappa = -1.0;           // moment exponent; <= 0 means eta/N0 with eta = 0.5
    int itinerary_depth = 3;
    std::string echo;              // compact config echo for output headers

    ModelParams derive() const { return derive_params(profile, lambda_slit, x0, c_bound); }
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

}  // namespace fermi
