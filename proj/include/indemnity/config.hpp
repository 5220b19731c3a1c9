#pragma once

#include <string>
#include <vector>

#include "indemnity/loss_model.hpp"
#include "indemnity/numerics.hpp"
#include "indemnity/preferences.hpp"

namespace indemnity {

struct OracleConfig {
    bool enabled = false;
    int n = 400;
};

// One fully parsed run configuration. The premium is either a single value
// (solve) or a grid (menu); exactly one of the two appears in the file.
struct RunConfig {
    LossModel loss;
    UtilitySpec utility = UtilitySpec::identity();
    WeightingSpec weighting = WeightingSpec::tversky_kahneman(0.5);
    double W0 = 0.0;
    double rho = 0.0;
    std::vector<double> premiums;
    bool premium_is_grid = false;
    Tolerance tol;
    OracleConfig oracle;
};

// Parses the JSON text. Unknown keys anywhere are errors; missing required
// keys name the key and the accepted form. Structural errors (bad families,
// out-of-range parameters) are ConfigError; assumption-level failures (a
// weighting that parses but is not inverse-S) are deliberately NOT caught
// here — the validate command reports those clause by clause.
RunConfig parse_config(const std::string& text);

// Reads the file and parses it. ConfigError on unreadable files.
RunConfig load_config(const std::string& path);

}  // namespace indemnity
