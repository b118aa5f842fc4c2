#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgent/spdc.hpp"
#include "lgent/tomo.hpp"

namespace lgent {

// Parsed, validated experiment description. Every field has a default, so
// an empty JSON object is a valid config; unknown keys are rejected with
// their JSON pointer path.
struct ConfigDocument {
    OpticsConfig optics;
    // True when the collection waist was solved from a requested waist ratio
    // rather than given directly; reports tag the value as derived.
    bool collection_waist_derived = false;

    BasisSpec basis{BasisKind::Radial, 0, 0, 0, 4, 0, BasisOrdering::Default, {}};

    std::string state_source = "spdc";  // "spdc" or "maximal"
    double visibility = 1.0;
    double azimuthal_crosstalk = 0.0;
    double radial_crosstalk = 0.0;
    QuadratureSpec quadrature;

    double budget = 1e4;
    int mub_count = -1;                      // -1 means all d MUBs
    std::vector<std::string> measure_bases;  // empty means standard + MUB subset
    Eigen::VectorXd eff_signal;              // empty means uniform 1
    Eigen::VectorXd eff_idler;

    std::string target = "maximal";  // "maximal" or "tilted"
    int error_trials = 250;
    // Published (fidelity, dimension) pairs to re-certify alongside any
    // simulated data; empty disables the fixture report.
    std::vector<std::pair<double, int>> fixture_fidelities;

    std::vector<double> sweep_gammas = {0.1, 0.25, 0.5, 1.0, 2.0, 5.26, 8.0};

    int cgh_grid_px = 1024;
    double cgh_carrier_period_px = 8.0;
    double cgh_pitch_um = 8.0;
    double cgh_waist = 12.0;
    int cgh_mub_r = 1;
    int cgh_mub_j = 1;
    bool cgh_superposition = true;

    int phase_only_dimension = 5;
    int phase_only_mub_r = 1;

    std::string output_dir = "out";
};

// Parse and validate a JSON config text. Throws ConfigError with a JSON
// pointer path for unknown keys, type errors, or out-of-range values.
ConfigDocument parse_config(const std::string& json_text);

ConfigDocument parse_config_file(const std::string& path);

// Canonical serialization: alphabetically ordered keys, all defaults
// materialized. serialize(parse(serialize(parse(x)))) == serialize(parse(x)).
std::string serialize_config(const ConfigDocument& cfg);

}  // namespace lgent
