#include "lgent/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lgent {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown key");
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
    return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(path + "/" + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

Eigen::VectorXd get_efficiency(const json& obj, const std::string& path,
                               const char* key) {
    if (!obj.contains(key)) return {};
    const json& v = obj.at(key);
    if (v.is_number()) {
        // Scalar shorthand: uniform efficiency resolved against the basis
        // dimension at use time, encoded here as a length-1 vector.
        const double eta = v.get<double>();
        if (!(eta > 0.0 && eta <= 1.0))
            fail(path + "/" + key, "efficiency must lie in (0, 1]");
        return Eigen::VectorXd::Constant(1, eta);
    }
    if (!v.is_array()) fail(path + "/" + key, "expected a number or array");
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            fail(path + "/" + key + "/" + std::to_string(i), "expected a number");
        out[static_cast<int>(i)] = v[i].get<double>();
        if (!(out[static_cast<int>(i)] > 0.0 && out[static_cast<int>(i)] <= 1.0))
            fail(path + "/" + key + "/" + std::to_string(i),
                 "efficiency must lie in (0, 1]");
    }
    return out;
}

void parse_optics(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/optics";
    check_keys(obj, path,
               {"pump_wavelength_nm", "signal_wavelength_nm", "pump_waist_um",
                "collection_waist_um", "waist_ratio", "focal_length_mm",
                "magnification", "phase_matching_width", "phase_matching"});
    OpticsConfig::Params p;
    p.pump_wavelength_nm =
        get_number(obj, path, "pump_wavelength_nm", p.pump_wavelength_nm);
    p.signal_wavelength_nm =
        get_number(obj, path, "signal_wavelength_nm", p.signal_wavelength_nm);
    p.pump_waist_um = get_number(obj, path, "pump_waist_um", p.pump_waist_um);
    p.focal_length_mm = get_number(obj, path, "focal_length_mm", p.focal_length_mm);
    p.magnification = get_number(obj, path, "magnification", p.magnification);
    p.phase_matching_width =
        get_number(obj, path, "phase_matching_width", p.phase_matching_width);
    const std::string pm = get_string(obj, path, "phase_matching", "sinc");
    if (pm == "sinc")
        p.phase_matching = PhaseMatching::Sinc;
    else if (pm == "gaussian")
        p.phase_matching = PhaseMatching::Gaussian;
    else
        fail(path + "/phase_matching", "expected \"sinc\" or \"gaussian\"");

    const bool has_waist = obj.contains("collection_waist_um");
    const bool has_ratio = obj.contains("waist_ratio");
    if (has_waist && has_ratio)
        fail(path, "give either collection_waist_um or waist_ratio, not both");
    if (has_waist)
        p.collection_waist_um =
            get_number(obj, path, "collection_waist_um", p.collection_waist_um);

    try {
        cfg.optics = OpticsConfig(p);
        if (has_ratio) {
            const double gamma = get_number(obj, path, "waist_ratio", 0.0);
            cfg.optics = cfg.optics.with_waist_ratio(gamma);
            cfg.collection_waist_derived = true;
        }
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
}

void parse_basis(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/basis";
    check_keys(obj, path,
               {"kind", "ell_min", "ell_max", "p_min", "p_max", "dimension",
                "ordering", "modes"});
    BasisSpec spec;
    const std::string kind = get_string(obj, path, "kind", "radial");
    if (kind == "radial")
        spec.kind = BasisKind::Radial;
    else if (kind == "azimuthal")
        spec.kind = BasisKind::Azimuthal;
    else if (kind == "fullfield")
        spec.kind = BasisKind::FullField;
    else if (kind == "explicit")
        spec.kind = BasisKind::Explicit;
    else
        fail(path + "/kind",
             "expected \"radial\", \"azimuthal\", \"fullfield\", or \"explicit\"");

    // Range defaults track the kind: 5 radial orders, or the 43-mode
    // full-field span used throughout.
    if (spec.kind == BasisKind::Radial) {
        spec.p_min = 0;
        spec.p_max = 4;
    } else if (spec.kind == BasisKind::Azimuthal) {
        spec.ell_min = -3;
        spec.ell_max = 3;
    } else if (spec.kind == BasisKind::FullField) {
        spec.ell_min = -8;
        spec.ell_max = 7;
        spec.p_min = 0;
        spec.p_max = 4;
        spec.dimension = 43;
    }
    spec.ell_min = get_int(obj, path, "ell_min", spec.ell_min);
    spec.ell_max = get_int(obj, path, "ell_max", spec.ell_max);
    spec.p_min = get_int(obj, path, "p_min", spec.p_min);
    spec.p_max = get_int(obj, path, "p_max", spec.p_max);
    spec.dimension = get_int(obj, path, "dimension", spec.dimension);

    const std::string ordering = get_string(obj, path, "ordering", "default");
    if (ordering == "default")
        spec.ordering = BasisOrdering::Default;
    else if (ordering == "modegroup")
        spec.ordering = BasisOrdering::ModeGroup;
    else if (ordering == "ell")
        spec.ordering = BasisOrdering::EllAscending;
    else if (ordering == "p")
        spec.ordering = BasisOrdering::PAscending;
    else
        fail(path + "/ordering",
             "expected \"default\", \"modegroup\", \"ell\", or \"p\"");

    if (obj.contains("modes")) {
        const json& v = obj.at("modes");
        if (!v.is_array()) fail(path + "/modes", "expected an array of [ell, p] pairs");
        for (size_t i = 0; i < v.size(); ++i) {
            const json& m = v[i];
            if (!m.is_array() || m.size() != 2 || !m[0].is_number_integer() ||
                !m[1].is_number_integer())
                fail(path + "/modes/" + std::to_string(i), "expected [ell, p]");
            spec.explicit_modes.push_back({m[0].get<int>(), m[1].get<int>()});
        }
    }

    try {
        enumerate_basis(spec);  // validate now so errors carry the config path
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    cfg.basis = spec;
}

void parse_state(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/state";
    check_keys(obj, path,
               {"source", "visibility", "azimuthal_crosstalk", "radial_crosstalk"});
    cfg.state_source = get_string(obj, path, "source", cfg.state_source);
    if (cfg.state_source != "spdc" && cfg.state_source != "maximal")
        fail(path + "/source", "expected \"spdc\" or \"maximal\"");
    cfg.visibility = get_number(obj, path, "visibility", cfg.visibility);
    if (cfg.visibility < 0.0 || cfg.visibility > 1.0)
        fail(path + "/visibility", "must lie in [0, 1]");
    cfg.azimuthal_crosstalk =
        get_number(obj, path, "azimuthal_crosstalk", cfg.azimuthal_crosstalk);
    cfg.radial_crosstalk =
        get_number(obj, path, "radial_crosstalk", cfg.radial_crosstalk);
    if (cfg.azimuthal_crosstalk < 0.0 || cfg.radial_crosstalk < 0.0)
        fail(path, "cross-talk strengths must be nonnegative");
    if (cfg.azimuthal_crosstalk + cfg.radial_crosstalk >= 1.0)
        fail(path, "cross-talk strengths must sum below 1");
}

void parse_measurement(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/measurement";
    check_keys(obj, path, {"pairs_budget", "mub_count", "bases"});
    cfg.budget = get_number(obj, path, "pairs_budget", cfg.budget);
    if (!(cfg.budget > 0.0)) fail(path + "/pairs_budget", "must be positive");
    cfg.mub_count = get_int(obj, path, "mub_count", cfg.mub_count);
    if (cfg.mub_count < -1) fail(path + "/mub_count", "must be -1 or >= 0");
    if (obj.contains("bases")) {
        const json& v = obj.at("bases");
        if (!v.is_array()) fail(path + "/bases", "expected an array of labels");
        for (size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string())
                fail(path + "/bases/" + std::to_string(i), "expected a string");
            const std::string label = v[i].get<std::string>();
            if (label != standard_label() && mub_index_from_label(label) < 0)
                fail(path + "/bases/" + std::to_string(i),
                     "expected \"standard\" or \"mub_r=<r>\"");
            cfg.measure_bases.push_back(label);
        }
    }
}

void parse_certification(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/certification";
    check_keys(obj, path, {"target", "error_trials", "fixture_fidelities"});
    cfg.target = get_string(obj, path, "target", cfg.target);
    if (cfg.target != "maximal" && cfg.target != "tilted")
        fail(path + "/target", "expected \"maximal\" or \"tilted\"");
    cfg.error_trials = get_int(obj, path, "error_trials", cfg.error_trials);
    if (cfg.error_trials < 100) fail(path + "/error_trials", "must be >= 100");
    if (obj.contains("fixture_fidelities")) {
        const json& v = obj.at("fixture_fidelities");
        if (!v.is_array()) fail(path + "/fixture_fidelities", "expected an array");
        for (size_t i = 0; i < v.size(); ++i) {
            const std::string ipath =
                path + "/fixture_fidelities/" + std::to_string(i);
            const json& f = v[i];
            if (!f.is_object()) fail(ipath, "expected {fidelity, dimension}");
            check_keys(f, ipath, {"fidelity", "dimension"});
            const double fid = get_number(f, ipath, "fidelity", -1.0);
            const int dim = get_int(f, ipath, "dimension", 0);
            if (fid < 0.0 || fid > 1.0) fail(ipath + "/fidelity", "must lie in [0, 1]");
            if (dim < 2) fail(ipath + "/dimension", "must be >= 2");
            cfg.fixture_fidelities.push_back({fid, dim});
        }
    }
}

void parse_quadrature(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/quadrature";
    check_keys(obj, path, {"n_radial", "n_angular"});
    cfg.quadrature.n_radial = get_int(obj, path, "n_radial", cfg.quadrature.n_radial);
    cfg.quadrature.n_angular = get_int(obj, path, "n_angular", cfg.quadrature.n_angular);
    if (cfg.quadrature.n_radial < 16 || cfg.quadrature.n_angular < 16)
        fail(path, "quadrature orders must be >= 16");
}

void parse_sweep(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/sweep";
    check_keys(obj, path, {"gammas"});
    if (!obj.contains("gammas")) return;
    const json& v = obj.at("gammas");
    if (!v.is_array() || v.empty()) fail(path + "/gammas", "expected a nonempty array");
    cfg.sweep_gammas.clear();
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !(v[i].get<double>() > 0.0))
            fail(path + "/gammas/" + std::to_string(i), "expected a positive number");
        cfg.sweep_gammas.push_back(v[i].get<double>());
    }
}

void parse_cgh(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/cgh";
    check_keys(obj, path,
               {"grid_px", "carrier_period_px", "pitch_um", "waist", "mub_r", "mub_j",
                "superposition"});
    cfg.cgh_grid_px = get_int(obj, path, "grid_px", cfg.cgh_grid_px);
    if (cfg.cgh_grid_px < 16) fail(path + "/grid_px", "must be >= 16");
    cfg.cgh_carrier_period_px =
        get_number(obj, path, "carrier_period_px", cfg.cgh_carrier_period_px);
    if (!(cfg.cgh_carrier_period_px >= 4.0))
        fail(path + "/carrier_period_px", "must be >= 4");
    cfg.cgh_pitch_um = get_number(obj, path, "pitch_um", cfg.cgh_pitch_um);
    if (!(cfg.cgh_pitch_um > 0.0)) fail(path + "/pitch_um", "must be positive");
    cfg.cgh_waist = get_number(obj, path, "waist", cfg.cgh_waist);
    if (!(cfg.cgh_waist > 0.0)) fail(path + "/waist", "must be positive");
    cfg.cgh_mub_r = get_int(obj, path, "mub_r", cfg.cgh_mub_r);
    cfg.cgh_mub_j = get_int(obj, path, "mub_j", cfg.cgh_mub_j);
    if (cfg.cgh_mub_r < 0) fail(path + "/mub_r", "must be >= 0");
    if (cfg.cgh_mub_j < 0) fail(path + "/mub_j", "must be >= 0");
    cfg.cgh_superposition = get_bool(obj, path, "superposition", cfg.cgh_superposition);
}

void parse_phase_only(const json& obj, ConfigDocument& cfg) {
    const std::string path = "/phase_only";
    check_keys(obj, path, {"dimension", "mub_r"});
    cfg.phase_only_dimension = get_int(obj, path, "dimension", cfg.phase_only_dimension);
    if (cfg.phase_only_dimension < 2) fail(path + "/dimension", "must be >= 2");
    cfg.phase_only_mub_r = get_int(obj, path, "mub_r", cfg.phase_only_mub_r);
    if (cfg.phase_only_mub_r < 0) fail(path + "/mub_r", "must be >= 0");
}

}  // namespace

ConfigDocument parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(root, "",
               {"optics", "basis", "state", "efficiency", "measurement",
                "certification", "quadrature", "sweep", "cgh", "phase_only",
                "output_dir"});

    ConfigDocument cfg;
    auto group = [&](const char* key) -> json {
        if (!root.contains(key)) return json::object();
        const json& v = root.at(key);
        if (!v.is_object())
            fail(std::string("/") + key, "expected an object");
        return v;
    };

    parse_optics(group("optics"), cfg);
    parse_basis(group("basis"), cfg);
    parse_state(group("state"), cfg);
    {
        const json eff = group("efficiency");
        check_keys(eff, "/efficiency", {"signal", "idler"});
        cfg.eff_signal = get_efficiency(eff, "/efficiency", "signal");
        cfg.eff_idler = get_efficiency(eff, "/efficiency", "idler");
    }
    parse_measurement(group("measurement"), cfg);
    parse_certification(group("certification"), cfg);
    parse_quadrature(group("quadrature"), cfg);
    parse_sweep(group("sweep"), cfg);
    parse_cgh(group("cgh"), cfg);
    parse_phase_only(group("phase_only"), cfg);
    cfg.output_dir = get_string(root, "", "output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) fail("/output_dir", "must be nonempty");
    return cfg;
}

ConfigDocument parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ConfigDocument& cfg) {
    json root;

    const OpticsConfig::Params& op = cfg.optics.params();
    json& optics = root["optics"];
    optics["pump_wavelength_nm"] = op.pump_wavelength_nm;
    optics["signal_wavelength_nm"] = op.signal_wavelength_nm;
    optics["pump_waist_um"] = op.pump_waist_um;
    optics["collection_waist_um"] = op.collection_waist_um;
    optics["focal_length_mm"] = op.focal_length_mm;
    optics["magnification"] = op.magnification;
    optics["phase_matching_width"] = op.phase_matching_width;
    optics["phase_matching"] =
        op.phase_matching == PhaseMatching::Sinc ? "sinc" : "gaussian";

    json& basis = root["basis"];
    switch (cfg.basis.kind) {
        case BasisKind::Radial: basis["kind"] = "radial"; break;
        case BasisKind::Azimuthal: basis["kind"] = "azimuthal"; break;
        case BasisKind::FullField: basis["kind"] = "fullfield"; break;
        case BasisKind::Explicit: basis["kind"] = "explicit"; break;
    }
    basis["ell_min"] = cfg.basis.ell_min;
    basis["ell_max"] = cfg.basis.ell_max;
    basis["p_min"] = cfg.basis.p_min;
    basis["p_max"] = cfg.basis.p_max;
    basis["dimension"] = cfg.basis.dimension;
    switch (cfg.basis.ordering) {
        case BasisOrdering::Default: basis["ordering"] = "default"; break;
        case BasisOrdering::ModeGroup: basis["ordering"] = "modegroup"; break;
        case BasisOrdering::EllAscending: basis["ordering"] = "ell"; break;
        case BasisOrdering::PAscending: basis["ordering"] = "p"; break;
    }
    if (!cfg.basis.explicit_modes.empty()) {
        json modes = json::array();
        for (const auto& m : cfg.basis.explicit_modes)
            modes.push_back(json::array({m.ell, m.p}));
        basis["modes"] = modes;
    }

    json& state = root["state"];
    state["source"] = cfg.state_source;
    state["visibility"] = cfg.visibility;
    state["azimuthal_crosstalk"] = cfg.azimuthal_crosstalk;
    state["radial_crosstalk"] = cfg.radial_crosstalk;

    json& eff = root["efficiency"];
    eff = json::object();
    if (cfg.eff_signal.size() > 0)
        eff["signal"] = std::vector<double>(cfg.eff_signal.data(),
                                            cfg.eff_signal.data() + cfg.eff_signal.size());
    if (cfg.eff_idler.size() > 0)
        eff["idler"] = std::vector<double>(cfg.eff_idler.data(),
                                           cfg.eff_idler.data() + cfg.eff_idler.size());

    json& meas = root["measurement"];
    meas["pairs_budget"] = cfg.budget;
    meas["mub_count"] = cfg.mub_count;
    if (!cfg.measure_bases.empty()) meas["bases"] = cfg.measure_bases;

    json& cert = root["certification"];
    cert["target"] = cfg.target;
    cert["error_trials"] = cfg.error_trials;
    if (!cfg.fixture_fidelities.empty()) {
        json fixtures = json::array();
        for (const auto& [fid, dim] : cfg.fixture_fidelities)
            fixtures.push_back({{"fidelity", fid}, {"dimension", dim}});
        cert["fixture_fidelities"] = fixtures;
    }

    json& quad = root["quadrature"];
    quad["n_radial"] = cfg.quadrature.n_radial;
    quad["n_angular"] = cfg.quadrature.n_angular;

    root["sweep"]["gammas"] = cfg.sweep_gammas;

    json& cgh = root["cgh"];
    cgh["grid_px"] = cfg.cgh_grid_px;
    cgh["carrier_period_px"] = cfg.cgh_carrier_period_px;
    cgh["pitch_um"] = cfg.cgh_pitch_um;
    cgh["waist"] = cfg.cgh_waist;
    cgh["mub_r"] = cfg.cgh_mub_r;
    cgh["mub_j"] = cfg.cgh_mub_j;
    cgh["superposition"] = cfg.cgh_superposition;

    json& po = root["phase_only"];
    po["dimension"] = cfg.phase_only_dimension;
    po["mub_r"] = cfg.phase_only_mub_r;

    root["output_dir"] = cfg.output_dir;

    return root.dump(2) + "\n";
}

}  // namespace lgent
