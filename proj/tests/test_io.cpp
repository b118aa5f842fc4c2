#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgent/config.hpp"
#include "lgent/errors.hpp"
#include "lgent/mub.hpp"
#include "lgent/pipeline.hpp"

using namespace lgent;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("/tmp/lgent_io_tests") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

// A maximally entangled d-mode radial state, the cheapest source for
// exercising the simulate/certify plumbing.
JointState maximal_state(int d) {
    JointState st;
    for (int p = 0; p < d; ++p) st.tensor.basis.push_back({0, p});
    st.tensor.values =
        Eigen::MatrixXcd::Identity(d, d) / std::sqrt(static_cast<double>(d));
    st.tensor.conjugate_idler_frame = true;
    st.visibility = 1.0;
    return st;
}

}  // namespace

TEST_CASE("an empty config parses to the published defaults") {
    const ConfigDocument cfg = parse_config("{}");
    const OpticsConfig::Params& p = cfg.optics.params();
    CHECK(p.pump_wavelength_nm == 775.0);
    CHECK(p.signal_wavelength_nm == 1550.0);
    CHECK(p.pump_waist_um == 450.0);
    CHECK(p.collection_waist_um == doctest::Approx(199.658));
    CHECK(p.magnification == 3.3);
    CHECK(p.phase_matching == PhaseMatching::Sinc);
    // The stock optics sit at the strongly pump-limited operating point.
    const double gamma = 450.0 * 3.3 / (std::sqrt(2.0) * 199.658);
    CHECK(cfg.optics.waist_ratio() == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(cfg.optics.waist_ratio() == doctest::Approx(5.259).epsilon(1e-3));
    CHECK_FALSE(cfg.collection_waist_derived);

    CHECK(cfg.basis.kind == BasisKind::Radial);
    CHECK(enumerate_basis(cfg.basis).size() == 5);
    CHECK(cfg.state_source == "spdc");
    CHECK(cfg.visibility == 1.0);
    CHECK(cfg.budget == 1e4);
    CHECK(cfg.mub_count == -1);
    CHECK(cfg.target == "maximal");
    CHECK(cfg.error_trials == 250);
    CHECK(cfg.sweep_gammas == std::vector<double>{0.1, 0.25, 0.5, 1.0, 2.0, 5.26, 8.0});
    CHECK(cfg.quadrature.n_radial == 320);
    CHECK(cfg.quadrature.n_angular == 256);
    CHECK(cfg.cgh_grid_px == 1024);
    CHECK(cfg.cgh_carrier_period_px == 8.0);
    CHECK(cfg.phase_only_dimension == 5);
    CHECK(cfg.phase_only_mub_r == 1);
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("waist ratio and explicit collection waist are exclusive") {
    const ConfigDocument cfg =
        parse_config(R"({"optics": {"waist_ratio": 2.0}})");
    CHECK(cfg.collection_waist_derived);
    CHECK(cfg.optics.waist_ratio() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(cfg.optics.params().collection_waist_um != doctest::Approx(199.658));

    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"optics": {"waist_ratio": 2.0, "collection_waist_um": 100.0}})"),
        doctest::Contains("not both"), ConfigError);
}

TEST_CASE("unknown keys are reported with their json pointer") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"frobnicate": 1})"),
                         doctest::Contains("/frobnicate"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"optics": {"pump_waist": 450}})"),
                         doctest::Contains("/optics/pump_waist"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"state": {"viz": 0.9}})"),
                         doctest::Contains("/state/viz"), ConfigError);
}

TEST_CASE("type and range violations carry the offending path") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"state": {"visibility": "high"}})"),
                         doctest::Contains("/state/visibility"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"state": {"visibility": 1.5}})"),
                         doctest::Contains("must lie in [0, 1]"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"state": {"azimuthal_crosstalk": 0.6, "radial_crosstalk": 0.5}})"),
        doctest::Contains("sum below 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"optics": {"pump_waist_um": -1.0}})"),
                         doctest::Contains("pump_waist_um"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"quadrature": {"n_radial": 8}})"),
                         doctest::Contains(">= 16"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"measurement": {"pairs_budget": 0}})"),
                         doctest::Contains("/measurement/pairs_budget"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"certification": {"error_trials": 50}})"),
                         doctest::Contains(">= 100"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"basis": {"kind": "weird"}})"),
                         doctest::Contains("/basis/kind"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"optics": {"phase_matching": "box"}})"),
                         doctest::Contains("sinc"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sweep": {"gammas": []}})"),
                         doctest::Contains("nonempty"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"efficiency": {"signal": 0.0}})"),
                         doctest::Contains("(0, 1]"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"efficiency": {"idler": [1.0, 1.2]}})"),
                         doctest::Contains("/efficiency/idler/1"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"measurement": {"bases": ["fourier"]}})"),
        doctest::Contains("mub_r="), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"certification": {"fixture_fidelities": [{"fidelity": 1.5, "dimension": 3}]}})"),
        doctest::Contains("fidelity"), ConfigError);
}

TEST_CASE("invalid json and missing files fail loudly") {
    CHECK_THROWS_WITH_AS(parse_config("[1, 2"), doctest::Contains("invalid JSON"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[]"),
                         doctest::Contains("top level must be an object"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_file("/nonexistent/x.json"),
                         doctest::Contains("cannot open"), ConfigError);
}

TEST_CASE("serialization is canonical and stable under re-parsing") {
    const std::string rich = R"({
        "optics": {"waist_ratio": 2.0, "phase_matching": "gaussian"},
        "basis": {"kind": "explicit", "modes": [[0, 0], [1, 0], [-1, 0]]},
        "state": {"source": "maximal", "visibility": 0.85,
                  "azimuthal_crosstalk": 0.05},
        "efficiency": {"signal": 0.8, "idler": [0.9, 0.8, 0.7]},
        "measurement": {"pairs_budget": 5e5, "bases": ["standard", "mub_r=1"]},
        "certification": {"error_trials": 120,
                          "fixture_fidelities": [{"fidelity": 0.618, "dimension": 11}]},
        "output_dir": "elsewhere"
    })";
    const ConfigDocument cfg = parse_config(rich);
    CHECK(cfg.basis.explicit_modes.size() == 3);
    CHECK(cfg.eff_signal.size() == 1);
    CHECK(cfg.eff_idler.size() == 3);
    CHECK(cfg.measure_bases == std::vector<std::string>{"standard", "mub_r=1"});
    CHECK(cfg.fixture_fidelities.size() == 1);
    CHECK(cfg.output_dir == "elsewhere");

    const std::string s1 = serialize_config(cfg);
    const std::string s2 = serialize_config(parse_config(s1));
    CHECK(s1 == s2);

    const ConfigDocument back = parse_config(s1);
    CHECK(back.visibility == 0.85);
    CHECK(back.optics.waist_ratio() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(back.eff_idler.size() == 3);
    CHECK(back.eff_idler[2] == 0.7);
    CHECK(back.fixture_fidelities[0].first == 0.618);
    CHECK(back.fixture_fidelities[0].second == 11);
}

TEST_CASE("coincidence records survive a file round trip") {
    const fs::path dir = fresh_dir("records");
    const JointState st = maximal_state(3);
    const MUBFamily fam = mub_family(3);
    const auto eff = EfficiencyModel::uniform(3);
    CoincidenceRecord rec = simulate_counts(st, fam.bases[0], fam.bases[0],
                                            standard_label(), standard_label(), eff,
                                            2e4, 99);
    rec.config_hash = "deadbeefdeadbeef";
    write_record(rec, dir.string(), rec.basis_s);

    const CoincidenceRecord back =
        read_record((dir / "counts_standard.json").string());
    CHECK(back.basis_s == rec.basis_s);
    CHECK(back.basis_i == rec.basis_i);
    CHECK(back.counts == rec.counts);
    CHECK(back.singles_s == rec.singles_s);
    CHECK(back.singles_i == rec.singles_i);
    CHECK(back.budget == rec.budget);
    CHECK(back.seed == rec.seed);
    CHECK(back.config_hash == rec.config_hash);
    fs::remove_all(dir);
}

TEST_CASE("malformed records are rejected with the failing field") {
    const fs::path dir = fresh_dir("bad_records");
    const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };

    CHECK_THROWS_WITH_AS(read_record((dir / "missing.json").string()),
                         doctest::Contains("cannot open"), DataError);
    CHECK_THROWS_WITH_AS(read_record(write("garbled.json", "{oops")),
                         doctest::Contains("not valid JSON"), DataError);

    const json good = {
        {"schema_version", 1},       {"d", 2},
        {"basis_s", "standard"},     {"basis_i", "standard"},
        {"counts", {5, 0, 0, 5}},    {"singles_s", {5.0, 5.0}},
        {"singles_i", {5.0, 5.0}},   {"pairs_budget", 10.0},
        {"seed", 1},                 {"config_hash", "00"}};

    json bad = good;
    bad["schema_version"] = 2;
    CHECK_THROWS_WITH_AS(read_record(write("v2.json", bad.dump())),
                         doctest::Contains("schema version"), DataError);

    bad = good;
    bad["counts"] = {5, 0, 0};
    CHECK_THROWS_WITH_AS(read_record(write("short.json", bad.dump())),
                         doctest::Contains("d*d"), DataError);

    bad = good;
    bad["counts"] = {5, 0, 0, -1};
    CHECK_THROWS_WITH_AS(read_record(write("negative.json", bad.dump())),
                         doctest::Contains("negative or non-integer"), DataError);

    bad = good;
    bad["counts"] = {5.5, 0, 0, 5};
    CHECK_THROWS_WITH_AS(read_record(write("float.json", bad.dump())),
                         doctest::Contains("negative or non-integer"), DataError);

    bad = good;
    bad["singles_s"] = {5.0};
    CHECK_THROWS_WITH_AS(read_record(write("singles.json", bad.dump())),
                         doctest::Contains("length d"), DataError);

    bad = good;
    bad.erase("basis_s");
    CHECK_THROWS_WITH_AS(read_record(write("nobasis.json", bad.dump())),
                         doctest::Contains("missing schema fields"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes a manifest whose hashes verify") {
    const fs::path dir = fresh_dir("manifest");
    const ConfigDocument cfg = parse_config(
        R"({"state": {"source": "maximal"},
            "measurement": {"pairs_budget": 1e5, "mub_count": 1}})");
    RunOptions opt;
    opt.subcommand = "simulate";
    opt.out_dir = dir.string();
    opt.seed = 11;
    const RunManifest manifest = run_pipeline(cfg, opt);

    CHECK(manifest.subcommand == "simulate");
    CHECK(manifest.seed == 11);
    CHECK(manifest.wall_ms > 0.0);
    // standard + one MUB, three files each, plus tensor/schmidt/report.
    REQUIRE(manifest.files.size() == 9);
    for (const auto& [name, hash] : manifest.files) {
        CHECK(name != "manifest.json");
        CHECK(fs::exists(dir / name));
        CHECK(file_fingerprint((dir / name).string()) == hash);
    }

    const json doc = slurp_json(dir / "manifest.json");
    CHECK(doc.at("tool_version") == kToolVersion);
    CHECK(doc.at("subcommand") == "simulate");
    CHECK(doc.at("seed") == 11);
    CHECK(doc.at("files").size() == manifest.files.size());
    CHECK(doc.at("config") == json::parse(serialize_config(cfg)));

    const json report = slurp_json(dir / "state_report.json");
    CHECK(report.at("dimension") == 5);
    CHECK(report.at("source") == "maximal");
    CHECK(report.at("idler_frame") == "conjugate");
    fs::remove_all(dir);
}

TEST_CASE("equal seeds give byte-identical outputs") {
    const ConfigDocument cfg = parse_config(
        R"({"state": {"source": "maximal"},
            "measurement": {"pairs_budget": 1e5, "mub_count": 1}})");
    RunOptions opt;
    opt.subcommand = "simulate";
    opt.seed = 5;

    const fs::path dir_a = fresh_dir("seed_a");
    opt.out_dir = dir_a.string();
    const RunManifest a = run_pipeline(cfg, opt);

    const fs::path dir_b = fresh_dir("seed_b");
    opt.out_dir = dir_b.string();
    const RunManifest b = run_pipeline(cfg, opt);
    CHECK(a.files == b.files);
    CHECK(slurp(dir_a / "counts_standard.csv") == slurp(dir_b / "counts_standard.csv"));

    const fs::path dir_c = fresh_dir("seed_c");
    opt.out_dir = dir_c.string();
    opt.seed = 6;
    const RunManifest c = run_pipeline(cfg, opt);
    CHECK(slurp(dir_a / "counts_standard.csv") != slurp(dir_c / "counts_standard.csv"));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::remove_all(dir_c);
}

TEST_CASE("certify consumes simulate output end to end") {
    const fs::path dir = fresh_dir("endtoend");
    const ConfigDocument cfg = parse_config(
        R"({"state": {"source": "maximal"},
            "measurement": {"pairs_budget": 1e6},
            "certification": {"error_trials": 100}})");
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.seed = 3;
    opt.subcommand = "simulate";
    run_pipeline(cfg, opt);
    opt.subcommand = "certify";
    run_pipeline(cfg, opt);

    const json cert = slurp_json(dir / "certification.json");
    CHECK(cert.at("method") == "exact-complete-MUB");
    CHECK(cert.at("fidelity").get<double>() > 0.999);
    CHECK(cert.at("certified_dimension") == 5);
    CHECK(cert.at("margin").get<double>() > 0.0);
    CHECK(cert.at("error_trials") == 100);
    CHECK(cert.at("fidelity_error").get<double>() < 0.01);

    // One probe per MUB subset size, plus the header line.
    const std::string curve = slurp(dir / "mub_curve.csv");
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 6);
    fs::remove_all(dir);
}

TEST_CASE("oracle reports a self-consistent certification") {
    const fs::path dir = fresh_dir("oracle");
    const ConfigDocument cfg = parse_config(R"({"state": {"source": "maximal"}})");
    RunOptions opt;
    opt.subcommand = "oracle";
    opt.out_dir = dir.string();
    run_pipeline(cfg, opt);
    const json doc = slurp_json(dir / "oracle_report.json");
    CHECK(doc.at("dimension") == 5);
    CHECK(doc.at("uniform_target").at("fidelity").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(doc.at("uniform_target").at("certified_dimension") == 5);
    CHECK(doc.at("nominated_target").at("certified_dimension") == 5);
    CHECK(doc.at("nominated_target").at("lambda").size() == 5);
    fs::remove_all(dir);
}

TEST_CASE("failed runs remove their partial outputs") {
    const fs::path dir = fresh_dir("cleanup");
    // Seed the directory with a standard-basis record only, then ask certify
    // for a run that needs MUB records and also writes a fixture table first.
    const ConfigDocument sim_cfg = parse_config(
        R"({"state": {"source": "maximal"},
            "measurement": {"pairs_budget": 1e4, "mub_count": 0}})");
    RunOptions opt;
    opt.subcommand = "simulate";
    opt.out_dir = dir.string();
    run_pipeline(sim_cfg, opt);
    CHECK(fs::exists(dir / "counts_standard.json"));

    const ConfigDocument cert_cfg = parse_config(
        R"({"certification": {"fixture_fidelities": [{"fidelity": 0.618, "dimension": 11}]}})");
    opt.subcommand = "certify";
    CHECK_THROWS_WITH_AS(run_pipeline(cert_cfg, opt),
                         doctest::Contains("no MUB records"), DataError);
    CHECK_FALSE(fs::exists(dir / "fixture_certification.csv"));
    CHECK_FALSE(fs::exists(dir / "certification.json"));
    CHECK_FALSE(fs::exists(dir / "mub_curve.csv"));
    // Files from the earlier successful run are untouched.
    CHECK(fs::exists(dir / "counts_standard.json"));
    fs::remove_all(dir);
}

TEST_CASE("unknown subcommands and targets are rejected") {
    const fs::path dir = fresh_dir("unknown");
    const ConfigDocument cfg = parse_config("{}");
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.subcommand = "frobnicate";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg, opt),
                         doctest::Contains("unknown subcommand"), ConfigError);
    opt.subcommand = "certify";
    opt.target_override = "weird";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg, opt), doctest::Contains("unknown target"),
                         ConfigError);
    opt.target_override = "tilted";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg, opt), doctest::Contains("oracle"),
                         ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("cgh run emits a hologram per mode plus the superposition") {
    const fs::path dir = fresh_dir("cgh");
    const ConfigDocument cfg = parse_config(
        R"({"basis": {"kind": "explicit", "modes": [[0, 0], [1, 0]]},
            "cgh": {"grid_px": 64, "mub_r": 1, "mub_j": 1}})");
    RunOptions opt;
    opt.subcommand = "cgh";
    opt.out_dir = dir.string();
    const RunManifest manifest = run_pipeline(cfg, opt);
    CHECK(manifest.files.size() == 7);  // 3 x (pgm + json) + report csv
    CHECK(fs::exists(dir / "cgh_l0p0.pgm"));
    CHECK(fs::exists(dir / "cgh_l1p0.pgm"));
    CHECK(fs::exists(dir / "cgh_mub_r1_j1.pgm"));
    CHECK(slurp(dir / "cgh_l0p0.pgm").rfind("P5\n64 64\n255\n", 0) == 0);
    const std::string report = slurp(dir / "cgh_report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 4);
    CHECK(slurp_json(dir / "cgh_l0p0.json").at("pitch_um") == 8.0);
    fs::remove_all(dir);
}

TEST_CASE("phase-only run reports the diagnostic matrices") {
    const fs::path dir = fresh_dir("phase_only");
    const ConfigDocument cfg = parse_config(
        R"({"phase_only": {"dimension": 3, "mub_r": 1},
            "quadrature": {"n_radial": 96, "n_angular": 64}})");
    RunOptions opt;
    opt.subcommand = "phase-only";
    opt.out_dir = dir.string();
    run_pipeline(cfg, opt);

    const std::string self_csv = slurp(dir / "phase_only_radial.csv");
    CHECK(std::count(self_csv.begin(), self_csv.end(), '\n') == 3);
    // Diagonal of the self-overlap table is exactly unity by construction.
    std::istringstream rows(self_csv);
    std::string line;
    for (int m = 0; std::getline(rows, line); ++m) {
        std::istringstream cells(line);
        std::string cell;
        for (int n = 0; std::getline(cells, cell, ','); ++n) {
            const double v = std::stod(cell);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
            if (m == n) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    const json report = slurp_json(dir / "phase_only_report.json");
    CHECK(report.at("dimension") == 3);
    CHECK(report.at("mub_r") == 1);
    CHECK(report.at("max_offdiagonal_overlap").get<double>() > 0.0);
    CHECK(report.at("max_offdiagonal_overlap").get<double>() < 1.0);
    fs::remove_all(dir);
}

TEST_CASE("gamma sweep run writes one row per requested ratio") {
    const fs::path dir = fresh_dir("sweep");
    const ConfigDocument cfg = parse_config(
        R"({"basis": {"kind": "radial", "p_max": 1},
            "sweep": {"gammas": [1.0, 2.0]},
            "quadrature": {"n_radial": 96, "n_angular": 64}})");
    RunOptions opt;
    opt.subcommand = "sweep-gamma";
    opt.out_dir = dir.string();
    run_pipeline(cfg, opt);
    const std::string csv = slurp(dir / "sweep_gamma.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.rfind("gamma,participation_schmidt_number,diagonal_fraction\n", 0) == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n2,") != std::string::npos);
    fs::remove_all(dir);
}
