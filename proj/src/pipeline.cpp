#include "lgent/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lgent/cgh.hpp"
#include "lgent/hash.hpp"
#include "lgent/mub.hpp"

namespace lgent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

// Collects everything a run writes so a failure can remove partial output,
// and so the manifest can list every emitted file. Writes go to a temp file
// in the same directory and are renamed into place.
class OutputTracker {
  public:
    explicit OutputTracker(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec && !fs::is_directory(dir_))
            throw DataError("cannot create output directory '" + dir + "': " +
                            ec.message());
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& bytes) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw DataError("write failed for '" + tmp.string() + "'");
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp, ec);
            throw DataError("cannot finalize '" + target.string() + "'");
        }
        names_.push_back(name);
    }

    // For writers that stream to a path themselves (e.g. PGM export).
    template <typename Fn>
    void write_with(const std::string& name, Fn&& writer) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".tmp");
        try {
            writer(tmp.string());
        } catch (...) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp, ec);
            throw DataError("cannot finalize '" + target.string() + "'");
        }
        names_.push_back(name);
    }

    void remove_all_written() {
        std::error_code ec;
        for (const auto& name : names_) fs::remove(dir_ / name, ec);
        names_.clear();
    }

    std::vector<std::pair<std::string, std::string>> fingerprints() const {
        std::vector<std::pair<std::string, std::string>> out;
        out.reserve(names_.size());
        std::vector<std::string> sorted = names_;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& name : sorted)
            out.push_back({name, file_fingerprint((dir_ / name).string())});
        return out;
    }

  private:
    fs::path dir_;
    std::vector<std::string> names_;
};

std::string record_json(const CoincidenceRecord& rec) {
    json doc;
    doc["schema_version"] = 1;
    doc["d"] = rec.dimension();
    doc["basis_s"] = rec.basis_s;
    doc["basis_i"] = rec.basis_i;
    json counts = json::array();
    for (int m = 0; m < rec.counts.rows(); ++m)
        for (int n = 0; n < rec.counts.cols(); ++n) counts.push_back(rec.counts(m, n));
    doc["counts"] = counts;
    doc["singles_s"] = std::vector<double>(rec.singles_s.data(),
                                           rec.singles_s.data() + rec.singles_s.size());
    doc["singles_i"] = std::vector<double>(rec.singles_i.data(),
                                           rec.singles_i.data() + rec.singles_i.size());
    doc["pairs_budget"] = rec.budget;
    doc["seed"] = rec.seed;
    doc["config_hash"] = rec.config_hash;
    return doc.dump(2) + "\n";
}

std::string counts_csv(const CoincidenceRecord& rec) {
    std::string out;
    for (int m = 0; m < rec.counts.rows(); ++m) {
        for (int n = 0; n < rec.counts.cols(); ++n) {
            if (n) out += ',';
            out += std::to_string(rec.counts(m, n));
        }
        out += '\n';
    }
    return out;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += fmt(m(r, c));
        }
        out += '\n';
    }
    return out;
}

std::vector<StateVector> standard_basis(int d) {
    std::vector<StateVector> basis;
    basis.reserve(d);
    for (int j = 0; j < d; ++j) {
        StateVector v;
        v.amplitudes = Eigen::VectorXcd::Zero(d);
        v.amplitudes[j] = 1.0;
        v.family = "standard";
        v.index = j;
        basis.push_back(std::move(v));
    }
    return basis;
}

Eigen::VectorXd resolve_efficiency(const Eigen::VectorXd& configured, int d,
                                   const char* arm) {
    if (configured.size() == 0) return Eigen::VectorXd::Constant(d, 1.0);
    if (configured.size() == 1) return Eigen::VectorXd::Constant(d, configured[0]);
    if (configured.size() != d)
        throw ConfigError(std::string("efficiency/") + arm + " has " +
                          std::to_string(configured.size()) + " entries for a " +
                          std::to_string(d) + "-mode basis");
    return configured;
}

CoefficientTensor build_tensor(const ConfigDocument& cfg,
                               const std::vector<LGIndex>& basis) {
    if (cfg.state_source == "maximal") {
        CoefficientTensor t;
        t.basis = basis;
        const int d = static_cast<int>(basis.size());
        t.values = Eigen::MatrixXcd::Identity(d, d) / std::sqrt(static_cast<double>(d));
        t.conjugate_idler_frame = true;
        t.quadrature_residual = 0.0;
        return t;
    }
    return lg_coefficients(basis, cfg.optics, true, cfg.quadrature);
}

// Measurement plan: which basis labels simulate produces records for.
std::vector<std::string> resolve_labels(const ConfigDocument& cfg,
                                        const RunOptions& opt, int d) {
    std::vector<std::string> labels;
    const std::vector<std::string>& requested =
        !opt.bases.empty() ? opt.bases : cfg.measure_bases;
    if (!requested.empty()) {
        for (const auto& label : requested) {
            const int r = mub_index_from_label(label);
            if (label != standard_label() && r < 0)
                throw ConfigError("unknown basis label '" + label + "'");
            if (r >= d)
                throw ConfigError("basis label '" + label + "' out of range for d=" +
                                  std::to_string(d));
            if (r >= 0 && !is_prime(d))
                throw ConfigError("MUB measurements need a prime dimension, got d=" +
                                  std::to_string(d));
            labels.push_back(label);
        }
        return labels;
    }
    int k = opt.mub_limit >= 0 ? opt.mub_limit : cfg.mub_count;
    if (k < 0) k = is_prime(d) ? d : 0;
    if (k > d)
        throw ConfigError("mub subset size " + std::to_string(k) +
                          " exceeds the dimension " + std::to_string(d));
    if (k > 0 && !is_prime(d))
        throw ConfigError("MUB measurements need a prime dimension, got d=" +
                          std::to_string(d));
    labels.push_back(standard_label());
    for (int r = 0; r < k; ++r) labels.push_back(mub_label(r));
    return labels;
}

std::string config_hash_of(const ConfigDocument& cfg) {
    return hex64(fnv1a64(serialize_config(cfg)));
}

json certification_json(const CertificationResult& cert, const FidelityEstimate& est,
                        int trials) {
    json doc;
    doc["method"] = est.method;
    doc["bases_used"] = est.bases_used;
    doc["fidelity"] = est.value;
    doc["fidelity_error"] = est.error;
    doc["error_trials"] = trials;
    doc["target"] = est.target.source;
    doc["certified_dimension"] = cert.d_ent;
    doc["bound"] = cert.bound;
    doc["margin"] = cert.margin;
    doc["bound_table"] = cert.bound_table;
    return doc;
}

void run_simulate(const ConfigDocument& cfg, const RunOptions& opt,
                  OutputTracker& out) {
    const std::vector<LGIndex> basis = enumerate_basis(cfg.basis);
    const int d = static_cast<int>(basis.size());
    const CoefficientTensor tensor = build_tensor(cfg, basis);
    const SchmidtReport schmidt = schmidt_analysis(tensor);

    JointState state;
    state.tensor = tensor;
    state.visibility = cfg.visibility;
    state.azimuthal_crosstalk = cfg.azimuthal_crosstalk;
    state.radial_crosstalk = cfg.radial_crosstalk;

    const Eigen::VectorXd eta_s = resolve_efficiency(cfg.eff_signal, d, "signal");
    const Eigen::VectorXd eta_i = resolve_efficiency(cfg.eff_idler, d, "idler");
    EfficiencyModel eff;
    eff.signal = eta_s;
    eff.idler = eta_i;

    const std::vector<std::string> labels = resolve_labels(cfg, opt, d);
    const bool needs_mubs = labels.size() > 1 || labels[0] != standard_label();
    MUBFamily fam;
    if (needs_mubs && is_prime(d)) fam = mub_family(d);
    const std::vector<StateVector> standard = standard_basis(d);
    const std::string confhash = config_hash_of(cfg);

    for (const auto& label : labels) {
        const int r = mub_index_from_label(label);
        const std::vector<StateVector>& projs =
            label == standard_label() ? standard : fam.bases[1 + r];
        CoincidenceRecord rec = simulate_counts(state, projs, projs, label, label, eff,
                                                cfg.budget, opt.seed);
        rec.config_hash = confhash;
        out.write("counts_" + label + ".json", record_json(rec));
        out.write("counts_" + label + ".csv", counts_csv(rec));
        out.write("probs_" + label + ".csv",
                  matrix_csv(probability_matrix(state, projs, projs)));
    }

    {
        std::string csv = "signal,idler,re,im\n";
        for (int s = 0; s < d; ++s)
            for (int i = 0; i < d; ++i)
                csv += mode_label(basis[s]) + "," + mode_label(basis[i]) + "," +
                       fmt(tensor.values(s, i).real()) + "," +
                       fmt(tensor.values(s, i).imag()) + "\n";
        out.write("tensor.csv", csv);
    }
    {
        std::string csv = "m,lambda\n";
        for (int m = 0; m < schmidt.lambda.size(); ++m)
            csv += std::to_string(m) + "," + fmt(schmidt.lambda[m]) + "\n";
        out.write("schmidt.csv", csv);
    }

    json report;
    report["dimension"] = d;
    report["source"] = cfg.state_source;
    report["idler_frame"] = tensor.conjugate_idler_frame ? "conjugate" : "physical";
    report["waist_ratio"] = cfg.optics.waist_ratio();
    report["pump_bandwidth_rad_per_um"] = cfg.optics.pump_bandwidth();
    report["collection_bandwidth_rad_per_um"] = cfg.optics.collection_bandwidth();
    report["collection_mode_waist_um"] = cfg.optics.collection_mode_waist_um();
    report["collection_waist_um"] = cfg.optics.params().collection_waist_um;
    report["collection_waist_source"] =
        cfg.collection_waist_derived ? "derived_from_waist_ratio" : "explicit";
    report["phase_matching_width_rad_per_um"] = cfg.optics.phase_matching_width();
    report["quadrature_residual"] = tensor.quadrature_residual;
    report["participation_schmidt_number"] = schmidt.participation;
    report["diagonal_fraction"] = schmidt.diagonal_fraction;
    report["visibility"] = cfg.visibility;
    report["pairs_budget"] = cfg.budget;
    report["seed"] = opt.seed;
    out.write("state_report.json", report.dump(2) + "\n");
}

std::vector<CoincidenceRecord> load_records(const fs::path& dir) {
    std::vector<std::string> names;
    if (fs::is_directory(dir))
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("counts_", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json")
                names.push_back(entry.path().string());
        }
    std::sort(names.begin(), names.end());
    std::vector<CoincidenceRecord> records;
    records.reserve(names.size());
    for (const auto& name : names) records.push_back(read_record(name));
    return records;
}

void run_certify(const ConfigDocument& cfg, const RunOptions& opt,
                 OutputTracker& out) {
    const std::string target =
        opt.target_override.empty() ? cfg.target : opt.target_override;
    if (target == "tilted")
        throw ConfigError(
            "tilted-target fidelity is not measurable from coincidence records; run "
            "the oracle subcommand, which evaluates the nominated target directly");
    if (target != "maximal")
        throw ConfigError("unknown certification target '" + target + "'");

    if (!cfg.fixture_fidelities.empty()) {
        std::string csv = "fidelity,dimension,certified_dimension,bound,margin\n";
        for (const auto& [fid, dim] : cfg.fixture_fidelities) {
            FidelityEstimate est;
            est.value = fid;
            est.method = "fixture";
            est.target = TargetState::uniform(dim);
            const CertificationResult cert =
                certify_dimension(est, est.target.lambda);
            csv += fmt(fid) + "," + std::to_string(dim) + "," +
                   std::to_string(cert.d_ent) + "," + fmt(cert.bound) + "," +
                   fmt(cert.margin) + "\n";
        }
        out.write("fixture_certification.csv", csv);
    }

    std::vector<CoincidenceRecord> records = load_records(out.dir());
    if (records.empty()) {
        if (!cfg.fixture_fidelities.empty()) return;
        throw DataError("certify: no counts_*.json records in '" +
                        out.dir().string() + "'");
    }

    const int d = records[0].dimension();
    for (const auto& rec : records)
        if (rec.dimension() != d)
            throw DataError("certify: records disagree on dimension");

    // Keep the standard record plus the selected MUB subset.
    const int limit = opt.mub_limit;
    std::vector<CoincidenceRecord> selected;
    std::set<std::string> wanted(opt.bases.begin(), opt.bases.end());
    int mub_records = 0;
    bool have_standard = false;
    for (auto& rec : records) {
        const int r = mub_index_from_label(rec.basis_s);
        if (!wanted.empty() && !wanted.count(rec.basis_s)) continue;
        if (r >= 0 && limit >= 0 && r >= limit) continue;
        if (rec.basis_s == standard_label()) have_standard = true;
        if (r >= 0) ++mub_records;
        selected.push_back(std::move(rec));
    }
    if (!have_standard) throw DataError("certify: no standard-basis record selected");
    if (mub_records == 0) throw DataError("certify: no MUB records selected");

    const TargetState uniform = TargetState::uniform(d);
    const bool complete = mub_records == d;
    FidelityEstimate est = complete ? exact_fidelity(selected)
                                    : fidelity_lower_bound(selected, uniform);
    FidelityEstimator estimator =
        [complete, uniform](const std::vector<CoincidenceRecord>& recs) {
            return complete ? exact_fidelity(recs).value
                            : fidelity_lower_bound(recs, uniform).value;
        };
    const MonteCarloStats stats =
        monte_carlo_errors(selected, estimator, cfg.error_trials, opt.seed);
    est.error = stats.stddev;
    const CertificationResult cert = certify_dimension(est, uniform.lambda);

    // Bound as the MUB subset grows, one row per added family.
    {
        std::vector<int> rs;
        for (const auto& rec : selected) {
            const int r = mub_index_from_label(rec.basis_s);
            if (r >= 0) rs.push_back(r);
        }
        std::sort(rs.begin(), rs.end());
        std::string csv = "k,fidelity_bound,certified_dimension\n";
        for (size_t k = 1; k <= rs.size(); ++k) {
            std::set<int> keep(rs.begin(), rs.begin() + static_cast<long>(k));
            std::vector<CoincidenceRecord> subset;
            for (const auto& rec : selected) {
                const int r = mub_index_from_label(rec.basis_s);
                if (r < 0 || keep.count(r)) subset.push_back(rec);
            }
            const FidelityEstimate fk = fidelity_lower_bound(subset, uniform);
            const CertificationResult ck = certify_dimension(fk, uniform.lambda);
            csv += std::to_string(k) + "," + fmt(fk.value) + "," +
                   std::to_string(ck.d_ent) + "\n";
        }
        out.write("mub_curve.csv", csv);
    }

    out.write("certification.json",
              certification_json(cert, est, cfg.error_trials).dump(2) + "\n");
}

void run_oracle(const ConfigDocument& cfg, const RunOptions& opt, OutputTracker& out) {
    (void)opt;
    const std::vector<LGIndex> basis = enumerate_basis(cfg.basis);
    const int d = static_cast<int>(basis.size());
    const CoefficientTensor tensor = build_tensor(cfg, basis);

    const TargetState uniform = TargetState::uniform(d);
    const FidelityEstimate f_uniform = oracle_fidelity(tensor, cfg.visibility, uniform);
    const CertificationResult c_uniform = certify_dimension(f_uniform, uniform.lambda);

    // Nominated target: Schmidt weights read off the tensor diagonal, the
    // oracle analog of nominating from corrected diagonal counts.
    Eigen::VectorXd diag = tensor.values.diagonal().cwiseAbs();
    const double norm = diag.norm();
    if (!(norm > 0.0))
        throw DataError("oracle: tensor diagonal is zero; no target to nominate");
    TargetState nominated;
    nominated.lambda = diag / norm;
    nominated.source = "nominated";
    const FidelityEstimate f_nom = oracle_fidelity(tensor, cfg.visibility, nominated);
    const CertificationResult c_nom = certify_dimension(f_nom, nominated.lambda);

    json doc;
    doc["dimension"] = d;
    doc["visibility"] = cfg.visibility;
    json& u = doc["uniform_target"];
    u["fidelity"] = f_uniform.value;
    u["certified_dimension"] = c_uniform.d_ent;
    u["bound"] = c_uniform.bound;
    u["margin"] = c_uniform.margin;
    json& n = doc["nominated_target"];
    n["lambda"] = std::vector<double>(nominated.lambda.data(),
                                      nominated.lambda.data() + nominated.lambda.size());
    n["fidelity"] = f_nom.value;
    n["certified_dimension"] = c_nom.d_ent;
    n["bound"] = c_nom.bound;
    n["margin"] = c_nom.margin;
    out.write("oracle_report.json", doc.dump(2) + "\n");
}

void run_mub(const ConfigDocument& cfg, const RunOptions& opt, OutputTracker& out) {
    (void)opt;
    const std::vector<LGIndex> basis = enumerate_basis(cfg.basis);
    const int d = static_cast<int>(basis.size());
    const MUBFamily fam = mub_family(d);

    std::string csv = "family,r,j,m,re,im\n";
    for (size_t b = 0; b < fam.bases.size(); ++b) {
        const std::string family = b == 0 ? "standard" : "mub";
        const int r = b == 0 ? 0 : static_cast<int>(b) - 1;
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
                csv += family + "," + std::to_string(r) + "," + std::to_string(j) +
                       "," + std::to_string(m) + "," +
                       fmt(fam.bases[b][j].amplitudes[m].real()) + "," +
                       fmt(fam.bases[b][j].amplitudes[m].imag()) + "\n";
    }
    out.write("mub_bases.csv", csv);

    double ortho_dev = 0.0;
    double unbiased_dev = 0.0;
    const double flat = 1.0 / d;
    for (size_t a = 1; a < fam.bases.size(); ++a) {
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                const std::complex<double> ip =
                    fam.bases[a][j].amplitudes.dot(fam.bases[a][k].amplitudes);
                ortho_dev = std::max(ortho_dev,
                                     std::abs(std::abs(ip) - (j == k ? 1.0 : 0.0)));
            }
        }
        for (size_t b = a + 1; b < fam.bases.size(); ++b)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const std::complex<double> ip =
                        fam.bases[a][j].amplitudes.dot(fam.bases[b][k].amplitudes);
                    unbiased_dev = std::max(unbiased_dev, std::abs(std::norm(ip) - flat));
                }
    }

    json report;
    report["dimension"] = d;
    report["bases"] = static_cast<int>(fam.bases.size());
    report["orthonormality_max_deviation"] = ortho_dev;
    report["unbiasedness_max_deviation"] = unbiased_dev;
    out.write("mub_report.json", report.dump(2) + "\n");
}

void run_cgh(const ConfigDocument& cfg, const RunOptions& opt, OutputTracker& out) {
    (void)opt;
    const std::vector<LGIndex> basis = enumerate_basis(cfg.basis);
    const int d = static_cast<int>(basis.size());
    const int n = cfg.cgh_grid_px;

    struct Item {
        std::string label;
        Eigen::MatrixXcd field;
    };
    std::vector<Item> items;
    for (const auto& mode : basis)
        items.push_back(
            {mode_label(mode), sample_mode_cartesian(mode, n, cfg.cgh_waist)});
    if (cfg.cgh_superposition) {
        if (!is_prime(d))
            throw ConfigError(
                "cgh: the MUB superposition needs a prime basis dimension; set "
                "cgh.superposition to false for d=" + std::to_string(d));
        if (cfg.cgh_mub_r >= d || cfg.cgh_mub_j >= d)
            throw ConfigError("cgh: mub_r and mub_j must be below the dimension");
        const StateVector u = mub_state(d, cfg.cgh_mub_r, cfg.cgh_mub_j);
        items.push_back({"mub_r" + std::to_string(cfg.cgh_mub_r) + "_j" +
                             std::to_string(cfg.cgh_mub_j),
                         sample_field_cartesian(basis, u.amplitudes, n, cfg.cgh_waist)});
    }

    std::string csv = "label,overlap,first_order_power,carrier_bin\n";
    for (const auto& item : items) {
        HologramMap holo =
            synthesize_type1(item.field, cfg.cgh_carrier_period_px, item.label);
        holo.pitch_um = cfg.cgh_pitch_um;
        out.write_with("cgh_" + item.label + ".pgm",
                       [&](const std::string& tmp) { write_pgm(holo, tmp); });
        json side;
        side["label"] = holo.label;
        side["grid_px"] = n;
        side["pitch_um"] = holo.pitch_um;
        side["carrier_period_px"] = holo.carrier_period_px;
        out.write("cgh_" + item.label + ".json", side.dump(2) + "\n");
        const ReconstructionReport rep = reconstruct_first_order(holo, item.field);
        csv += item.label + "," + fmt(rep.overlap) + "," + fmt(rep.first_order_power) +
               "," + std::to_string(rep.carrier_bin) + "\n";
    }
    out.write("cgh_report.csv", csv);
}

void run_sweep_gamma(const ConfigDocument& cfg, const RunOptions& opt,
                     OutputTracker& out) {
    (void)opt;
    const std::vector<LGIndex> basis = enumerate_basis(cfg.basis);
    const std::vector<GammaSweepRow> rows =
        sweep_gamma(cfg.optics, cfg.sweep_gammas, basis, cfg.quadrature);
    std::string csv = "gamma,participation_schmidt_number,diagonal_fraction\n";
    for (const auto& row : rows)
        csv += fmt(row.gamma) + "," + fmt(row.participation) + "," +
               fmt(row.diagonal_fraction) + "\n";
    out.write("sweep_gamma.csv", csv);
}

void run_phase_only(const ConfigDocument& cfg, const RunOptions& opt,
                    OutputTracker& out) {
    (void)opt;
    const int d = cfg.phase_only_dimension;
    const int r = cfg.phase_only_mub_r;
    if (!is_prime(d))
        throw ConfigError("phase_only: dimension must be prime, got " +
                          std::to_string(d));
    if (r >= d) throw ConfigError("phase_only: mub_r must be below the dimension");

    std::vector<LGIndex> radial;
    for (int p = 0; p < d; ++p) radial.push_back({0, p});
    const double waist = 1.0;
    const int max_group = mode_group(radial.back());
    // Unit-amplitude fields weight every patch of the domain equally, so the
    // padded quadrature radius used for mode integrals would drown the mode
    // structure in empty aperture. Clip at the rms radius of the highest mode
    // group instead (<t> = 0.5 rho^2 w^2 averages to the group number).
    const double rho_max = std::sqrt(2.0 * max_group) / waist;
    auto grid = std::make_shared<TransverseGrid>(cfg.quadrature.n_radial,
                                                 cfg.quadrature.n_angular, rho_max);

    std::vector<SampledField> true_fields;
    for (const auto& mode : radial) true_fields.push_back(lg_sample(mode, waist, grid));

    std::vector<SampledField> mub_fields;
    for (int j = 0; j < d; ++j) {
        const StateVector u = mub_state(d, r, j);
        mub_fields.push_back(superpose(true_fields, u.amplitudes));
    }

    const OverlapMatrix self = phase_only_overlaps(true_fields, "phase_only_radial");
    const OverlapMatrix cross = phase_only_overlaps(true_fields, mub_fields,
                                                    "phase_only_radial",
                                                    "phase_only_mub");
    out.write("phase_only_radial.csv", matrix_csv(self.values));
    out.write("phase_only_cross.csv", matrix_csv(cross.values));

    double max_offdiag = 0.0;
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
            if (m != n) max_offdiag = std::max(max_offdiag, self.values(m, n));
    const double flat = 1.0 / d;
    const double max_flat_dev = (cross.values.array() - flat).abs().maxCoeff();

    json report;
    report["dimension"] = d;
    report["mub_r"] = r;
    report["max_offdiagonal_overlap"] = max_offdiag;
    report["max_deviation_from_flat"] = max_flat_dev;
    out.write("phase_only_report.json", report.dump(2) + "\n");
}

}  // namespace

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for fingerprinting");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
        if (in.eof()) break;
    }
    return hex64(h);
}

void write_record(const CoincidenceRecord& rec, const std::string& dir,
                  const std::string& label) {
    const fs::path target = fs::path(dir) / ("counts_" + label + ".json");
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
        out << record_json(rec);
        if (!out) throw DataError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw DataError("cannot finalize '" + target.string() + "'");
}

CoincidenceRecord read_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open record '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("record '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != 1)
            throw DataError("record '" + path + "' has an unsupported schema version");
        const int d = doc.at("d").get<int>();
        if (d < 1) throw DataError("record '" + path + "' has d < 1");
        CoincidenceRecord rec;
        rec.basis_s = doc.at("basis_s").get<std::string>();
        rec.basis_i = doc.at("basis_i").get<std::string>();
        const auto& counts = doc.at("counts");
        if (!counts.is_array() || counts.size() != static_cast<size_t>(d) * d)
            throw DataError("record '" + path + "' counts array is not d*d long");
        rec.counts.resize(d, d);
        for (int m = 0; m < d; ++m)
            for (int n = 0; n < d; ++n) {
                const auto& v = counts[static_cast<size_t>(m) * d + n];
                if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
                    throw DataError("record '" + path +
                                    "' has a negative or non-integer count");
                rec.counts(m, n) = v.get<std::int64_t>();
            }
        const auto read_singles = [&](const char* key) {
            const auto& arr = doc.at(key);
            if (!arr.is_array() || arr.size() != static_cast<size_t>(d))
                throw DataError("record '" + path + "' " + key + " is not length d");
            Eigen::VectorXd v(d);
            for (int m = 0; m < d; ++m) v[m] = arr[static_cast<size_t>(m)].get<double>();
            return v;
        };
        rec.singles_s = read_singles("singles_s");
        rec.singles_i = read_singles("singles_i");
        rec.budget = doc.at("pairs_budget").get<double>();
        rec.seed = doc.at("seed").get<std::uint64_t>();
        rec.config_hash = doc.at("config_hash").get<std::string>();
        return rec;
    } catch (const json::exception& e) {
        throw DataError("record '" + path + "' is missing schema fields: " + e.what());
    }
}

RunManifest run_pipeline(const ConfigDocument& cfg, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string out_dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
    if (!opt.target_override.empty() && opt.target_override != "maximal" &&
        opt.target_override != "tilted")
        throw ConfigError("unknown target '" + opt.target_override + "'");

    OutputTracker out(out_dir);
    try {
        if (opt.subcommand == "simulate")
            run_simulate(cfg, opt, out);
        else if (opt.subcommand == "certify")
            run_certify(cfg, opt, out);
        else if (opt.subcommand == "mub")
            run_mub(cfg, opt, out);
        else if (opt.subcommand == "cgh")
            run_cgh(cfg, opt, out);
        else if (opt.subcommand == "sweep-gamma")
            run_sweep_gamma(cfg, opt, out);
        else if (opt.subcommand == "phase-only")
            run_phase_only(cfg, opt, out);
        else if (opt.subcommand == "oracle")
            run_oracle(cfg, opt, out);
        else
            throw ConfigError("unknown subcommand '" + opt.subcommand + "'");

        RunManifest manifest;
        manifest.subcommand = opt.subcommand;
        manifest.seed = opt.seed;
        manifest.config_json = serialize_config(cfg);
        manifest.files = out.fingerprints();

        json doc;
        doc["tool_version"] = kToolVersion;
        doc["subcommand"] = manifest.subcommand;
        doc["seed"] = manifest.seed;
        doc["config"] = json::parse(manifest.config_json);
        json files = json::array();
        for (const auto& [name, hash] : manifest.files)
            files.push_back({{"name", name}, {"fnv1a64", hash}});
        doc["files"] = files;
        out.write("manifest.json", doc.dump(2) + "\n");

        manifest.wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        return manifest;
    } catch (...) {
        out.remove_all_written();
        throw;
    }
}

}  // namespace lgent
