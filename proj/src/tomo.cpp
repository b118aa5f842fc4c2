#include "lgent/tomo.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "lgent/hash.hpp"

namespace lgent {

std::string standard_label() { return "standard"; }

std::string mub_label(int r) { return "mub_r=" + std::to_string(r); }

int mub_index_from_label(const std::string& label) {
    const std::string prefix = "mub_r=";
    if (label.rfind(prefix, 0) != 0) return -1;
    try {
        size_t used = 0;
        const int r = std::stoi(label.substr(prefix.size()), &used);
        if (used != label.size() - prefix.size() || r < 0) return -1;
        return r;
    } catch (const std::exception&) {
        return -1;
    }
}

EfficiencyModel EfficiencyModel::uniform(int d, double eta) {
    if (d < 1) throw ConfigError("EfficiencyModel: dimension must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0))
        throw ConfigError("EfficiencyModel: efficiency must lie in (0, 1]");
    EfficiencyModel m;
    m.signal = Eigen::VectorXd::Constant(d, eta);
    m.idler = Eigen::VectorXd::Constant(d, eta);
    return m;
}

namespace {

void validate_state(const JointState& state) {
    if (state.visibility < 0.0 || state.visibility > 1.0)
        throw ConfigError("JointState: visibility must lie in [0, 1]");
    if (state.azimuthal_crosstalk < 0.0 || state.radial_crosstalk < 0.0)
        throw ConfigError("JointState: cross-talk strengths must be nonnegative");
    if (state.azimuthal_crosstalk + state.radial_crosstalk >= 1.0)
        throw ConfigError("JointState: cross-talk strengths must sum below 1");
    const int d = static_cast<int>(state.tensor.values.rows());
    if (d == 0 || state.tensor.values.cols() != d)
        throw ConfigError("JointState: coefficient tensor must be square and nonempty");
    if (static_cast<int>(state.tensor.basis.size()) != d)
        throw ConfigError("JointState: basis size does not match tensor dimension");
}

// Applies the measurement-side index-shift mixing: a projector designed for
// mode (l, p) also couples to (l +- 1, p) with amplitude sqrt(eps_l / 2) and
// to (l, p +- 1) with amplitude sqrt(eps_p / 2). Leakage into modes outside
// the basis is dropped and the vector renormalized.
Eigen::VectorXcd distort_projector(const Eigen::VectorXcd& amps,
                                   const std::vector<LGIndex>& basis, double eps_l,
                                   double eps_p,
                                   const std::map<std::pair<int, int>, int>& index) {
    if (eps_l == 0.0 && eps_p == 0.0) return amps;
    const double keep = std::sqrt(1.0 - eps_l - eps_p);
    const double al = std::sqrt(eps_l / 2.0);
    const double ap = std::sqrt(eps_p / 2.0);
    Eigen::VectorXcd out = keep * amps;
    const int d = static_cast<int>(basis.size());
    auto add = [&](int ell, int p, const std::complex<double>& v) {
        const auto it = index.find({ell, p});
        if (it != index.end()) out[it->second] += v;
    };
    for (int m = 0; m < d; ++m) {
        if (amps[m] == std::complex<double>(0.0, 0.0)) continue;
        const LGIndex& mode = basis[m];
        if (al > 0.0) {
            add(mode.ell + 1, mode.p, al * amps[m]);
            add(mode.ell - 1, mode.p, al * amps[m]);
        }
        if (ap > 0.0) {
            add(mode.ell, mode.p + 1, ap * amps[m]);
            add(mode.ell, mode.p - 1, ap * amps[m]);
        }
    }
    const double n = out.norm();
    if (!(n > 1e-15))
        throw ConfigError("cross-talk channel annihilated a projector");
    return out / n;
}

std::map<std::pair<int, int>, int> basis_index(const std::vector<LGIndex>& basis) {
    std::map<std::pair<int, int>, int> index;
    for (size_t i = 0; i < basis.size(); ++i)
        index[{basis[i].ell, basis[i].p}] = static_cast<int>(i);
    return index;
}

void check_projector(const JointState& state, const StateVector& proj,
                     const char* arm) {
    if (proj.dimension() != static_cast<int>(state.tensor.basis.size()))
        throw ConfigError(std::string("born_probability: ") + arm +
                          " projector dimension does not match the state basis");
}

}  // namespace

double born_probability(const JointState& state, const StateVector& proj_s,
                        const StateVector& proj_i) {
    validate_state(state);
    check_projector(state, proj_s, "signal");
    check_projector(state, proj_i, "idler");
    const auto index = basis_index(state.tensor.basis);
    const Eigen::VectorXcd a =
        distort_projector(proj_s.amplitudes, state.tensor.basis,
                          state.azimuthal_crosstalk, state.radial_crosstalk, index);
    const Eigen::VectorXcd b =
        distort_projector(proj_i.amplitudes, state.tensor.basis,
                          state.azimuthal_crosstalk, state.radial_crosstalk, index);
    const std::complex<double> amp = a.dot(state.tensor.values * b);
    const int d = proj_s.dimension();
    const double p = state.visibility * std::norm(amp) +
                     (1.0 - state.visibility) / static_cast<double>(d) / d;
    return std::clamp(p, 0.0, 1.0);
}

Eigen::MatrixXd probability_matrix(const JointState& state,
                                   const std::vector<StateVector>& basis_s,
                                   const std::vector<StateVector>& basis_i) {
    validate_state(state);
    const int d = static_cast<int>(state.tensor.basis.size());
    if (basis_s.empty() || basis_i.empty())
        throw ConfigError("probability_matrix: empty projector set");
    const auto index = basis_index(state.tensor.basis);
    Eigen::MatrixXcd A(d, static_cast<int>(basis_s.size()));
    Eigen::MatrixXcd B(d, static_cast<int>(basis_i.size()));
    for (size_t j = 0; j < basis_s.size(); ++j) {
        check_projector(state, basis_s[j], "signal");
        A.col(j) = distort_projector(basis_s[j].amplitudes, state.tensor.basis,
                                     state.azimuthal_crosstalk, state.radial_crosstalk,
                                     index);
    }
    for (size_t j = 0; j < basis_i.size(); ++j) {
        check_projector(state, basis_i[j], "idler");
        B.col(j) = distort_projector(basis_i[j].amplitudes, state.tensor.basis,
                                     state.azimuthal_crosstalk, state.radial_crosstalk,
                                     index);
    }
    const Eigen::MatrixXcd amp = A.adjoint() * state.tensor.values * B;
    const double noise = (1.0 - state.visibility) / static_cast<double>(d) / d;
    return (state.visibility * amp.cwiseAbs2().array() + noise)
        .cwiseMin(1.0)
        .cwiseMax(0.0)
        .matrix();
}

CoincidenceRecord simulate_counts(const JointState& state,
                                  const std::vector<StateVector>& basis_s,
                                  const std::vector<StateVector>& basis_i,
                                  const std::string& label_s, const std::string& label_i,
                                  const EfficiencyModel& eff, double budget,
                                  std::uint64_t seed) {
    if (!(budget > 0.0)) throw ConfigError("simulate_counts: budget must be positive");
    const Eigen::MatrixXd p = probability_matrix(state, basis_s, basis_i);
    const int rows = static_cast<int>(p.rows());
    const int cols = static_cast<int>(p.cols());
    if (eff.signal.size() != rows || eff.idler.size() != cols)
        throw ConfigError("simulate_counts: efficiency vector length mismatch");
    if ((eff.signal.array() <= 0.0).any() || (eff.signal.array() > 1.0).any() ||
        (eff.idler.array() <= 0.0).any() || (eff.idler.array() > 1.0).any())
        throw ConfigError("simulate_counts: efficiencies must lie in (0, 1]");

    // One independent, order-free stream per (seed, basis pair).
    const std::uint64_t stream =
        mix64(seed ^ fnv1a64(label_s + "\x1f" + label_i));
    std::mt19937_64 rng(stream);

    CoincidenceRecord rec;
    rec.basis_s = label_s;
    rec.basis_i = label_i;
    rec.budget = budget;
    rec.seed = seed;
    rec.counts.resize(rows, cols);
    for (int m = 0; m < rows; ++m) {
        for (int n = 0; n < cols; ++n) {
            const double mu = budget * p(m, n) * eff.signal[m] * eff.idler[n];
            if (mu > 0.0) {
                std::poisson_distribution<std::int64_t> poisson(mu);
                rec.counts(m, n) = poisson(rng);
            } else {
                rec.counts(m, n) = 0;
            }
        }
    }
    rec.singles_s.resize(rows);
    rec.singles_i.resize(cols);
    for (int m = 0; m < rows; ++m)
        rec.singles_s[m] = std::round(budget * eff.signal[m] * p.row(m).sum());
    for (int n = 0; n < cols; ++n)
        rec.singles_i[n] = std::round(budget * eff.idler[n] * p.col(n).sum());
    return rec;
}

Eigen::MatrixXd loss_correct(const CoincidenceRecord& record) {
    const int rows = static_cast<int>(record.counts.rows());
    const int cols = static_cast<int>(record.counts.cols());
    if (record.singles_s.size() != rows || record.singles_i.size() != cols)
        throw DataError("loss_correct: singles length does not match counts");
    for (int m = 0; m < rows; ++m)
        if (!(record.singles_s[m] > 0.0))
            throw DataError("loss_correct: zero singles for signal mode " +
                            std::to_string(m) + " in basis '" + record.basis_s +
                            "'; mode is uncorrectable");
    for (int n = 0; n < cols; ++n)
        if (!(record.singles_i[n] > 0.0))
            throw DataError("loss_correct: zero singles for idler mode " +
                            std::to_string(n) + " in basis '" + record.basis_i +
                            "'; mode is uncorrectable");
    const Eigen::VectorXd eta_s = record.singles_s / record.singles_s.maxCoeff();
    const Eigen::VectorXd eta_i = record.singles_i / record.singles_i.maxCoeff();
    Eigen::MatrixXd corrected = record.counts.cast<double>();
    for (int m = 0; m < rows; ++m)
        for (int n = 0; n < cols; ++n) corrected(m, n) /= eta_s[m] * eta_i[n];
    return corrected;
}

TargetState TargetState::uniform(int d) {
    if (d < 1) throw ConfigError("TargetState: dimension must be >= 1");
    TargetState t;
    t.lambda = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    t.source = "uniform";
    return t;
}

TargetState nominate_target(const Eigen::MatrixXd& corrected_counts) {
    if (corrected_counts.rows() != corrected_counts.cols() ||
        corrected_counts.rows() == 0)
        throw DataError("nominate_target: count matrix must be square and nonempty");
    const Eigen::VectorXd diag = corrected_counts.diagonal();
    if ((diag.array() < 0.0).any())
        throw DataError("nominate_target: negative diagonal counts");
    const double total = diag.sum();
    if (!(total > 0.0)) throw DataError("nominate_target: all-zero diagonal");
    TargetState t;
    t.lambda = (diag / total).array().sqrt();
    t.source = "nominated";
    return t;
}

std::map<int, double> modegroup_histogram(const CoincidenceRecord& record,
                                          const std::vector<LGIndex>& basis) {
    const int d = record.dimension();
    if (static_cast<int>(basis.size()) != d)
        throw ConfigError("modegroup_histogram: basis size does not match record");
    std::map<int, double> hist;
    double total = 0.0;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const double c = static_cast<double>(record.counts(m, n));
            hist[std::abs(mode_group(basis[m]) - mode_group(basis[n]))] += c;
            total += c;
        }
    }
    if (total > 0.0)
        for (auto& [dmg, mass] : hist) mass /= total;
    return hist;
}

}  // namespace lgent
