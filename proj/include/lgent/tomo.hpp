#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgent/mub.hpp"
#include "lgent/spdc.hpp"

namespace lgent {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// The state the simulated measurements act on: a pure two-photon amplitude
// matrix mixed with white noise of weight (1 - visibility), plus hologram
// cross-talk strengths applied on the projector side.
struct JointState {
    CoefficientTensor tensor;
    double visibility = 1.0;
    double azimuthal_crosstalk = 0.0;  // epsilon_l, leaks into ell +- 1
    double radial_crosstalk = 0.0;     // epsilon_p, leaks into p +- 1
};

// Per-mode detection efficiencies for the two arms.
struct EfficiencyModel {
    Eigen::VectorXd signal;
    Eigen::VectorXd idler;

    static EfficiencyModel uniform(int d, double eta = 1.0);
};

// Joint detection probability for projecting the signal arm on `proj_s` and
// the idler arm on `proj_i` (idler amplitudes are phase-conjugated by the
// measurement, matching the tensor's conjugate idler frame):
//   p = v |sum_si conj(a_s) b_i C(s,i)|^2 + (1 - v) / d^2
// with cross-talk-distorted, renormalized projector vectors.
double born_probability(const JointState& state, const StateVector& proj_s,
                        const StateVector& proj_i);

// All d x d probabilities for one basis pair in a single pass.
Eigen::MatrixXd probability_matrix(const JointState& state,
                                   const std::vector<StateVector>& basis_s,
                                   const std::vector<StateVector>& basis_i);

// Raw coincidence counts for one (signal basis, idler basis) measurement
// setting, plus deterministic singles used later for loss correction.
// Basis labels follow the "standard" / "mub_r=3" convention.
struct CoincidenceRecord {
    std::string basis_s;
    std::string basis_i;
    CountMatrix counts;
    Eigen::VectorXd singles_s;
    Eigen::VectorXd singles_i;
    double budget = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;

    int dimension() const { return static_cast<int>(counts.rows()); }
};

std::string standard_label();
std::string mub_label(int r);
// Parses "mub_r=<n>" labels; returns -1 for anything else.
int mub_index_from_label(const std::string& label);

// Poisson-sample counts for one basis pair. Every cell gets its own draw
// from Poisson(budget * p_mn * eta_s[m] * eta_i[n]); the generator is
// seeded from (seed, basis labels) so records are independent of the order
// in which bases are simulated. Singles are deterministic expectations.
CoincidenceRecord simulate_counts(const JointState& state,
                                  const std::vector<StateVector>& basis_s,
                                  const std::vector<StateVector>& basis_i,
                                  const std::string& label_s, const std::string& label_i,
                                  const EfficiencyModel& eff, double budget,
                                  std::uint64_t seed);

// Divide each cell by the product of estimated relative efficiencies
// eta_m = S_m / max(S). Throws DataError naming the mode if a single is zero.
Eigen::MatrixXd loss_correct(const CoincidenceRecord& record);

// Schmidt-like weights read off the loss-corrected standard-basis diagonal:
// lambda_m = sqrt(N_mm / sum_n N_nn). Order follows the basis, no sorting.
struct TargetState {
    Eigen::VectorXd lambda;
    std::string source;  // "uniform" or "nominated"

    static TargetState uniform(int d);
};

TargetState nominate_target(const Eigen::MatrixXd& corrected_counts);

// Coincidence mass binned by |mode_group(m) - mode_group(n)|, normalized to
// total counts.
std::map<int, double> modegroup_histogram(const CoincidenceRecord& record,
                                          const std::vector<LGIndex>& basis);

}  // namespace lgent
