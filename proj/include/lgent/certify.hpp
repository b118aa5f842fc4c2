#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lgent/tomo.hpp"

namespace lgent {

// Fraction of coincidences on the correlated diagonal of one basis setting.
double p_corr(const Eigen::MatrixXd& counts);
double p_corr(const CoincidenceRecord& record);

struct FidelityEstimate {
    double value = 0.0;
    double error = 0.0;  // zero unless filled in by monte_carlo_errors
    std::string method;  // "exact-complete-MUB", "lower-bound-k-MUB" or "oracle"
    std::vector<std::string> bases_used;
    TargetState target;
};

// Fidelity to the maximally entangled state from a complete measurement:
// the standard basis plus all d MUBs. F = (sum_b p_corr(b) - 1) / d.
// Matrices may be raw or loss-corrected counts, or probabilities; each
// basis is normalized by its own total.
FidelityEstimate exact_fidelity(const Eigen::MatrixXd& standard_counts,
                                const std::vector<Eigen::MatrixXd>& mub_counts);

// Label-driven variant: expects one "standard" record plus "mub_r=0" ..
// "mub_r=d-1". Counts are loss-corrected via singles before use.
FidelityEstimate exact_fidelity(const std::vector<CoincidenceRecord>& records);

// Lower bound on the fidelity to the maximally entangled state from the
// standard basis plus any subset of MUBs; each count matrix is paired with
// its MUB label r. Diagonal correlations give the F1 part; coherences are
// bounded by Cauchy-Schwarz with the residual MUB phase averages as
// coefficients, so the estimate never exceeds the true fidelity and becomes
// exact with the complete set. Only the uniform target is supported; for a
// nominated target use the oracle path, which has access to the state.
FidelityEstimate fidelity_lower_bound(
    const Eigen::MatrixXd& standard_counts,
    const std::vector<std::pair<int, Eigen::MatrixXd>>& mub_counts,
    const TargetState& target);

FidelityEstimate fidelity_lower_bound(const std::vector<CoincidenceRecord>& records,
                                      const TargetState& target);

// Fidelity of the simulated state (tensor + isotropic noise) to
// sum_m lambda_m |mm>, evaluated directly from the state.
FidelityEstimate oracle_fidelity(const CoefficientTensor& tensor, double visibility,
                                 const TargetState& target);

// Largest fidelity to target(lambda) reachable by any state of Schmidt rank
// at most r: the sum of the r largest lambda_m^2.
double schmidt_rank_bound(const Eigen::VectorXd& lambda, int r);

struct CertificationResult {
    int d_ent = 0;
    double fidelity = 0.0;
    double bound = 0.0;   // B_{d_ent - 1}, the bound the fidelity beats
    double margin = 0.0;  // fidelity - bound
    std::vector<double> bound_table;  // bound_table[r] = B_r, r = 0..d
};

// Certified entanglement dimensionality: d_ent = 1 + max{r >= 0 : F > B_r};
// d_ent = 1 means nothing beyond separability is certified.
CertificationResult certify_dimension(const FidelityEstimate& fidelity,
                                      const Eigen::VectorXd& lambda);

struct MonteCarloStats {
    double mean = 0.0;
    double stddev = 0.0;
    int trials = 0;
};

using FidelityEstimator =
    std::function<double(const std::vector<CoincidenceRecord>&)>;

// Error bar for any count-based estimator: resample every cell of every
// record as Poisson(N_observed), re-run the estimator, report mean and
// sample standard deviation. Deterministic for a given seed; trials >= 100.
MonteCarloStats monte_carlo_errors(const std::vector<CoincidenceRecord>& records,
                                   const FidelityEstimator& estimator, int trials,
                                   std::uint64_t seed);

}  // namespace lgent
