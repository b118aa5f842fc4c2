#include "lgent/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lgent/hash.hpp"
#include "lgent/mub.hpp"

namespace lgent {

double p_corr(const Eigen::MatrixXd& counts) {
    if (counts.rows() != counts.cols() || counts.rows() == 0)
        throw DataError("p_corr: count matrix must be square and nonempty");
    if ((counts.array() < 0.0).any())
        throw DataError("p_corr: negative counts");
    const double total = counts.sum();
    if (!(total > 0.0)) throw DataError("p_corr: zero total counts");
    return counts.diagonal().sum() / total;
}

double p_corr(const CoincidenceRecord& record) {
    return p_corr(record.counts.cast<double>());
}

namespace {

Eigen::MatrixXd normalized(const Eigen::MatrixXd& counts) {
    const double total = counts.sum();
    if (!(total > 0.0)) throw DataError("fidelity estimate: zero total counts");
    return counts / total;
}

// Finds the standard record and the requested MUB records by label,
// loss-corrects each, and returns (standard, [(r, corrected)...]).
std::pair<Eigen::MatrixXd, std::vector<std::pair<int, Eigen::MatrixXd>>>
split_records(const std::vector<CoincidenceRecord>& records) {
    const CoincidenceRecord* standard = nullptr;
    std::vector<std::pair<int, const CoincidenceRecord*>> mubs;
    for (const auto& rec : records) {
        if (rec.basis_s != rec.basis_i)
            throw DataError("fidelity estimate: record '" + rec.basis_s + "'/'" +
                            rec.basis_i + "' mixes basis families");
        if (rec.basis_s == standard_label()) {
            if (standard) throw DataError("fidelity estimate: duplicate standard record");
            standard = &rec;
            continue;
        }
        const int r = mub_index_from_label(rec.basis_s);
        if (r < 0)
            throw DataError("fidelity estimate: unrecognized basis label '" +
                            rec.basis_s + "'");
        mubs.push_back({r, &rec});
    }
    if (!standard)
        throw DataError("fidelity estimate: missing standard-basis record");
    if (mubs.empty())
        throw DataError("fidelity estimate: no MUB records supplied");
    std::sort(mubs.begin(), mubs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < mubs.size(); ++i)
        if (mubs[i].first == mubs[i - 1].first)
            throw DataError("fidelity estimate: duplicate MUB record r=" +
                            std::to_string(mubs[i].first));

    std::vector<std::pair<int, Eigen::MatrixXd>> corrected;
    corrected.reserve(mubs.size());
    for (const auto& [r, rec] : mubs) corrected.push_back({r, loss_correct(*rec)});
    return {loss_correct(*standard), std::move(corrected)};
}

}  // namespace

FidelityEstimate exact_fidelity(const Eigen::MatrixXd& standard_counts,
                                const std::vector<Eigen::MatrixXd>& mub_counts) {
    const int d = static_cast<int>(standard_counts.rows());
    if (static_cast<int>(mub_counts.size()) != d)
        throw DataError("exact_fidelity: needs all " + std::to_string(d) +
                        " MUB records, got " + std::to_string(mub_counts.size()));
    double sum = p_corr(standard_counts);
    for (const auto& m : mub_counts) {
        if (m.rows() != d || m.cols() != d)
            throw DataError("exact_fidelity: dimension mismatch across records");
        sum += p_corr(m);
    }
    FidelityEstimate est;
    est.value = (sum - 1.0) / d;
    est.method = "exact-complete-MUB";
    est.bases_used.push_back(standard_label());
    for (int r = 0; r < d; ++r) est.bases_used.push_back(mub_label(r));
    est.target = TargetState::uniform(d);
    return est;
}

FidelityEstimate exact_fidelity(const std::vector<CoincidenceRecord>& records) {
    auto [standard, mubs] = split_records(records);
    const int d = static_cast<int>(standard.rows());
    if (static_cast<int>(mubs.size()) != d)
        throw DataError("exact_fidelity: needs all " + std::to_string(d) +
                        " MUB records, got " + std::to_string(mubs.size()));
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(mubs.size());
    for (int r = 0; r < d; ++r) {
        if (mubs[r].first != r)
            throw DataError("exact_fidelity: missing MUB record r=" + std::to_string(r));
        mats.push_back(std::move(mubs[r].second));
    }
    return exact_fidelity(standard, mats);
}

FidelityEstimate fidelity_lower_bound(
    const Eigen::MatrixXd& standard_counts,
    const std::vector<std::pair<int, Eigen::MatrixXd>>& mub_counts,
    const TargetState& target) {
    if (target.source != "uniform")
        throw ConfigError(
            "fidelity_lower_bound: only the uniform (maximally entangled) target is "
            "supported by the measured-count estimator; nominated targets go through "
            "the oracle path");
    if (mub_counts.empty())
        throw DataError("fidelity_lower_bound: need at least one MUB record");
    const int d = static_cast<int>(standard_counts.rows());
    if (standard_counts.cols() != d || d < 2)
        throw DataError("fidelity_lower_bound: standard record must be square");

    const Eigen::MatrixXd p_std = normalized(standard_counts);

    double avg_pcorr = 0.0;
    std::vector<int> labels;
    for (const auto& [r, m] : mub_counts) {
        if (r < 0 || r >= d)
            throw DataError("fidelity_lower_bound: MUB label r=" + std::to_string(r) +
                            " out of range");
        if (m.rows() != d || m.cols() != d)
            throw DataError("fidelity_lower_bound: dimension mismatch across records");
        labels.push_back(r);
        avg_pcorr += p_corr(m);
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw DataError("fidelity_lower_bound: duplicate MUB label");
    avg_pcorr /= static_cast<double>(mub_counts.size());

    // Phase averages over the chosen subset, computed from the actual MUB
    // vectors: qbar[dl](m, n) = avg_r sum_j u_m conj(u_{m-dl}) conj(u_n) u_{n-dl}.
    // For odd primes this is (1/d) avg_r e^{2 pi i 2 r dl (m-n) / d}; computing
    // it numerically keeps d = 2 (Pauli bases) on the same footing.
    const MUBFamily fam = mub_family(d);
    std::vector<Eigen::MatrixXcd> qbar(d, Eigen::MatrixXcd::Zero(d, d));
    for (int r : labels) {
        const auto& basis = fam.bases[1 + r];
        for (int dl = 1; dl < d; ++dl) {
            Eigen::MatrixXcd x(d, d);
            for (int j = 0; j < d; ++j)
                for (int m = 0; m < d; ++m)
                    x(j, m) = basis[j].amplitudes[m] *
                              std::conj(basis[j].amplitudes[(m - dl + d) % d]);
            qbar[dl] += (x.adjoint() * x).conjugate();
        }
    }
    for (int dl = 1; dl < d; ++dl) qbar[dl] /= static_cast<double>(labels.size());

    // F >= avg p_corr - sum_{dl != 0} [ sum_m qbar_mm p(m, m-dl)
    //      + sum_{m != n} |qbar_mn| sqrt(p(m, m-dl) p(n, n-dl)) ].
    double slack = 0.0;
    for (int dl = 1; dl < d; ++dl) {
        for (int m = 0; m < d; ++m) {
            const double pm = p_std(m, (m - dl + d) % d);
            slack += std::real(qbar[dl](m, m)) * pm;
            for (int n = m + 1; n < d; ++n) {
                const double pn = p_std(n, (n - dl + d) % d);
                slack += 2.0 * std::abs(qbar[dl](m, n)) * std::sqrt(pm * pn);
            }
        }
    }

    FidelityEstimate est;
    est.value = avg_pcorr - slack;
    est.method = "lower-bound-k-MUB";
    est.bases_used.push_back(standard_label());
    for (int r : labels) est.bases_used.push_back(mub_label(r));
    est.target = TargetState::uniform(d);
    return est;
}

FidelityEstimate fidelity_lower_bound(const std::vector<CoincidenceRecord>& records,
                                      const TargetState& target) {
    auto [standard, mubs] = split_records(records);
    return fidelity_lower_bound(standard, mubs, target);
}

FidelityEstimate oracle_fidelity(const CoefficientTensor& tensor, double visibility,
                                 const TargetState& target) {
    const int d = static_cast<int>(tensor.values.rows());
    if (target.lambda.size() != d)
        throw ConfigError("oracle_fidelity: target length does not match tensor");
    if (visibility < 0.0 || visibility > 1.0)
        throw ConfigError("oracle_fidelity: visibility must lie in [0, 1]");
    const std::complex<double> amp =
        (target.lambda.cast<std::complex<double>>().array() *
         tensor.values.diagonal().array())
            .sum();
    FidelityEstimate est;
    est.value = visibility * std::norm(amp) +
                (1.0 - visibility) / static_cast<double>(d) / d;
    est.method = "oracle";
    est.target = target;
    return est;
}

double schmidt_rank_bound(const Eigen::VectorXd& lambda, int r) {
    const int d = static_cast<int>(lambda.size());
    if (d == 0) throw ConfigError("schmidt_rank_bound: empty Schmidt vector");
    if (std::abs(lambda.norm() - 1.0) > 1e-9)
        throw ConfigError("schmidt_rank_bound: Schmidt vector must be normalized");
    if (r < 0 || r > d)
        throw ConfigError("schmidt_rank_bound: rank out of range [0, d]");
    std::vector<double> sq(d);
    for (int m = 0; m < d; ++m) sq[m] = lambda[m] * lambda[m];
    std::sort(sq.begin(), sq.end(), std::greater<>());
    double b = 0.0;
    for (int m = 0; m < r; ++m) b += sq[m];
    return b;
}

CertificationResult certify_dimension(const FidelityEstimate& fidelity,
                                      const Eigen::VectorXd& lambda) {
    const int d = static_cast<int>(lambda.size());
    if (d == 0) throw ConfigError("certify_dimension: empty Schmidt vector");
    const double f = fidelity.value;

    CertificationResult res;
    res.fidelity = f;
    res.bound_table.resize(d + 1);
    for (int r = 0; r <= d; ++r) res.bound_table[r] = schmidt_rank_bound(lambda, r);

    int best = -1;
    for (int r = 0; r < d; ++r)
        if (f > res.bound_table[r]) best = r;
    if (best < 0) best = 0;  // nothing certified beyond separability
    res.d_ent = 1 + best;
    res.bound = res.bound_table[res.d_ent - 1];
    res.margin = f - res.bound;
    return res;
}

MonteCarloStats monte_carlo_errors(const std::vector<CoincidenceRecord>& records,
                                   const FidelityEstimator& estimator, int trials,
                                   std::uint64_t seed) {
    if (trials < 100)
        throw ConfigError("monte_carlo_errors: needs at least 100 trials");
    if (records.empty())
        throw ConfigError("monte_carlo_errors: no records supplied");
    if (!estimator) throw ConfigError("monte_carlo_errors: estimator is empty");

    std::vector<double> values(trials);
    std::vector<CoincidenceRecord> resampled = records;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(
            mix64(seed ^ mix64(static_cast<std::uint64_t>(t) + 0x51ED270BULL)));
        for (size_t k = 0; k < records.size(); ++k) {
            const auto& src = records[k].counts;
            auto& dst = resampled[k].counts;
            for (int m = 0; m < src.rows(); ++m) {
                for (int n = 0; n < src.cols(); ++n) {
                    const auto mu = static_cast<double>(src(m, n));
                    if (mu > 0.0) {
                        std::poisson_distribution<std::int64_t> poisson(mu);
                        dst(m, n) = poisson(rng);
                    } else {
                        dst(m, n) = 0;
                    }
                }
            }
        }
        try {
            values[t] = estimator(resampled);
        } catch (const std::exception& e) {
            throw DataError("monte_carlo_errors: estimator failed at trial " +
                            std::to_string(t) + ": " + e.what());
        }
    }

    MonteCarloStats stats;
    stats.trials = trials;
    for (double v : values) stats.mean += v;
    stats.mean /= trials;
    double var = 0.0;
    for (double v : values) var += (v - stats.mean) * (v - stats.mean);
    stats.stddev = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
    return stats;
}

}  // namespace lgent
