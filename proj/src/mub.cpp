#include "lgent/mub.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lgent {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool is_prime(int d) {
    if (d < 2) return false;
    for (int q = 2; q * q <= d; ++q)
        if (d % q == 0) return false;
    return true;
}

StateVector mub_state(int d, int r, int j) {
    if (!is_prime(d))
        throw ConfigError("mub_state: dimension " + std::to_string(d) +
                          " is not prime; the construction needs a prime dimension");
    if (r < 0 || r >= d)
        throw ConfigError("mub_state: basis index r out of range [0, d)");
    if (j < 0 || j >= d)
        throw ConfigError("mub_state: element index j out of range [0, d)");

    StateVector v;
    v.family = "mub";
    v.family_index = r;
    v.index = j;
    v.amplitudes.resize(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    if (d == 2) {
        // The quadratic-phase rule degenerates at d = 2 (r = 0 and r = 1
        // would coincide), so use the Pauli X and Y eigenbases instead.
        const std::complex<double> i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (int m = 0; m < 2; ++m) {
            const int quarter = (r * m * m) % 4;
            const double sign = (j * m) % 2 == 0 ? 1.0 : -1.0;
            v.amplitudes[m] = scale * sign * i_pow[quarter];
        }
        return v;
    }
    for (int m = 0; m < d; ++m) {
        const int e = (j * m + r * ((m * m) % d)) % d;
        v.amplitudes[m] = std::polar(scale, 2.0 * kPi * e / d);
    }
    return v;
}

MUBFamily mub_family(int d) {
    if (!is_prime(d))
        throw ConfigError("mub_family: dimension " + std::to_string(d) +
                          " is not prime; the construction needs a prime dimension");
    MUBFamily fam;
    fam.d = d;
    fam.bases.resize(d + 1);
    fam.bases[0].reserve(d);
    for (int j = 0; j < d; ++j) {
        StateVector e;
        e.family = "standard";
        e.family_index = 0;
        e.index = j;
        e.amplitudes = Eigen::VectorXcd::Zero(d);
        e.amplitudes[j] = 1.0;
        fam.bases[0].push_back(std::move(e));
    }
    for (int r = 0; r < d; ++r) {
        fam.bases[1 + r].reserve(d);
        for (int j = 0; j < d; ++j) fam.bases[1 + r].push_back(mub_state(d, r, j));
    }
    return fam;
}

TiltedFamily tilted_family(const Eigen::VectorXd& lambda) {
    const int d = static_cast<int>(lambda.size());
    if (d < 2) throw ConfigError("tilted_family: need at least two Schmidt weights");
    if ((lambda.array() < 0.0).any())
        throw ConfigError("tilted_family: Schmidt weights must be nonnegative");
    const double nrm = lambda.norm();
    if (std::abs(nrm - 1.0) > 1e-9)
        throw ConfigError("tilted_family: Schmidt vector must be normalized");

    TiltedFamily fam;
    fam.d = d;
    fam.lambda = lambda / nrm;
    fam.families.resize(d);
    for (int r = 0; r < d; ++r) {
        fam.families[r].reserve(d);
        for (int j = 0; j < d; ++j) {
            StateVector v = mub_state(d, r, j);
            v.family = "tilted";
            v.amplitudes.array() *= fam.lambda.array();
            const double n = v.amplitudes.norm();
            if (!(n > 0.0))
                throw ConfigError("tilted_family: degenerate Schmidt vector");
            v.amplitudes /= n;
            fam.families[r].push_back(std::move(v));
        }
    }
    return fam;
}

SampledField phase_only_field(const SampledField& f) {
    if (!f.grid) throw ConfigError("phase_only_field: field has no grid");
    SampledField out = f;
    out.values = f.values.unaryExpr([](const std::complex<double>& z) {
        const double m = std::abs(z);
        return m > 0.0 ? z / m : std::complex<double>(1.0, 0.0);
    });
    const double n = field_norm(out);
    out.values /= n;
    out.unit_norm = true;
    return out;
}

OverlapMatrix phase_only_overlaps(const std::vector<SampledField>& a,
                                  const std::vector<SampledField>& b,
                                  const std::string& label_a,
                                  const std::string& label_b) {
    if (a.empty() || b.empty())
        throw ConfigError("phase_only_overlaps: empty field set");
    std::vector<SampledField> pa, pb;
    pa.reserve(a.size());
    pb.reserve(b.size());
    for (const auto& f : a) pa.push_back(phase_only_field(f));
    for (const auto& f : b) pb.push_back(phase_only_field(f));
    OverlapMatrix out;
    out.label_a = label_a;
    out.label_b = label_b;
    out.values.resize(pa.size(), pb.size());
    for (size_t m = 0; m < pa.size(); ++m)
        for (size_t n = 0; n < pb.size(); ++n)
            out.values(m, n) = std::norm(inner_product(pa[m], pb[n]));
    return out;
}

OverlapMatrix phase_only_overlaps(const std::vector<SampledField>& modes,
                                  const std::string& label) {
    return phase_only_overlaps(modes, modes, label, label);
}

}  // namespace lgent
