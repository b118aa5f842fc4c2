#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgent/modes.hpp"

namespace lgent {

// One projective state: amplitudes over an ordered d-dimensional mode space.
// `family` / `index` identify where the vector came from ("standard",
// "mub", "tilted"); for MUB vectors family_index is the basis label r and
// index is j.
struct StateVector {
    Eigen::VectorXcd amplitudes;
    std::string family;
    int family_index = 0;
    int index = 0;

    int dimension() const { return static_cast<int>(amplitudes.size()); }
};

bool is_prime(int d);

// j-th vector of the r-th mutually unbiased basis in prime dimension d.
// For odd primes the amplitudes are (1/sqrt d) w^(j m + r m^2) with
// w = exp(2 pi i / d). d = 2 uses the eigenbases of the Pauli X and Y
// operators, since the quadratic construction degenerates there.
StateVector mub_state(int d, int r, int j);

// Standard basis plus the d MUBs of prime dimension d.
// bases[0] is the standard basis; bases[1 + r] is MUB r.
struct MUBFamily {
    int d = 0;
    std::vector<std::vector<StateVector>> bases;
};

MUBFamily mub_family(int d);

// Measurement family matched to a non-uniform target state
// sum_m lambda_m |mm>: each MUB amplitude is reweighted by lambda_m and the
// vector renormalized. families[r][j] mirrors mub_family ordering, without
// the standard basis (it is unchanged by tilting).
struct TiltedFamily {
    int d = 0;
    Eigen::VectorXd lambda;
    std::vector<std::vector<StateVector>> families;
};

TiltedFamily tilted_family(const Eigen::VectorXd& lambda);

// Squared magnitudes of pairwise quadrature overlaps between two sets of
// sampled fields: values(m, n) = |<a_m|b_n>|^2.
struct OverlapMatrix {
    Eigen::MatrixXd values;
    std::string label_a;
    std::string label_b;
};

// Replace each field by its unit-modulus phase profile exp(i arg f),
// renormalized on the grid. Models phase-only holograms that discard the
// amplitude profile of the mode they should project on.
SampledField phase_only_field(const SampledField& f);

// Pairwise |<a_m|b_n>|^2 after sending every input field through
// phase_only_field. Passing the same list twice gives the Gram matrix of a
// phase-only set (diagonal 1); two different lists give the cross-set
// overlaps, e.g. phase-only standard modes against phase-only MUB modes.
OverlapMatrix phase_only_overlaps(const std::vector<SampledField>& a,
                                  const std::vector<SampledField>& b,
                                  const std::string& label_a = "a",
                                  const std::string& label_b = "b");
OverlapMatrix phase_only_overlaps(const std::vector<SampledField>& modes,
                                  const std::string& label = "modes");

}  // namespace lgent
