#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lgent/modes.hpp"

namespace lgent {

enum class PhaseMatching { Sinc, Gaussian };

// Source and collection-optics parameters. Lengths are stored in the units
// their names declare; the momentum-space widths used by the model are
// derived, never stored, so the object cannot go stale.
class OpticsConfig {
  public:
    struct Params {
        double pump_wavelength_nm = 775.0;
        double signal_wavelength_nm = 1550.0;
        double pump_waist_um = 450.0;
        double collection_waist_um = 199.658;  // sigma_C^(x), at the SMF facet
        double focal_length_mm = 250.0;
        double magnification = 3.3;
        double phase_matching_width = 0.10824;  // sigma_S, rad/um
        PhaseMatching phase_matching = PhaseMatching::Sinc;
    };

    OpticsConfig() : OpticsConfig(Params{}) {}
    explicit OpticsConfig(const Params& p);

    // Same optics but with the collection waist chosen so that
    // pump_bandwidth-to-collection_bandwidth ratio equals `gamma`.
    OpticsConfig with_waist_ratio(double gamma) const;

    const Params& params() const { return p_; }

    // sigma_P = sqrt(2) / w_p, rad/um.
    double pump_bandwidth() const;
    // Back-projected collection-mode waist at the crystal, um:
    // w_si = sqrt(2) sigma_C^(x) / M.
    double collection_mode_waist_um() const;
    // sigma_C = sqrt(2) / w_si, rad/um.
    double collection_bandwidth() const;
    // sigma_S, rad/um.
    double phase_matching_width() const { return p_.phase_matching_width; }
    PhaseMatching phase_matching() const { return p_.phase_matching; }
    // gamma = w_p / w_si = sigma_C / sigma_P.
    double waist_ratio() const;

  private:
    Params p_;
};

// Joint transverse-momentum amplitude of the photon pair at the crystal;
// ks, ki in rad/um. Real-valued in this model but typed complex because it
// multiplies complex mode profiles downstream.
std::complex<double> jtma(const Eigen::Vector2d& ks, const Eigen::Vector2d& ki,
                          const OpticsConfig& cfg);

// JTMA multiplied by the Gaussian collection envelope of each arm.
std::complex<double> collected_jtma(const Eigen::Vector2d& ks,
                                    const Eigen::Vector2d& ki,
                                    const OpticsConfig& cfg);

// Unnormalized projection of the JTMA onto one signal/idler mode pair, the
// modes taken at the collected waist w_si (their Gaussian factors are the
// collection envelopes); `idler` is the physical idler index (no conjugation
// flip applied). Mainly for diagnostics and cross-checks; lg_coefficients
// builds the full tensor far more efficiently.
std::complex<double> mode_overlap_integral(const LGIndex& signal, const LGIndex& idler,
                                           const OpticsConfig& cfg, int n_radial = 320,
                                           int n_angular = 256);

struct QuadratureSpec {
    int n_radial = 320;
    int n_angular = 256;
};

// Two-photon amplitude matrix over a mode basis: entry (s, i) is the
// amplitude for signal mode basis[s] and idler mode basis[i]. When
// conjugate_idler_frame is true the idler index is stored in the frame a
// phase-conjugating measurement sees (ell -> -ell), which makes the matrix
// of an OAM-conserving source diagonal-dominant instead of anti-diagonal.
struct CoefficientTensor {
    std::vector<LGIndex> basis;   // same list for both photons
    Eigen::MatrixXcd values;      // unit Frobenius norm
    bool conjugate_idler_frame = true;
    double quadrature_residual = 0.0;  // relative change under grid refinement
};

CoefficientTensor lg_coefficients(const std::vector<LGIndex>& basis,
                                  const OpticsConfig& cfg,
                                  bool conjugate_idler_frame = true,
                                  const QuadratureSpec& quad = {});

struct SchmidtReport {
    Eigen::VectorXd lambda;       // descending, sum of squares = 1
    double participation = 0.0;   // K = 1 / sum lambda^4
    double diagonal_fraction = 0.0;  // sum |C_mm|^2 / sum |C_mn|^2
};

SchmidtReport schmidt_analysis(const CoefficientTensor& tensor);

struct GammaSweepRow {
    double gamma = 0.0;
    double participation = 0.0;
    double diagonal_fraction = 0.0;
};

// Recompute the coefficient tensor at each pump-to-collection waist ratio
// and report how concentrated the state is.
std::vector<GammaSweepRow> sweep_gamma(const OpticsConfig& cfg,
                                       const std::vector<double>& gammas,
                                       const std::vector<LGIndex>& basis,
                                       const QuadratureSpec& quad = {});

}  // namespace lgent
