#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgent/errors.hpp"

namespace lgent {

// Mode indices of a Laguerre-Gaussian transverse mode: azimuthal winding
// number ell (any sign) and radial order p >= 0.
struct LGIndex {
    int ell = 0;
    int p = 0;

    friend bool operator==(const LGIndex& a, const LGIndex& b) {
        return a.ell == b.ell && a.p == b.p;
    }
    friend bool operator!=(const LGIndex& a, const LGIndex& b) { return !(a == b); }
    friend bool operator<(const LGIndex& a, const LGIndex& b) {
        if (a.ell != b.ell) return a.ell < b.ell;
        return a.p < b.p;
    }
};

// Mode group number 2p + |ell| + 1; modes in the same group share a
// propagation (Gouy) phase and, in the experiment, a hologram deflection band.
int mode_group(const LGIndex& idx);

std::string mode_label(const LGIndex& idx);

// Generalized Laguerre polynomial L_p^alpha(x) for integer alpha >= 0,
// evaluated by the standard three-term recurrence.
double assoc_laguerre(int p, int alpha, double x);

// Transverse-momentum amplitude of an LG mode at the beam waist.
// rho in rad/um, phi in radians, waist in um. Normalized so that
// integral |LG|^2 rho drho dphi = 1.
std::complex<double> lg_amplitude(const LGIndex& idx, double waist_um, double rho,
                                  double phi);

// Radial factor of lg_amplitude (real, includes normalization); the full
// amplitude is lg_radial(...) * exp(i ell phi).
double lg_radial(const LGIndex& idx, double waist_um, double rho);

// Polar quadrature grid in transverse momentum space. Radial direction uses
// Gauss-Legendre nodes on [0, rho_max]; azimuthal direction uses uniform
// nodes phi_k = 2 pi k / n_angular (periodic trapezoid, spectrally accurate).
// radial_weights include the rho Jacobian, so a scalar integral is
//   sum_jk f(rho_j, phi_k) * radial_weights[j] * angular_weight.
class TransverseGrid {
  public:
    TransverseGrid(int n_radial, int n_angular, double rho_max);

    // Grid sized for modes up to max_mode_group at the given waist:
    // rho_max = 6 sqrt(2 max_mode_group) / waist.
    static TransverseGrid for_modes(int n_radial, int n_angular, int max_mode_group,
                                    double waist_um);

    int n_radial() const { return static_cast<int>(radial_nodes_.size()); }
    int n_angular() const { return n_angular_; }
    double rho_max() const { return rho_max_; }
    double radial_node(int j) const { return radial_nodes_[j]; }
    double radial_weight(int j) const { return radial_weights_[j]; }
    double angular_node(int k) const { return angular_nodes_[k]; }
    double angular_weight() const { return angular_weight_; }
    const Eigen::VectorXd& radial_nodes() const { return radial_nodes_; }
    const Eigen::VectorXd& radial_weights() const { return radial_weights_; }

    friend bool operator==(const TransverseGrid& a, const TransverseGrid& b) {
        return a.n_angular_ == b.n_angular_ && a.rho_max_ == b.rho_max_ &&
               a.radial_nodes_.size() == b.radial_nodes_.size();
    }

  private:
    Eigen::VectorXd radial_nodes_;    // rad/um
    Eigen::VectorXd radial_weights_;  // Gauss-Legendre weight times rho
    Eigen::VectorXd angular_nodes_;
    int n_angular_;
    double rho_max_;
    double angular_weight_;
};

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes,
                    Eigen::VectorXd& weights);

// A complex field sampled on a TransverseGrid; values(j, k) is the amplitude
// at (rho_j, phi_k).
struct SampledField {
    std::shared_ptr<const TransverseGrid> grid;
    Eigen::MatrixXcd values;
    double waist_um = 0.0;
    bool unit_norm = false;
};

// Sample an LG mode on a grid. The result carries unit_norm = true because
// the analytic normalization makes the quadrature norm 1 on a grid that
// covers the mode support.
SampledField lg_sample(const LGIndex& idx, double waist_um,
                       std::shared_ptr<const TransverseGrid> grid);

// Quadrature inner product <a|b> = integral conj(a) b rho drho dphi.
// Throws ConfigError if the fields live on different grids.
std::complex<double> inner_product(const SampledField& a, const SampledField& b);

double field_norm(const SampledField& a);

// Linear combination sum_k amplitudes[k] * fields[k] on the shared grid.
// The result is not renormalized.
SampledField superpose(const std::vector<SampledField>& fields,
                       const Eigen::VectorXcd& amplitudes);

enum class BasisKind { Radial, Azimuthal, FullField, Explicit };

enum class BasisOrdering {
    Default,       // per kind: Radial -> PAscending, Azimuthal -> EllAscending,
                   // FullField -> ModeGroup
    ModeGroup,     // ascending (mode group, p, ell)
    EllAscending,  // ascending (ell, p)
    PAscending,    // ascending (p, ell)
};

// Declarative description of a measurement basis over LG modes.
struct BasisSpec {
    BasisKind kind = BasisKind::FullField;
    int ell_min = 0;
    int ell_max = 0;
    int p_min = 0;
    int p_max = 0;
    int dimension = 0;  // 0 means "use every mode in range"
    BasisOrdering ordering = BasisOrdering::Default;
    std::vector<LGIndex> explicit_modes;  // used when kind == Explicit
};

// Expand a BasisSpec into an ordered list of modes. If the declared ranges
// contain more than `dimension` modes, excess modes are dropped from the
// high end: largest mode group first, most negative ell first within a
// group. Throws ConfigError when the ranges cannot supply `dimension`
// modes, or when an explicit list has duplicates or a length mismatch.
std::vector<LGIndex> enumerate_basis(const BasisSpec& spec);

}  // namespace lgent
