#include "lgent/spdc.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace lgent {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw ConfigError(std::string("OpticsConfig: ") + name + " must be positive");
}

}  // namespace

OpticsConfig::OpticsConfig(const Params& p) : p_(p) {
    check_positive(p.pump_wavelength_nm, "pump_wavelength_nm");
    check_positive(p.signal_wavelength_nm, "signal_wavelength_nm");
    check_positive(p.pump_waist_um, "pump_waist_um");
    check_positive(p.collection_waist_um, "collection_waist_um");
    check_positive(p.focal_length_mm, "focal_length_mm");
    check_positive(p.magnification, "magnification");
    check_positive(p.phase_matching_width, "phase_matching_width");
}

OpticsConfig OpticsConfig::with_waist_ratio(double gamma) const {
    if (!(gamma > 0.0))
        throw ConfigError("OpticsConfig: waist ratio must be positive");
    Params q = p_;
    // gamma = w_p / w_si with w_si = sqrt(2) sigma_C^(x) / M.
    q.collection_waist_um =
        p_.magnification * p_.pump_waist_um / (gamma * std::sqrt(2.0));
    return OpticsConfig(q);
}

double OpticsConfig::pump_bandwidth() const {
    return std::sqrt(2.0) / p_.pump_waist_um;
}

double OpticsConfig::collection_mode_waist_um() const {
    return std::sqrt(2.0) * p_.collection_waist_um / p_.magnification;
}

double OpticsConfig::collection_bandwidth() const {
    return std::sqrt(2.0) / collection_mode_waist_um();
}

double OpticsConfig::waist_ratio() const {
    return p_.pump_waist_um / collection_mode_waist_um();
}

std::complex<double> jtma(const Eigen::Vector2d& ks, const Eigen::Vector2d& ki,
                          const OpticsConfig& cfg) {
    const double sp = cfg.pump_bandwidth();
    const double ss = cfg.phase_matching_width();
    const double sum2 = (ks + ki).squaredNorm();
    const double diff2 = (ks - ki).squaredNorm();
    const double pump = std::exp(-sum2 / (2.0 * sp * sp));
    const double x = diff2 / (ss * ss);
    const double pm =
        cfg.phase_matching() == PhaseMatching::Sinc ? sinc(x) : std::exp(-0.455 * x);
    return {pump * pm, 0.0};
}

std::complex<double> collected_jtma(const Eigen::Vector2d& ks,
                                    const Eigen::Vector2d& ki,
                                    const OpticsConfig& cfg) {
    const double sc = cfg.collection_bandwidth();
    const double env =
        std::exp(-(ks.squaredNorm() + ki.squaredNorm()) / (2.0 * sc * sc));
    return jtma(ks, ki, cfg) * env;
}

namespace {

// Radial nodes plus the angular integrals
//   A_l(j, k) = integral over dphi of G(rho_j, rho_k, dphi) cos(l dphi)
// for every l up to l_max, where G is the collected JTMA with the angle
// between the two photons as third coordinate. Everything real: G is even
// in dphi.
struct TensorWorkspace {
    Eigen::VectorXd rn;   // radial nodes
    Eigen::VectorXd rw;   // Gauss-Legendre weight times rho
    std::vector<Eigen::MatrixXd> harmonics;
};

TensorWorkspace build_harmonics(const OpticsConfig& cfg, double rho_max, int n_radial,
                                int n_angular, int l_max) {
    TensorWorkspace ws;
    gauss_legendre(n_radial, 0.0, rho_max, ws.rn, ws.rw);
    ws.rw.array() *= ws.rn.array();

    Eigen::VectorXd an, aw;
    gauss_legendre(n_angular, 0.0, 2.0 * kPi, an, aw);

    const double sp2 = 2.0 * cfg.pump_bandwidth() * cfg.pump_bandwidth();
    const double ss2 = cfg.phase_matching_width() * cfg.phase_matching_width();
    const bool use_sinc = cfg.phase_matching() == PhaseMatching::Sinc;

    // cos(l phi_a) with the angular quadrature weight folded in
    Eigen::MatrixXd ct(l_max + 1, n_angular);
    Eigen::VectorXd cosphi(n_angular);
    for (int a = 0; a < n_angular; ++a) {
        cosphi[a] = std::cos(an[a]);
        for (int l = 0; l <= l_max; ++l) ct(l, a) = std::cos(l * an[a]) * aw[a];
    }

    ws.harmonics.assign(l_max + 1, Eigen::MatrixXd::Zero(n_radial, n_radial));
    std::vector<double> acc(l_max + 1);
    for (int j = 0; j < n_radial; ++j) {
        for (int k = j; k < n_radial; ++k) {
            const double r2 = ws.rn[j] * ws.rn[j] + ws.rn[k] * ws.rn[k];
            const double cross = 2.0 * ws.rn[j] * ws.rn[k];
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int a = 0; a < n_angular; ++a) {
                const double c = cross * cosphi[a];
                // |ks + ki|^2 = r2 + c >= 0: keep it as one exponent, since
                // exp(-r2/sp2) and exp(-c/sp2) evaluated separately can
                // underflow to 0 and overflow to inf for narrow pumps.
                const double x = (r2 - c) / ss2;
                const double pm = use_sinc ? sinc(x) : std::exp(-0.455 * x);
                const double g = std::exp(-(r2 + c) / sp2) * pm;
                for (int l = 0; l <= l_max; ++l) acc[l] += g * ct(l, a);
            }
            for (int l = 0; l <= l_max; ++l) {
                ws.harmonics[l](j, k) = acc[l];
                ws.harmonics[l](k, j) = acc[l];
            }
        }
    }
    return ws;
}

Eigen::MatrixXcd tensor_entries(const std::vector<LGIndex>& basis, bool flip,
                                double mode_waist, const TensorWorkspace& ws) {
    const int d = static_cast<int>(basis.size());
    const int nr = static_cast<int>(ws.rn.size());
    std::vector<Eigen::VectorXd> prof(d, Eigen::VectorXd(nr));
    for (int m = 0; m < d; ++m)
        for (int j = 0; j < nr; ++j)
            prof[m][j] = ws.rw[j] * lg_radial(basis[m], mode_waist, ws.rn[j]);

    Eigen::MatrixXcd out(d, d);
    for (int s = 0; s < d; ++s) {
        for (int i = 0; i < d; ++i) {
            const int li = flip ? -basis[i].ell : basis[i].ell;
            if (basis[s].ell + li != 0) {
                out(s, i) = 0.0;
                continue;
            }
            const int l = std::abs(basis[s].ell);
            out(s, i) = 2.0 * kPi * prof[s].dot(ws.harmonics[l] * prof[i]);
        }
    }
    return out;
}

void validate_basis(const std::vector<LGIndex>& basis) {
    if (basis.empty()) throw ConfigError("lg_coefficients: basis is empty");
    std::set<std::pair<int, int>> seen;
    for (const auto& m : basis) {
        if (m.p < 0)
            throw ConfigError("lg_coefficients: mode " + mode_label(m) +
                              " has negative radial order");
        if (!seen.insert({m.ell, m.p}).second)
            throw ConfigError("lg_coefficients: duplicate mode " + mode_label(m));
    }
}

double tensor_rho_max(const std::vector<LGIndex>& basis, const OpticsConfig& cfg) {
    int mg = 1;
    for (const auto& m : basis) mg = std::max(mg, mode_group(m));
    // Radial decay comes from the mode Gaussians (scale sigma_C each); the
    // highest mode group pushes support out to ~sqrt(2 MG) sigma_C.
    return (2.0 * std::sqrt(2.0 * mg) + 6.0) * cfg.collection_bandwidth();
}

}  // namespace

CoefficientTensor lg_coefficients(const std::vector<LGIndex>& basis,
                                  const OpticsConfig& cfg, bool conjugate_idler_frame,
                                  const QuadratureSpec& quad) {
    validate_basis(basis);
    if (quad.n_radial < 16 || quad.n_angular < 16)
        throw ConfigError("lg_coefficients: quadrature needs at least 16 nodes per axis");

    int l_max = 0;
    for (const auto& m : basis) l_max = std::max(l_max, std::abs(m.ell));
    const double rho_max = tensor_rho_max(basis, cfg);
    const double w = cfg.collection_mode_waist_um();

    const TensorWorkspace ws =
        build_harmonics(cfg, rho_max, quad.n_radial, quad.n_angular, l_max);
    Eigen::MatrixXcd full = tensor_entries(basis, conjugate_idler_frame, w, ws);
    const double nrm = full.norm();
    if (!(nrm > 1e-300))
        throw ConfigError("lg_coefficients: basis captures no amplitude from this source");
    full /= nrm;

    // Residual estimate: rebuild on a halved grid and compare normalized
    // tensors entrywise.
    const TensorWorkspace ws_half =
        build_harmonics(cfg, rho_max, std::max(16, quad.n_radial / 2),
                        std::max(16, quad.n_angular / 2), l_max);
    Eigen::MatrixXcd half = tensor_entries(basis, conjugate_idler_frame, w, ws_half);
    const double nrm_half = half.norm();
    double residual = 1.0;
    if (nrm_half > 1e-300) residual = (full - half / nrm_half).cwiseAbs().maxCoeff();
    if (residual > 2e-2)
        throw ConvergenceError(
            "lg_coefficients: quadrature did not converge (residual " +
                std::to_string(residual) + "); increase quadrature nodes",
            residual);

    CoefficientTensor t;
    t.basis = basis;
    t.values = std::move(full);
    t.conjugate_idler_frame = conjugate_idler_frame;
    t.quadrature_residual = residual;
    return t;
}

std::complex<double> mode_overlap_integral(const LGIndex& signal, const LGIndex& idler,
                                           const OpticsConfig& cfg, int n_radial,
                                           int n_angular) {
    if (signal.ell + idler.ell != 0) return 0.0;
    std::vector<LGIndex> pair_basis = {signal};
    if (!(idler == signal)) pair_basis.push_back(idler);
    const double rho_max = tensor_rho_max(pair_basis, cfg);
    const int l = std::abs(signal.ell);
    const TensorWorkspace ws = build_harmonics(cfg, rho_max, n_radial, n_angular, l);

    const double w = cfg.collection_mode_waist_um();
    const int nr = static_cast<int>(ws.rn.size());
    Eigen::VectorXd ps(nr), pi(nr);
    for (int j = 0; j < nr; ++j) {
        ps[j] = ws.rw[j] * lg_radial(signal, w, ws.rn[j]);
        pi[j] = ws.rw[j] * lg_radial(idler, w, ws.rn[j]);
    }
    return {2.0 * kPi * ps.dot(ws.harmonics[l] * pi), 0.0};
}

SchmidtReport schmidt_analysis(const CoefficientTensor& tensor) {
    const double total = tensor.values.squaredNorm();
    if (!(total > 0.0))
        throw ConfigError("schmidt_analysis: tensor is identically zero");

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(tensor.values);
    SchmidtReport rep;
    rep.lambda = svd.singularValues();
    rep.lambda /= rep.lambda.norm();
    const double sum4 = rep.lambda.array().square().square().sum();
    rep.participation = 1.0 / sum4;
    rep.diagonal_fraction =
        tensor.values.diagonal().squaredNorm() / total;
    return rep;
}

std::vector<GammaSweepRow> sweep_gamma(const OpticsConfig& cfg,
                                       const std::vector<double>& gammas,
                                       const std::vector<LGIndex>& basis,
                                       const QuadratureSpec& quad) {
    for (double g : gammas)
        if (!(g > 0.0)) throw ConfigError("sweep_gamma: gamma values must be positive");
    std::vector<GammaSweepRow> rows;
    rows.reserve(gammas.size());
    for (double g : gammas) {
        const OpticsConfig at_gamma = cfg.with_waist_ratio(g);
        const CoefficientTensor t = lg_coefficients(basis, at_gamma, true, quad);
        const SchmidtReport rep = schmidt_analysis(t);
        rows.push_back({g, rep.participation, rep.diagonal_fraction});
    }
    return rows;
}

}  // namespace lgent
