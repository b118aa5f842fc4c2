#include "lgent/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace lgent {

namespace {
constexpr double kPi = std::numbers::pi;
}

int mode_group(const LGIndex& idx) {
    if (idx.p < 0) throw ConfigError("mode_group: radial order p must be >= 0");
    return 2 * idx.p + std::abs(idx.ell) + 1;
}

std::string mode_label(const LGIndex& idx) {
    std::ostringstream os;
    os << "l" << idx.ell << "p" << idx.p;
    return os.str();
}

double assoc_laguerre(int p, int alpha, double x) {
    if (p < 0) throw ConfigError("assoc_laguerre: order p must be >= 0");
    if (alpha < 0) throw ConfigError("assoc_laguerre: alpha must be >= 0");
    if (p == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 + alpha - x;
    for (int k = 1; k < p; ++k) {
        double lp1 = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * lm1) / (k + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

double lg_radial(const LGIndex& idx, double waist_um, double rho) {
    if (waist_um <= 0.0) throw ConfigError("lg_radial: waist must be positive");
    const int al = std::abs(idx.ell);
    const double t = 0.5 * rho * rho * waist_um * waist_um;
    // norm^2 = w^2 p! / (2 pi (p+|l|)!)
    double ratio = 1.0;
    for (int k = 1; k <= al; ++k) ratio /= (idx.p + k);
    const double norm = waist_um * std::sqrt(ratio / (2.0 * kPi));
    double val = norm * std::exp(-0.5 * t) * assoc_laguerre(idx.p, al, t);
    if (al > 0) val *= std::pow(t, 0.5 * al);
    return val;
}

std::complex<double> lg_amplitude(const LGIndex& idx, double waist_um, double rho,
                                  double phi) {
    // lg_radial may be negative (oscillating Laguerre factor), so scale the
    // unit phasor instead of using std::polar's magnitude argument.
    return lg_radial(idx, waist_um, rho) * std::polar(1.0, idx.ell * phi);
}

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes,
                    Eigen::VectorXd& weights) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    if (!(b > a)) throw ConfigError("gauss_legendre: interval must have b > a");
    nodes.resize(n);
    weights.resize(n);
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double p1 = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            p1 = 1.0;
            double p2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k + 1.0) * x * p2 - k * p3) / (k + 1.0);
            }
            dp = n * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = xm - xl * x;
        nodes[n - 1 - i] = xm + xl * x;
        const double w = 2.0 * xl / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

TransverseGrid::TransverseGrid(int n_radial, int n_angular, double rho_max)
    : n_angular_(n_angular), rho_max_(rho_max) {
    if (n_radial < 2) throw ConfigError("TransverseGrid: n_radial must be >= 2");
    if (n_angular < 2) throw ConfigError("TransverseGrid: n_angular must be >= 2");
    if (rho_max <= 0.0) throw ConfigError("TransverseGrid: rho_max must be positive");
    gauss_legendre(n_radial, 0.0, rho_max, radial_nodes_, radial_weights_);
    radial_weights_.array() *= radial_nodes_.array();  // rho Jacobian
    angular_nodes_.resize(n_angular);
    for (int k = 0; k < n_angular; ++k) angular_nodes_[k] = 2.0 * kPi * k / n_angular;
    angular_weight_ = 2.0 * kPi / n_angular;
}

TransverseGrid TransverseGrid::for_modes(int n_radial, int n_angular,
                                         int max_mode_group, double waist_um) {
    if (max_mode_group < 1) throw ConfigError("TransverseGrid: mode group must be >= 1");
    if (waist_um <= 0.0) throw ConfigError("TransverseGrid: waist must be positive");
    const double rho_max = 6.0 * std::sqrt(2.0 * max_mode_group) / waist_um;
    return TransverseGrid(n_radial, n_angular, rho_max);
}

SampledField lg_sample(const LGIndex& idx, double waist_um,
                       std::shared_ptr<const TransverseGrid> grid) {
    if (!grid) throw ConfigError("lg_sample: grid is null");
    SampledField f;
    f.grid = grid;
    f.waist_um = waist_um;
    f.unit_norm = true;
    const int nr = grid->n_radial();
    const int na = grid->n_angular();
    Eigen::VectorXd radial(nr);
    for (int j = 0; j < nr; ++j) radial[j] = lg_radial(idx, waist_um, grid->radial_node(j));
    Eigen::VectorXcd phase(na);
    for (int k = 0; k < na; ++k)
        phase[k] = std::polar(1.0, idx.ell * grid->angular_node(k));
    f.values = radial.cast<std::complex<double>>() * phase.transpose();
    return f;
}

static void check_same_grid(const SampledField& a, const SampledField& b,
                            const char* what) {
    if (!a.grid || !b.grid)
        throw ConfigError(std::string(what) + ": field has no grid");
    if (a.grid.get() != b.grid.get() && !(*a.grid == *b.grid))
        throw ConfigError(std::string(what) + ": fields sampled on different grids");
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
        throw ConfigError(std::string(what) + ": field shapes differ");
}

std::complex<double> inner_product(const SampledField& a, const SampledField& b) {
    check_same_grid(a, b, "inner_product");
    const Eigen::MatrixXcd prod = a.values.conjugate().cwiseProduct(b.values);
    const Eigen::VectorXcd row_sums = prod.rowwise().sum();
    std::complex<double> s = 0.0;
    for (int j = 0; j < row_sums.size(); ++j)
        s += a.grid->radial_weight(j) * row_sums[j];
    return s * a.grid->angular_weight();
}

double field_norm(const SampledField& a) {
    return std::sqrt(std::real(inner_product(a, a)));
}

SampledField superpose(const std::vector<SampledField>& fields,
                       const Eigen::VectorXcd& amplitudes) {
    if (fields.empty()) throw ConfigError("superpose: no fields given");
    if (static_cast<int>(fields.size()) != amplitudes.size())
        throw ConfigError("superpose: amplitude count does not match field count");
    SampledField out = fields[0];
    out.values = amplitudes[0] * fields[0].values;
    for (size_t i = 1; i < fields.size(); ++i) {
        check_same_grid(fields[0], fields[i], "superpose");
        out.values += amplitudes[static_cast<int>(i)] * fields[i].values;
    }
    out.unit_norm = false;
    return out;
}

namespace {

std::vector<LGIndex> range_candidates(const BasisSpec& spec) {
    std::vector<LGIndex> modes;
    switch (spec.kind) {
        case BasisKind::Radial:
            for (int p = spec.p_min; p <= spec.p_max; ++p) modes.push_back({0, p});
            break;
        case BasisKind::Azimuthal:
            for (int l = spec.ell_min; l <= spec.ell_max; ++l)
                modes.push_back({l, spec.p_min});
            break;
        case BasisKind::FullField:
            for (int l = spec.ell_min; l <= spec.ell_max; ++l)
                for (int p = spec.p_min; p <= spec.p_max; ++p) modes.push_back({l, p});
            break;
        case BasisKind::Explicit:
            break;
    }
    return modes;
}

bool ordering_less(BasisOrdering ord, const LGIndex& a, const LGIndex& b) {
    switch (ord) {
        case BasisOrdering::ModeGroup: {
            const int ga = mode_group(a), gb = mode_group(b);
            if (ga != gb) return ga < gb;
            if (a.p != b.p) return a.p < b.p;
            return a.ell < b.ell;
        }
        case BasisOrdering::EllAscending:
            if (a.ell != b.ell) return a.ell < b.ell;
            return a.p < b.p;
        case BasisOrdering::PAscending:
            if (a.p != b.p) return a.p < b.p;
            return a.ell < b.ell;
        case BasisOrdering::Default:
            break;
    }
    return a < b;
}

}  // namespace

std::vector<LGIndex> enumerate_basis(const BasisSpec& spec) {
    if (spec.kind == BasisKind::Explicit) {
        const auto& modes = spec.explicit_modes;
        if (modes.empty())
            throw ConfigError("enumerate_basis: explicit basis requires a mode list");
        std::set<std::pair<int, int>> seen;
        for (const auto& m : modes) {
            if (m.p < 0)
                throw ConfigError("enumerate_basis: mode " + mode_label(m) +
                                  " has negative radial order");
            if (!seen.insert({m.ell, m.p}).second)
                throw ConfigError("enumerate_basis: duplicate mode " + mode_label(m) +
                                  " in explicit list");
        }
        if (spec.dimension > 0 &&
            static_cast<int>(modes.size()) != spec.dimension)
            throw ConfigError(
                "enumerate_basis: explicit list has " + std::to_string(modes.size()) +
                " modes but dimension " + std::to_string(spec.dimension) +
                " was requested");
        return modes;
    }

    if (spec.ell_min > spec.ell_max)
        throw ConfigError("enumerate_basis: ell_min exceeds ell_max");
    if (spec.p_min < 0)
        throw ConfigError("enumerate_basis: p_min must be >= 0");
    if (spec.p_min > spec.p_max)
        throw ConfigError("enumerate_basis: p_min exceeds p_max");

    std::vector<LGIndex> modes = range_candidates(spec);
    BasisOrdering ord = spec.ordering;
    if (ord == BasisOrdering::Default) {
        switch (spec.kind) {
            case BasisKind::Radial: ord = BasisOrdering::PAscending; break;
            case BasisKind::Azimuthal: ord = BasisOrdering::EllAscending; break;
            default: ord = BasisOrdering::ModeGroup; break;
        }
    }
    std::sort(modes.begin(), modes.end(),
              [&](const LGIndex& a, const LGIndex& b) { return ordering_less(ord, a, b); });

    const int d = spec.dimension > 0 ? spec.dimension : static_cast<int>(modes.size());
    if (static_cast<int>(modes.size()) < d)
        throw ConfigError("enumerate_basis: declared ranges supply " +
                          std::to_string(modes.size()) + " modes, fewer than dimension " +
                          std::to_string(d));
    // Drop excess from the high end: largest mode group first, most negative
    // ell first within a group.
    while (static_cast<int>(modes.size()) > d) {
        auto victim = modes.begin();
        for (auto it = modes.begin(); it != modes.end(); ++it) {
            const int gv = mode_group(*victim), gi = mode_group(*it);
            if (gi > gv || (gi == gv && it->ell < victim->ell) ||
                (gi == gv && it->ell == victim->ell && it->p > victim->p))
                victim = it;
        }
        modes.erase(victim);
    }
    return modes;
}

}  // namespace lgent
