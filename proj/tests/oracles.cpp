#include "oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace oracle {

double laguerre_series(int p, int alpha, double x) {
    // binomial C(p + alpha, p - k) computed as a running product to avoid
    // factorial overflow for moderate p
    double sum = 0.0;
    double xk = 1.0;  // x^k / k!
    for (int k = 0; k <= p; ++k) {
        double binom = 1.0;
        for (int i = 1; i <= p - k; ++i)
            binom *= static_cast<double>(alpha + k + i) / i;
        sum += ((k % 2 == 0) ? 1.0 : -1.0) * binom * xk;
        xk *= x / (k + 1);
    }
    return sum;
}

double bessel_j1_series(double x) {
    const double half = x / 2.0;
    double term = half;  // k = 0: (x/2) / (0! 1!)
    double sum = term;
    for (int k = 1; k <= 30; ++k) {
        term *= -(half * half) / (k * (k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

struct Triple {
    double v00, v11, diag;
};

Triple normalized(const Eigen::MatrixXd& q) {
    const double tot = q.sum();
    return {q(0, 0) / tot, q(1, 1) / tot, q.diagonal().sum() / tot};
}

}  // namespace

McRadial mc_radial_overlap(const lgent::OpticsConfig& cfg, int d,
                           std::size_t samples, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("mc_radial_overlap: d >= 2");
    const double sc = cfg.collection_bandwidth();
    const double sp = cfg.pump_bandwidth();
    const double ss = cfg.phase_matching_width();
    const double w = cfg.collection_mode_waist_um();
    const bool use_sinc = cfg.phase_matching() == lgent::PhaseMatching::Sinc;

    // u = ks + ki, v = ks - ki; per-component variances of the Gaussian
    // part exp(-(|ks|^2+|ki|^2)/(2 sc^2)) exp(-|u|^2/(2 sp^2))
    const double su2 = 1.0 / (1.0 / (2.0 * sc * sc) + 1.0 / (sp * sp));
    const double sv2 = 2.0 * sc * sc;
    const double beta2 = 3.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nu(0.0, std::sqrt(beta2 * su2));
    std::normal_distribution<double> nv(0.0, std::sqrt(beta2 * sv2));

    const double pi = 3.14159265358979323846;
    const double mode_norm = std::sqrt(w * w / (2.0 * pi));
    // jacobian d2ks d2ki = (1/4) d2u d2v, times the two sampling pdf norms
    const double constant =
        0.25 * (2.0 * pi * beta2) * (2.0 * pi * beta2) * su2 * sv2;

    const int batches = 40;
    const std::size_t per = samples / batches;
    std::vector<Eigen::MatrixXd> est(batches, Eigen::MatrixXd::Zero(d, d));
    Eigen::VectorXd ls(d), li(d);

    for (int b = 0; b < batches; ++b) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t n = 0; n < per; ++n) {
            const double ux = nu(rng), uy = nu(rng);
            const double vx = nv(rng), vy = nv(rng);
            const double uu = ux * ux + uy * uy;
            const double vv = vx * vx + vy * vy;
            // Gaussian part of integrand divided by the sampling density
            const double expo =
                -(uu / (2.0 * su2) + vv / (2.0 * sv2)) * (1.0 - 1.0 / beta2);
            const double x = vv / (ss * ss);
            const double pm = use_sinc ? sinc(x) : std::exp(-0.455 * x);
            const double base = std::exp(expo) * pm * constant;

            const double ksx = 0.5 * (ux + vx), ksy = 0.5 * (uy + vy);
            const double kix = 0.5 * (ux - vx), kiy = 0.5 * (uy - vy);
            const double ts = (ksx * ksx + ksy * ksy) * w * w / 2.0;
            const double ti = (kix * kix + kiy * kiy) * w * w / 2.0;
            for (int p = 0; p < d; ++p) {
                ls[p] = laguerre_series(p, 0, ts) * mode_norm;
                li[p] = laguerre_series(p, 0, ti) * mode_norm;
            }
            acc.noalias() += base * (ls * li.transpose());
        }
        est[b] = acc / static_cast<double>(per);
    }

    // unbiased |C|^2 from products of independent halves
    const int pairs = batches / 2;
    std::vector<Eigen::MatrixXd> prods(pairs);
    for (int t = 0; t < pairs; ++t)
        prods[t] = est[2 * t].cwiseProduct(est[2 * t + 1]);

    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
    for (const auto& q : prods) pooled += q;
    pooled /= pairs;
    const Triple full = normalized(pooled);

    std::vector<Triple> loo(pairs);
    Triple loo_mean{0, 0, 0};
    for (int i = 0; i < pairs; ++i) {
        Eigen::MatrixXd rest = (pooled * pairs - prods[i]) / (pairs - 1);
        loo[i] = normalized(rest);
        loo_mean.v00 += loo[i].v00 / pairs;
        loo_mean.v11 += loo[i].v11 / pairs;
        loo_mean.diag += loo[i].diag / pairs;
    }
    Triple var{0, 0, 0};
    for (int i = 0; i < pairs; ++i) {
        var.v00 += (loo[i].v00 - loo_mean.v00) * (loo[i].v00 - loo_mean.v00);
        var.v11 += (loo[i].v11 - loo_mean.v11) * (loo[i].v11 - loo_mean.v11);
        var.diag += (loo[i].diag - loo_mean.diag) * (loo[i].diag - loo_mean.diag);
    }
    const double scale = static_cast<double>(pairs - 1) / pairs;

    McRadial out;
    out.v00 = full.v00 - (pairs - 1) * (loo_mean.v00 - full.v00);
    out.v11 = full.v11 - (pairs - 1) * (loo_mean.v11 - full.v11);
    out.diag = full.diag - (pairs - 1) * (loo_mean.diag - full.diag);
    out.v00_se = std::sqrt(scale * var.v00);
    out.v11_se = std::sqrt(scale * var.v11);
    out.diag_se = std::sqrt(scale * var.diag);
    return out;
}

Eigen::MatrixXcd ginibre_tensor(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = std::complex<double>(g(rng), g(rng));
    return m / m.norm();
}

Eigen::MatrixXcd random_unitary(int d, std::uint64_t seed) {
    Eigen::MatrixXcd g = ginibre_tensor(d, seed);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < d; ++c) {
        std::complex<double> rc = r(c, c);
        q.col(c) *= rc / std::abs(rc);
    }
    return q;
}

double trace_fidelity(const Eigen::MatrixXcd& tensor, double visibility,
                      const Eigen::VectorXd& lambda) {
    const int d = static_cast<int>(tensor.rows());
    const int dd = d * d;
    Eigen::VectorXcd psi(dd), phi(dd);
    phi.setZero();
    for (int s = 0; s < d; ++s)
        for (int i = 0; i < d; ++i) psi[s * d + i] = tensor(s, i);
    for (int m = 0; m < d; ++m) phi[m * d + m] = lambda[m];

    Eigen::MatrixXcd rho = visibility * (psi * psi.adjoint());
    rho += ((1.0 - visibility) / dd) * Eigen::MatrixXcd::Identity(dd, dd);
    return std::real((phi.adjoint() * rho * phi)(0, 0));
}

}  // namespace oracle
