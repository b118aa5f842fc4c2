#include "lgent/cgh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "lgent/errors.hpp"

namespace lgent {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// First maximum of J1; depth of full modulation.
constexpr double kFMax = 1.8411837813406593;
constexpr int kTableSize = 2048;

// f(a) solving J1(f) = a * J1(f_max) on [0, f_max], tabulated once by
// bisection and interpolated linearly. J1 is strictly increasing on this
// interval, so the table (and the interpolant) are strictly monotone.
const std::vector<double>& depth_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kTableSize + 1);
        const double j1_max = std::cyl_bessel_j(1, kFMax);
        for (int k = 1; k < kTableSize; ++k) {
            const double want = j1_max * k / kTableSize;
            double lo = 0.0;
            double hi = kFMax;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (std::cyl_bessel_j(1, mid) < want ? lo : hi) = mid;
            }
            t[k] = 0.5 * (lo + hi);
        }
        t[0] = 0.0;
        t[kTableSize] = kFMax;
        return t;
    }();
    return table;
}

double modulation_depth(double a) {
    a = std::clamp(a, 0.0, 1.0);
    const auto& t = depth_table();
    const double pos = a * kTableSize;
    const int k = std::min(static_cast<int>(pos), kTableSize - 1);
    return t[k] + (pos - k) * (t[k + 1] - t[k]);
}

double wrap_phase(double psi) {
    double w = std::fmod(psi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// FFTW's planner is not reentrant; executing distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void fft2(const std::vector<std::complex<double>>& in,
          std::vector<std::complex<double>>& out, int rows, int cols, int sign) {
    out.resize(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(
            rows, cols,
            reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
    }
    if (!plan) throw DataError("fft2: planner failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace

Eigen::MatrixXcd sample_field_cartesian(const std::vector<LGIndex>& modes,
                                        const Eigen::VectorXcd& amplitudes, int n,
                                        double waist) {
    if (modes.empty()) throw ConfigError("sample_field_cartesian: no modes given");
    if (static_cast<int>(modes.size()) != amplitudes.size())
        throw ConfigError("sample_field_cartesian: amplitude count does not match modes");
    if (n < 2) throw ConfigError("sample_field_cartesian: grid must be at least 2x2");
    if (!(waist > 0.0)) throw ConfigError("sample_field_cartesian: waist must be positive");

    Eigen::MatrixXcd field = Eigen::MatrixXcd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        const double y = -1.0 + (2.0 * r + 1.0) / n;
        for (int c = 0; c < n; ++c) {
            const double x = -1.0 + (2.0 * c + 1.0) / n;
            const double rho = std::hypot(x, y);
            const double phi = std::atan2(y, x);
            std::complex<double> v = 0.0;
            for (size_t k = 0; k < modes.size(); ++k)
                v += amplitudes[static_cast<int>(k)] *
                     lg_amplitude(modes[k], waist, rho, phi);
            field(r, c) = v;
        }
    }
    const double peak = field.cwiseAbs().maxCoeff();
    if (peak > 0.0) field /= peak;
    return field;
}

Eigen::MatrixXcd sample_mode_cartesian(const LGIndex& mode, int n, double waist) {
    Eigen::VectorXcd one(1);
    one[0] = 1.0;
    return sample_field_cartesian({mode}, one, n, waist);
}

HologramMap synthesize_type1(const Eigen::MatrixXcd& target, double carrier_period_px,
                             const std::string& label) {
    const int rows = static_cast<int>(target.rows());
    const int cols = static_cast<int>(target.cols());
    if (rows < 2 || cols < 2)
        throw ConfigError("synthesize_type1: degenerate grid");
    if (!(carrier_period_px >= 4.0))
        throw ConfigError("synthesize_type1: carrier period must be >= 4 px");

    HologramMap holo;
    holo.carrier_period_px = carrier_period_px;
    holo.label = label;
    holo.phase = Eigen::MatrixXd::Zero(rows, cols);

    const double peak = target.cwiseAbs().maxCoeff();
    if (peak == 0.0) return holo;  // dark target encodes as a flat hologram
    if (std::abs(peak - 1.0) > 1e-6)
        throw ConfigError("synthesize_type1: target must be normalized to max |a| = 1");

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::complex<double> a = target(r, c);
            const double depth = modulation_depth(std::abs(a));
            const double psi =
                depth * std::sin(std::arg(a) + kTwoPi * c / carrier_period_px);
            holo.phase(r, c) = wrap_phase(psi);
        }
    }
    return holo;
}

ReconstructionReport reconstruct_first_order(const HologramMap& holo,
                                             const Eigen::MatrixXcd& target) {
    const int rows = static_cast<int>(holo.phase.rows());
    const int cols = static_cast<int>(holo.phase.cols());
    if (rows < 2 || cols < 2)
        throw ConfigError("reconstruct_first_order: degenerate hologram");
    if (target.rows() != rows || target.cols() != cols)
        throw ConfigError("reconstruct_first_order: target grid does not match hologram");

    const int kc =
        static_cast<int>(std::lround(cols / holo.carrier_period_px));
    const int half = kc / 2;
    if (kc - half < 1 || kc + half > cols / 2 || 2 * half + 1 > rows)
        throw ConfigError(
            "reconstruct_first_order: carrier order outside the usable grid band");

    std::vector<std::complex<double>> u(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            u[static_cast<size_t>(r) * cols + c] = std::polar(1.0, holo.phase(r, c));

    std::vector<std::complex<double>> spectrum;
    fft2(u, spectrum, rows, cols, FFTW_FORWARD);

    double total_power = 0.0;
    for (const auto& z : spectrum) total_power += std::norm(z);

    // Cut the window around the +1 carrier order and translate it to DC;
    // for integer n / period this removes the carrier exactly.
    std::vector<std::complex<double>> windowed(spectrum.size(), 0.0);
    double window_power = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
        const int sy = (dy + rows) % rows;
        for (int dx = -half; dx <= half; ++dx) {
            const int sx = (kc + dx + cols) % cols;
            const int tx = (dx + cols) % cols;
            const auto z = spectrum[static_cast<size_t>(sy) * cols + sx];
            windowed[static_cast<size_t>(sy) * cols + tx] = z;
            window_power += std::norm(z);
        }
    }

    std::vector<std::complex<double>> rec;
    fft2(windowed, rec, rows, cols, FFTW_BACKWARD);

    std::complex<double> cross = 0.0;
    double t_norm = 0.0;
    double r_norm = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto zr = rec[static_cast<size_t>(r) * cols + c];
            const auto zt = target(r, c);
            cross += std::conj(zt) * zr;
            t_norm += std::norm(zt);
            r_norm += std::norm(zr);
        }
    }

    ReconstructionReport report;
    report.carrier_bin = kc;
    report.first_order_power = total_power > 0.0 ? window_power / total_power : 0.0;
    report.overlap =
        (t_norm > 0.0 && r_norm > 0.0) ? std::norm(cross) / (t_norm * r_norm) : 0.0;
    return report;
}

void write_pgm(const HologramMap& holo, const std::string& path) {
    const int rows = static_cast<int>(holo.phase.rows());
    const int cols = static_cast<int>(holo.phase.cols());
    if (rows < 1 || cols < 1) throw ConfigError("write_pgm: empty hologram");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_pgm: cannot open '" + path + "'");
    out << "P5\n" << cols << " " << rows << "\n255\n";
    std::vector<unsigned char> row(cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const long g = std::lround(holo.phase(r, c) / kTwoPi * 255.0);
            row[c] = static_cast<unsigned char>(std::clamp(g, 0L, 255L));
        }
        out.write(reinterpret_cast<const char*>(row.data()), cols);
    }
    if (!out) throw DataError("write_pgm: write failed for '" + path + "'");
}

}  // namespace lgent
