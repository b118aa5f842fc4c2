#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgent/modes.hpp"

namespace lgent {

// Phase-only hologram: phase(y, x) in [0, 2 pi) per pixel.
struct HologramMap {
    Eigen::MatrixXd phase;
    double pitch_um = 8.0;
    double carrier_period_px = 8.0;
    std::string label;
};

// Sample a superposition of LG modes on a square Cartesian grid of n x n
// pixels spanning [-1, 1) in both axes. `waist` is in the same dimensionless
// units (default 12 puts mode groups up to 9 comfortably inside the grid).
// The result is scaled so its largest magnitude is 1.
Eigen::MatrixXcd sample_field_cartesian(const std::vector<LGIndex>& modes,
                                        const Eigen::VectorXcd& amplitudes, int n,
                                        double waist = 12.0);

Eigen::MatrixXcd sample_mode_cartesian(const LGIndex& mode, int n, double waist = 12.0);

// Type-1 amplitude-and-phase encoding on a phase-only carrier grating:
//   psi = f(|a|) sin(arg a + 2 pi x / period)
// where f inverts J1(f) = |a| J1(f_max) so the first diffraction order
// carries the requested amplitude. Requires max |a| = 1 and period >= 4 px.
HologramMap synthesize_type1(const Eigen::MatrixXcd& target, double carrier_period_px,
                             const std::string& label = "");

struct ReconstructionReport {
    double overlap = 0.0;           // |<target|first order>|^2, both unit norm
    double first_order_power = 0.0; // fraction of total power in the window
    int carrier_bin = 0;
};

// Simulate illuminating the hologram with a plane wave: FFT, cut a window
// around the +1 carrier order, center it, inverse FFT, and compare with the
// intended field.
ReconstructionReport reconstruct_first_order(const HologramMap& holo,
                                             const Eigen::MatrixXcd& target);

// 8-bit PGM (P5) export with phase mapped linearly from [0, 2 pi) to
// [0, 255].
void write_pgm(const HologramMap& holo, const std::string& path);

}  // namespace lgent
