#include <doctest.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "lgent/errors.hpp"
#include "lgent/modes.hpp"
#include "lgent/mub.hpp"

using namespace lgent;

namespace {

// Largest |<a|b>|^2 - 1/d over all cross-basis pairs, and largest Gram
// deviation from the identity within each basis.
void unbiasedness_stats(const MUBFamily& fam, double& worst_cross,
                        double& worst_gram) {
    const double flat = 1.0 / fam.d;
    worst_cross = 0.0;
    worst_gram = 0.0;
    for (size_t a = 0; a < fam.bases.size(); ++a) {
        for (int j = 0; j < fam.d; ++j) {
            for (int k = 0; k < fam.d; ++k) {
                const std::complex<double> ip =
                    fam.bases[a][j].amplitudes.dot(fam.bases[a][k].amplitudes);
                const double want = j == k ? 1.0 : 0.0;
                worst_gram = std::max(worst_gram, std::abs(std::norm(ip) - want));
            }
        }
        for (size_t b = a + 1; b < fam.bases.size(); ++b)
            for (int j = 0; j < fam.d; ++j)
                for (int k = 0; k < fam.d; ++k) {
                    const std::complex<double> ip =
                        fam.bases[a][j].amplitudes.dot(fam.bases[b][k].amplitudes);
                    worst_cross =
                        std::max(worst_cross, std::abs(std::norm(ip) - flat));
                }
    }
}

}  // namespace

TEST_CASE("mub_state small-dimension values") {
    const auto x0 = mub_state(2, 0, 0);
    CHECK(x0.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(x0.amplitudes[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(x0.amplitudes[0].imag()) < 1e-15);

    const auto y0 = mub_state(2, 1, 0);
    CHECK(y0.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(y0.amplitudes[1].imag() == doctest::Approx(1.0 / std::sqrt(2.0)));

    // d = 3, r = 1, j = 0: phases w^(m + m^2 mod 3) = (1, w, w).
    const auto v = mub_state(3, 1, 0);
    const std::complex<double> w3 = std::polar(1.0, 2.0 * M_PI / 3.0);
    CHECK(std::abs(v.amplitudes[0] - 1.0 / std::sqrt(3.0)) < 1e-14);
    CHECK(std::abs(v.amplitudes[1] - w3 / std::sqrt(3.0)) < 1e-14);
    CHECK(std::abs(v.amplitudes[2] - w3 / std::sqrt(3.0)) < 1e-14);
}

TEST_CASE("mub_state amplitudes are flat and the map is deterministic") {
    for (int d : {2, 3, 5, 7}) {
        for (int r = 0; r < d; ++r)
            for (int j = 0; j < d; ++j) {
                const auto v = mub_state(d, r, j);
                CHECK(v.dimension() == d);
                CHECK(v.family == "mub");
                CHECK(v.family_index == r);
                CHECK(v.index == j);
                for (int m = 0; m < d; ++m)
                    CHECK(std::abs(v.amplitudes[m]) ==
                          doctest::Approx(1.0 / std::sqrt(double(d))).epsilon(1e-12));
            }
    }
    const auto a = mub_state(11, 4, 7);
    const auto b = mub_state(11, 4, 7);
    CHECK((a.amplitudes - b.amplitudes).norm() == 0.0);
}

TEST_CASE("mub_state rejects bad arguments") {
    CHECK_THROWS_WITH_AS(mub_state(4, 0, 0),
                         doctest::Contains("prime"), ConfigError);
    CHECK_THROWS_AS(mub_state(5, 5, 0), ConfigError);
    CHECK_THROWS_AS(mub_state(5, -1, 0), ConfigError);
    CHECK_THROWS_AS(mub_state(5, 0, 5), ConfigError);
}

TEST_CASE("mub_family layout") {
    const auto fam = mub_family(3);
    REQUIRE(fam.bases.size() == 4);
    for (const auto& basis : fam.bases) CHECK(basis.size() == 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(fam.bases[0][j].family == "standard");
        CHECK(fam.bases[0][j].amplitudes[j] == std::complex<double>(1.0, 0.0));
    }
    CHECK(fam.bases[2][1].family_index == 1);
    CHECK_THROWS_WITH_AS(mub_family(6), doctest::Contains("prime"), ConfigError);
}

TEST_CASE("mub_family is unbiased and orthonormal across prime dimensions") {
    for (int d : {2, 3, 5, 7, 11, 13, 23}) {
        double cross = 0.0, gram = 0.0;
        unbiasedness_stats(mub_family(d), cross, gram);
        CHECK(cross < 1e-10);
        CHECK(gram < 1e-10);
    }
}

TEST_CASE("d = 43 family meets the same tolerance quickly") {
    const auto t0 = std::chrono::steady_clock::now();
    double cross = 0.0, gram = 0.0;
    unbiasedness_stats(mub_family(43), cross, gram);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(cross < 1e-10);
    CHECK(gram < 1e-10);
    CHECK(secs < 10.0);
}

TEST_CASE("tilted_family reduces to mub_family for a uniform target") {
    for (int d : {3, 5}) {
        const Eigen::VectorXd lambda =
            Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
        const auto tilted = tilted_family(lambda);
        const auto fam = mub_family(d);
        REQUIRE(tilted.families.size() == size_t(d));
        for (int r = 0; r < d; ++r)
            for (int j = 0; j < d; ++j) {
                const auto diff = tilted.families[r][j].amplitudes -
                                  fam.bases[1 + r][j].amplitudes;
                CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
            }
    }
}

TEST_CASE("tilted_family direct constructions") {
    Eigen::VectorXd lambda(2);
    lambda << 2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0);
    const auto fam = tilted_family(lambda);
    const auto& v = fam.families[0][0].amplitudes;
    CHECK(std::abs(v[0] - 2.0 / std::sqrt(5.0)) < 1e-14);
    CHECK(std::abs(v[1] - 1.0 / std::sqrt(5.0)) < 1e-14);
    CHECK(fam.families[0][0].family == "tilted");

    Eigen::VectorXd point = Eigen::VectorXd::Zero(3);
    point[0] = 1.0;
    const auto degen = tilted_family(point);
    for (int r = 0; r < 3; ++r)
        for (int j = 0; j < 3; ++j) {
            const auto& u = degen.families[r][j].amplitudes;
            CHECK(std::abs(u[0] - 1.0) < 1e-14);
            CHECK(std::abs(u[1]) < 1e-14);
            CHECK(std::abs(u[2]) < 1e-14);
        }
}

TEST_CASE("tilted_family validates the Schmidt vector") {
    Eigen::VectorXd unnorm(3);
    unnorm << 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(tilted_family(unnorm), ConfigError);
    Eigen::VectorXd negative(2);
    negative << std::sqrt(0.5), -std::sqrt(0.5);
    CHECK_THROWS_AS(tilted_family(negative), ConfigError);
    Eigen::VectorXd single(1);
    single << 1.0;
    CHECK_THROWS_AS(tilted_family(single), ConfigError);
}

namespace {

// The d = 5 radial set (ell = 0, p = 0..4) and its r = 1 MUB superpositions,
// sampled on the aperture the phase-only diagnostic uses: the rms radius of
// the highest mode group, at the default quadrature resolution.
struct PhaseOnlyFixture {
    std::shared_ptr<TransverseGrid> grid;
    std::vector<SampledField> radial;
    std::vector<SampledField> mub;

    PhaseOnlyFixture() {
        const int d = 5;
        grid = std::make_shared<TransverseGrid>(320, 256, std::sqrt(18.0));
        for (int p = 0; p < d; ++p) radial.push_back(lg_sample({0, p}, 1.0, grid));
        for (int j = 0; j < d; ++j)
            mub.push_back(superpose(radial, mub_state(d, 1, j).amplitudes));
    }
};

}  // namespace

TEST_CASE("phase_only_field flattens amplitude and keeps phase") {
    PhaseOnlyFixture fx;
    const auto po = phase_only_field(fx.mub[2]);
    CHECK(field_norm(po) == doctest::Approx(1.0).epsilon(1e-12));
    const double flat = std::abs(po.values(0, 0));
    CHECK(po.values.cwiseAbs().minCoeff() == doctest::Approx(flat).epsilon(1e-12));
    CHECK(po.values.cwiseAbs().maxCoeff() == doctest::Approx(flat).epsilon(1e-12));
    // Phase must survive untouched wherever the field is nonzero.
    const auto ratio = po.values(40, 17) / fx.mub[2].values(40, 17);
    CHECK(std::abs(std::arg(ratio)) < 1e-12);

    const auto twice = phase_only_field(po);
    CHECK((twice.values - po.values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phase-only overlaps have unit diagonal and are projection-idempotent") {
    PhaseOnlyFixture fx;
    const auto self = phase_only_overlaps(fx.radial, "radial");
    REQUIRE(self.values.rows() == 5);
    REQUIRE(self.values.cols() == 5);
    for (int m = 0; m < 5; ++m)
        CHECK(self.values(m, m) == doctest::Approx(1.0).epsilon(1e-9));
    for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 5; ++n)
            CHECK(self.values(m, n) == doctest::Approx(self.values(n, m)).epsilon(1e-12));

    // Feeding already-projected fields must not change anything.
    std::vector<SampledField> pre;
    for (const auto& f : fx.radial) pre.push_back(phase_only_field(f));
    const auto again = phase_only_overlaps(pre, "radial");
    CHECK((again.values - self.values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phase-only radial modes are far from orthogonal") {
    PhaseOnlyFixture fx;
    const auto self = phase_only_overlaps(fx.radial, "radial");
    double max_offdiag = 0.0;
    for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 5; ++n)
            if (m != n) max_offdiag = std::max(max_offdiag, self.values(m, n));
    // True-mode quadrature keeps off-diagonals below 1e-6; the phase-only set
    // has to sit far above ten times that to demonstrate non-orthogonality.
    CHECK(max_offdiag > 10.0 * 1e-6);
    // Regression value frozen from this grid (320 x 256, rho_max = sqrt 18).
    CHECK(max_offdiag == doctest::Approx(0.6081064352500608).epsilon(1e-9));
}

TEST_CASE("phase-only standard and MUB sets are not mutually unbiased") {
    PhaseOnlyFixture fx;
    const auto cross = phase_only_overlaps(fx.radial, fx.mub, "radial", "mub");
    REQUIRE(cross.values.rows() == 5);
    REQUIRE(cross.values.cols() == 5);
    CHECK(cross.label_a == "radial");
    CHECK(cross.label_b == "mub");
    const double dev = (cross.values.array() - 0.2).abs().maxCoeff();
    CHECK(dev > 0.05);
    CHECK(dev == doctest::Approx(0.3846696130997747).epsilon(1e-9));
}

TEST_CASE("phase_only_overlaps input validation") {
    PhaseOnlyFixture fx;
    CHECK_THROWS_AS(phase_only_overlaps({}, "empty"), ConfigError);
    auto other = std::make_shared<TransverseGrid>(320, 256, 3.0);
    const std::vector<SampledField> b = {lg_sample({0, 0}, 1.0, other)};
    CHECK_THROWS_AS(phase_only_overlaps(fx.radial, b, "a", "b"), ConfigError);
}
