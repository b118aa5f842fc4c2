#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lgent/cgh.hpp"
#include "lgent/mub.hpp"
#include "lgent/pipeline.hpp"

namespace py = pybind11;
using namespace lgent;

namespace {

std::vector<StateVector> columns_to_projectors(const Eigen::MatrixXcd& m,
                                               const std::string& family) {
    std::vector<StateVector> out;
    out.reserve(m.cols());
    for (int j = 0; j < m.cols(); ++j) {
        StateVector v;
        v.amplitudes = m.col(j);
        v.family = family;
        v.index = j;
        out.push_back(std::move(v));
    }
    return out;
}

Eigen::MatrixXcd basis_to_columns(const std::vector<StateVector>& basis) {
    if (basis.empty()) return {};
    Eigen::MatrixXcd m(basis[0].dimension(), static_cast<int>(basis.size()));
    for (size_t j = 0; j < basis.size(); ++j) m.col(static_cast<int>(j)) = basis[j].amplitudes;
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Laguerre-Gaussian two-photon entanglement: simulation, measurement "
              "synthesis, and dimensionality certification";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<LGIndex>(m, "LGIndex")
        .def(py::init<int, int>(), py::arg("ell"), py::arg("p"))
        .def_readwrite("ell", &LGIndex::ell)
        .def_readwrite("p", &LGIndex::p)
        .def("__eq__", [](const LGIndex& a, const LGIndex& b) { return a == b; })
        .def("__repr__", [](const LGIndex& i) { return mode_label(i); });
    m.def("mode_group", &mode_group, py::arg("index"));
    m.def("mode_label", &mode_label, py::arg("index"));
    m.def("lg_amplitude", &lg_amplitude, py::arg("index"), py::arg("waist_um"),
          py::arg("rho"), py::arg("phi"));

    py::enum_<BasisKind>(m, "BasisKind")
        .value("Radial", BasisKind::Radial)
        .value("Azimuthal", BasisKind::Azimuthal)
        .value("FullField", BasisKind::FullField)
        .value("Explicit", BasisKind::Explicit);
    py::enum_<BasisOrdering>(m, "BasisOrdering")
        .value("Default", BasisOrdering::Default)
        .value("ModeGroup", BasisOrdering::ModeGroup)
        .value("EllAscending", BasisOrdering::EllAscending)
        .value("PAscending", BasisOrdering::PAscending);
    py::class_<BasisSpec>(m, "BasisSpec")
        .def(py::init<>())
        .def_readwrite("kind", &BasisSpec::kind)
        .def_readwrite("ell_min", &BasisSpec::ell_min)
        .def_readwrite("ell_max", &BasisSpec::ell_max)
        .def_readwrite("p_min", &BasisSpec::p_min)
        .def_readwrite("p_max", &BasisSpec::p_max)
        .def_readwrite("dimension", &BasisSpec::dimension)
        .def_readwrite("ordering", &BasisSpec::ordering)
        .def_readwrite("explicit_modes", &BasisSpec::explicit_modes);
    m.def("enumerate_basis", &enumerate_basis, py::arg("spec"));
    m.def(
        "radial_basis",
        [](int count) {
            BasisSpec spec;
            spec.kind = BasisKind::Radial;
            spec.p_max = count - 1;
            return enumerate_basis(spec);
        },
        py::arg("count"), "ell = 0 modes with p = 0 .. count-1");
    m.def(
        "fullfield_basis",
        [](int ell_min, int ell_max, int p_max, int dimension) {
            BasisSpec spec;
            spec.kind = BasisKind::FullField;
            spec.ell_min = ell_min;
            spec.ell_max = ell_max;
            spec.p_max = p_max;
            spec.dimension = dimension;
            return enumerate_basis(spec);
        },
        py::arg("ell_min") = -8, py::arg("ell_max") = 7, py::arg("p_max") = 4,
        py::arg("dimension") = 43);

    py::class_<OpticsConfig>(m, "OpticsConfig")
        .def(py::init([](double pump_wavelength_nm, double signal_wavelength_nm,
                         double pump_waist_um, double collection_waist_um,
                         double focal_length_mm, double magnification,
                         double phase_matching_width, const std::string& phase_matching) {
                 OpticsConfig::Params p;
                 p.pump_wavelength_nm = pump_wavelength_nm;
                 p.signal_wavelength_nm = signal_wavelength_nm;
                 p.pump_waist_um = pump_waist_um;
                 p.collection_waist_um = collection_waist_um;
                 p.focal_length_mm = focal_length_mm;
                 p.magnification = magnification;
                 p.phase_matching_width = phase_matching_width;
                 if (phase_matching == "sinc")
                     p.phase_matching = PhaseMatching::Sinc;
                 else if (phase_matching == "gaussian")
                     p.phase_matching = PhaseMatching::Gaussian;
                 else
                     throw ConfigError("phase_matching must be 'sinc' or 'gaussian'");
                 return OpticsConfig(p);
             }),
             py::arg("pump_wavelength_nm") = 775.0,
             py::arg("signal_wavelength_nm") = 1550.0, py::arg("pump_waist_um") = 450.0,
             py::arg("collection_waist_um") = 199.658, py::arg("focal_length_mm") = 250.0,
             py::arg("magnification") = 3.3, py::arg("phase_matching_width") = 0.10824,
             py::arg("phase_matching") = "sinc")
        .def("with_waist_ratio", &OpticsConfig::with_waist_ratio, py::arg("gamma"))
        .def_property_readonly("pump_bandwidth", &OpticsConfig::pump_bandwidth)
        .def_property_readonly("collection_bandwidth", &OpticsConfig::collection_bandwidth)
        .def_property_readonly("collection_mode_waist_um",
                               &OpticsConfig::collection_mode_waist_um)
        .def_property_readonly("waist_ratio", &OpticsConfig::waist_ratio);

    py::class_<CoefficientTensor>(m, "CoefficientTensor")
        .def(py::init([](const Eigen::MatrixXcd& values, const std::vector<LGIndex>& basis,
                         bool conjugate_idler_frame) {
                 CoefficientTensor t;
                 t.values = values;
                 t.basis = basis;
                 t.conjugate_idler_frame = conjugate_idler_frame;
                 return t;
             }),
             py::arg("values"), py::arg("basis"), py::arg("conjugate_idler_frame") = true)
        .def_readonly("values", &CoefficientTensor::values)
        .def_readonly("basis", &CoefficientTensor::basis)
        .def_readonly("conjugate_idler_frame", &CoefficientTensor::conjugate_idler_frame)
        .def_readonly("quadrature_residual", &CoefficientTensor::quadrature_residual);
    m.def(
        "lg_coefficients",
        [](const std::vector<LGIndex>& basis, const OpticsConfig& cfg,
           bool conjugate_idler_frame, int n_radial, int n_angular) {
            return lg_coefficients(basis, cfg, conjugate_idler_frame,
                                   {n_radial, n_angular});
        },
        py::arg("basis"), py::arg("optics"), py::arg("conjugate_idler_frame") = true,
        py::arg("n_radial") = 320, py::arg("n_angular") = 256);

    py::class_<SchmidtReport>(m, "SchmidtReport")
        .def_readonly("lambda_", &SchmidtReport::lambda)
        .def_readonly("participation", &SchmidtReport::participation)
        .def_readonly("diagonal_fraction", &SchmidtReport::diagonal_fraction);
    m.def("schmidt_analysis", &schmidt_analysis, py::arg("tensor"));

    py::class_<GammaSweepRow>(m, "GammaSweepRow")
        .def_readonly("gamma", &GammaSweepRow::gamma)
        .def_readonly("participation", &GammaSweepRow::participation)
        .def_readonly("diagonal_fraction", &GammaSweepRow::diagonal_fraction);
    m.def(
        "sweep_gamma",
        [](const OpticsConfig& cfg, const std::vector<double>& gammas,
           const std::vector<LGIndex>& basis, int n_radial, int n_angular) {
            return sweep_gamma(cfg, gammas, basis, {n_radial, n_angular});
        },
        py::arg("optics"), py::arg("gammas"), py::arg("basis"), py::arg("n_radial") = 320,
        py::arg("n_angular") = 256);

    m.def("is_prime", &is_prime, py::arg("d"));
    m.def(
        "mub_vector",
        [](int d, int r, int j) { return mub_state(d, r, j).amplitudes; }, py::arg("d"),
        py::arg("r"), py::arg("j"));
    m.def(
        "mub_basis",
        [](int d, int r) {
            const MUBFamily fam = mub_family(d);
            return basis_to_columns(fam.bases[static_cast<size_t>(1 + r)]);
        },
        py::arg("d"), py::arg("r"), "columns are the basis vectors");

    py::class_<JointState>(m, "JointState")
        .def(py::init([](const CoefficientTensor& tensor, double visibility,
                         double azimuthal_crosstalk, double radial_crosstalk) {
                 JointState s;
                 s.tensor = tensor;
                 s.visibility = visibility;
                 s.azimuthal_crosstalk = azimuthal_crosstalk;
                 s.radial_crosstalk = radial_crosstalk;
                 return s;
             }),
             py::arg("tensor"), py::arg("visibility") = 1.0,
             py::arg("azimuthal_crosstalk") = 0.0, py::arg("radial_crosstalk") = 0.0)
        .def_readonly("tensor", &JointState::tensor)
        .def_readonly("visibility", &JointState::visibility);

    m.def(
        "probability_matrix",
        [](const JointState& state, const Eigen::MatrixXcd& projectors_s,
           const Eigen::MatrixXcd& projectors_i) {
            return probability_matrix(state, columns_to_projectors(projectors_s, "custom"),
                                      columns_to_projectors(projectors_i, "custom"));
        },
        py::arg("state"), py::arg("projectors_s"), py::arg("projectors_i"),
        "projector matrices hold one measurement vector per column");

    py::class_<CoincidenceRecord>(m, "CoincidenceRecord")
        .def_readonly("basis_s", &CoincidenceRecord::basis_s)
        .def_readonly("basis_i", &CoincidenceRecord::basis_i)
        .def_readonly("counts", &CoincidenceRecord::counts)
        .def_readonly("singles_s", &CoincidenceRecord::singles_s)
        .def_readonly("singles_i", &CoincidenceRecord::singles_i)
        .def_readonly("budget", &CoincidenceRecord::budget)
        .def_readonly("seed", &CoincidenceRecord::seed);

    m.def(
        "simulate_counts",
        [](const JointState& state, const Eigen::MatrixXcd& projectors_s,
           const Eigen::MatrixXcd& projectors_i, const std::string& label_s,
           const std::string& label_i, const Eigen::VectorXd& eta_s,
           const Eigen::VectorXd& eta_i, double budget, std::uint64_t seed) {
            EfficiencyModel eff;
            eff.signal = eta_s.size() ? eta_s
                                      : Eigen::VectorXd::Ones(projectors_s.cols());
            eff.idler = eta_i.size() ? eta_i
                                     : Eigen::VectorXd::Ones(projectors_i.cols());
            return simulate_counts(state, columns_to_projectors(projectors_s, label_s),
                                   columns_to_projectors(projectors_i, label_i), label_s,
                                   label_i, eff, budget, seed);
        },
        py::arg("state"), py::arg("projectors_s"), py::arg("projectors_i"),
        py::arg("label_s"), py::arg("label_i"), py::arg("eta_s") = Eigen::VectorXd(),
        py::arg("eta_i") = Eigen::VectorXd(), py::arg("budget") = 1e4,
        py::arg("seed") = 1);
    m.def("loss_correct", &loss_correct, py::arg("record"));

    py::class_<TargetState>(m, "TargetState")
        .def_static("uniform", &TargetState::uniform, py::arg("d"))
        .def_readonly("lambda_", &TargetState::lambda)
        .def_readonly("source", &TargetState::source);
    m.def("nominate_target", &nominate_target, py::arg("corrected_counts"));

    py::class_<FidelityEstimate>(m, "FidelityEstimate")
        .def_readonly("value", &FidelityEstimate::value)
        .def_readonly("error", &FidelityEstimate::error)
        .def_readonly("method", &FidelityEstimate::method)
        .def_readonly("bases_used", &FidelityEstimate::bases_used);

    m.def("p_corr", py::overload_cast<const Eigen::MatrixXd&>(&p_corr),
          py::arg("counts"));
    m.def("exact_fidelity",
          py::overload_cast<const Eigen::MatrixXd&, const std::vector<Eigen::MatrixXd>&>(
              &exact_fidelity),
          py::arg("standard_counts"), py::arg("mub_counts"));
    m.def("exact_fidelity_records",
          py::overload_cast<const std::vector<CoincidenceRecord>&>(&exact_fidelity),
          py::arg("records"));
    m.def("fidelity_lower_bound",
          py::overload_cast<const Eigen::MatrixXd&,
                            const std::vector<std::pair<int, Eigen::MatrixXd>>&,
                            const TargetState&>(&fidelity_lower_bound),
          py::arg("standard_counts"), py::arg("mub_counts"), py::arg("target"));
    m.def("fidelity_lower_bound_records",
          py::overload_cast<const std::vector<CoincidenceRecord>&, const TargetState&>(
              &fidelity_lower_bound),
          py::arg("records"), py::arg("target"));
    m.def("oracle_fidelity", &oracle_fidelity, py::arg("tensor"), py::arg("visibility"),
          py::arg("target"));
    m.def("schmidt_rank_bound", &schmidt_rank_bound, py::arg("lambda_"), py::arg("r"));

    py::class_<CertificationResult>(m, "CertificationResult")
        .def_readonly("d_ent", &CertificationResult::d_ent)
        .def_readonly("fidelity", &CertificationResult::fidelity)
        .def_readonly("bound", &CertificationResult::bound)
        .def_readonly("margin", &CertificationResult::margin)
        .def_readonly("bound_table", &CertificationResult::bound_table);
    m.def("certify_dimension", &certify_dimension, py::arg("fidelity"),
          py::arg("lambda_"));
    m.def(
        "certify_dimension_value",
        [](double fidelity, int d) {
            FidelityEstimate est;
            est.value = fidelity;
            est.method = "fixture";
            est.target = TargetState::uniform(d);
            return certify_dimension(est, est.target.lambda);
        },
        py::arg("fidelity"), py::arg("d"),
        "certification of a bare fidelity against the uniform target");

    py::class_<MonteCarloStats>(m, "MonteCarloStats")
        .def_readonly("mean", &MonteCarloStats::mean)
        .def_readonly("stddev", &MonteCarloStats::stddev)
        .def_readonly("trials", &MonteCarloStats::trials);
    m.def("monte_carlo_errors", &monte_carlo_errors, py::arg("records"),
          py::arg("estimator"), py::arg("trials") = 250, py::arg("seed") = 1);

    py::class_<HologramMap>(m, "HologramMap")
        .def_readonly("phase", &HologramMap::phase)
        .def_readonly("pitch_um", &HologramMap::pitch_um)
        .def_readonly("carrier_period_px", &HologramMap::carrier_period_px)
        .def_readonly("label", &HologramMap::label);
    py::class_<ReconstructionReport>(m, "ReconstructionReport")
        .def_readonly("overlap", &ReconstructionReport::overlap)
        .def_readonly("first_order_power", &ReconstructionReport::first_order_power)
        .def_readonly("carrier_bin", &ReconstructionReport::carrier_bin);
    m.def("sample_mode_cartesian", &sample_mode_cartesian, py::arg("mode"), py::arg("n"),
          py::arg("waist") = 12.0);
    m.def("sample_field_cartesian", &sample_field_cartesian, py::arg("modes"),
          py::arg("amplitudes"), py::arg("n"), py::arg("waist") = 12.0);
    m.def("synthesize_type1", &synthesize_type1, py::arg("target"),
          py::arg("carrier_period_px") = 8.0, py::arg("label") = "");
    m.def("reconstruct_first_order", &reconstruct_first_order, py::arg("hologram"),
          py::arg("target"));
    m.def("write_pgm", &write_pgm, py::arg("hologram"), py::arg("path"));

    py::class_<ConfigDocument>(m, "ConfigDocument").def(py::init<>());
    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("parse_config_file", &parse_config_file, py::arg("path"));
    m.def("serialize_config", &serialize_config, py::arg("config"));

    py::class_<RunManifest>(m, "RunManifest")
        .def_readonly("subcommand", &RunManifest::subcommand)
        .def_readonly("seed", &RunManifest::seed)
        .def_readonly("config_json", &RunManifest::config_json)
        .def_readonly("files", &RunManifest::files)
        .def_readonly("wall_ms", &RunManifest::wall_ms);
    m.def(
        "run_pipeline",
        [](const ConfigDocument& cfg, const std::string& subcommand,
           const std::string& out_dir, std::uint64_t seed, int mubs,
           const std::string& target, const std::vector<std::string>& bases) {
            RunOptions opt;
            opt.subcommand = subcommand;
            opt.out_dir = out_dir;
            opt.seed = seed;
            opt.mub_limit = mubs;
            opt.target_override = target;
            opt.bases = bases;
            return run_pipeline(cfg, opt);
        },
        py::arg("config"), py::arg("subcommand"), py::arg("out_dir"), py::arg("seed") = 1,
        py::arg("mubs") = -1, py::arg("target") = "",
        py::arg("bases") = std::vector<std::string>());
}
