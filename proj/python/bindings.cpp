#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "percdet/cli.hpp"
#include "percdet/detect.hpp"
#include "percdet/perclab.hpp"
#include "percdet/pgm.hpp"

namespace py = pybind11;
using namespace percdet;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Detection of grayscale objects in noisy images via maximum-cluster "
            "percolation tests on finite triangular lattices";

  py::class_<SiteId>(m, "SiteId")
      .def(py::init<int32_t, int32_t>(), py::arg("row"), py::arg("col"))
      .def_readwrite("row", &SiteId::row)
      .def_readwrite("col", &SiteId::col)
      .def("__repr__", [](const SiteId& s) {
        return "SiteId(" + std::to_string(s.row) + ", " + std::to_string(s.col) + ")";
      });

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<int32_t>(), py::arg("side_length"))
      .def_property_readonly("side", &Lattice::side)
      .def_property_readonly("site_count", &Lattice::site_count)
      .def("index_of", &Lattice::index_of)
      .def("site_at", &Lattice::site_at)
      .def("neighbors", [](const Lattice& lattice, SiteId s) {
        std::array<SiteId, 6> buffer;
        const int count = lattice.neighbors(s, buffer);
        return std::vector<SiteId>(buffer.begin(), buffer.begin() + count);
      });

  py::class_<SiteMask>(m, "SiteMask")
      .def(py::init<const Lattice&>())
      .def_property_readonly("lattice", &SiteMask::lattice)
      .def("test", py::overload_cast<int32_t>(&SiteMask::test, py::const_))
      .def("set", py::overload_cast<int32_t, bool>(&SiteMask::set))
      .def("count", &SiteMask::count)
      .def("marked_sites", &SiteMask::marked_sites);

  py::class_<DiscretizedPicture>(m, "DiscretizedPicture")
      .def_readonly("lattice", &DiscretizedPicture::lattice)
      .def_readonly("values", &DiscretizedPicture::values)
      .def_readonly("bound", &DiscretizedPicture::bound);

  m.def("discretize", &discretize, py::arg("f"), py::arg("side_length"));
  m.def("constant_picture", &constant_picture, py::arg("side_length"), py::arg("value"));
  m.def("square_picture", &square_picture, py::arg("side_length"), py::arg("square_side"),
        py::arg("intensity"));
  m.def("contains_square", &contains_square, py::arg("mask"), py::arg("side"));

  py::class_<NondegeneracyReport> nondeg(m, "NondegeneracyReport");
  py::enum_<NondegeneracyReport::Mode>(nondeg, "Mode")
      .value("jump", NondegeneracyReport::Mode::jump)
      .value("density", NondegeneracyReport::Mode::density);
  nondeg.def_readonly("m_plus", &NondegeneracyReport::m_plus)
      .def_readonly("m_minus", &NondegeneracyReport::m_minus)
      .def_readonly("m", &NondegeneracyReport::m)
      .def_readonly("mode", &NondegeneracyReport::mode)
      .def_readonly("ok", &NondegeneracyReport::ok)
      .def_readonly("reason", &NondegeneracyReport::reason);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_static("gaussian", &NoiseModel::gaussian)
      .def_static("laplace", &NoiseModel::laplace)
      .def_static("uniform", &NoiseModel::uniform)
      .def_static("student_t", &NoiseModel::student_t, py::arg("nu"))
      .def_static("discrete_symmetric", &NoiseModel::discrete_symmetric, py::arg("support"),
                  py::arg("weights"))
      .def_static("parse", &NoiseModel::parse, py::arg("descriptor"))
      .def("cdf", &NoiseModel::cdf)
      .def("quantile", &NoiseModel::quantile)
      .def("density", &NoiseModel::density)
      .def_property_readonly("family_name", &NoiseModel::family_name)
      .def("descriptor", &NoiseModel::descriptor)
      .def("validate_nondegeneracy", &NoiseModel::validate_nondegeneracy);

  py::class_<ObservedImage>(m, "ObservedImage")
      .def_readonly("lattice", &ObservedImage::lattice)
      .def_readonly("values", &ObservedImage::values)
      .def_readonly("sigma", &ObservedImage::sigma)
      .def_readonly("truncated", &ObservedImage::truncated)
      .def_readonly("range", &ObservedImage::range);

  py::class_<DetectorDevice>(m, "DetectorDevice")
      .def(py::init<double>(), py::arg("range"))
      .def_readwrite("range", &DetectorDevice::range);

  m.def("apply_noise", &apply_noise, py::arg("picture"), py::arg("sigma"), py::arg("model"),
        py::arg("seed"));
  m.def("detector_truncate", &detector_truncate, py::arg("image"), py::arg("device"));

  py::class_<PiDEstimate>(m, "PiDEstimate")
      .def_readonly("estimate", &PiDEstimate::estimate)
      .def_readonly("standard_error", &PiDEstimate::standard_error)
      .def_readonly("replicates", &PiDEstimate::replicates);
  m.def("estimate_pi_D", &estimate_pi_D, py::arg("picture"), py::arg("sigma"), py::arg("model"),
        py::arg("device"), py::arg("replicates"), py::arg("seed"));

  py::class_<ClusterLabeling>(m, "ClusterLabeling")
      .def_readonly("labels", &ClusterLabeling::labels)
      .def_readonly("cluster_sizes", &ClusterLabeling::cluster_sizes)
      .def_readonly("max_cluster_size", &ClusterLabeling::max_cluster_size);

  py::enum_<Side>(m, "Side").value("plus", Side::plus).value("minus", Side::minus);

  m.def("super_level_set", &super_level_set, py::arg("image"), py::arg("a"));
  m.def("sub_level_set", &sub_level_set, py::arg("image"), py::arg("a"));
  m.def("label_clusters", &label_clusters, py::arg("mask"));
  m.def("label_clusters_oracle", &label_clusters_oracle, py::arg("mask"));
  m.def("max_cluster_statistic", &max_cluster_statistic, py::arg("image"), py::arg("a"),
        py::arg("side"));
  m.def("crossing_cluster_exists", &crossing_cluster_exists, py::arg("mask"));

  py::enum_<PhiMode>(m, "PhiMode")
      .value("theory", PhiMode::theory)
      .value("calibrated", PhiMode::calibrated);
  py::enum_<TestSide>(m, "TestSide")
      .value("plus_only", TestSide::plus_only)
      .value("minus_only", TestSide::minus_only)
      .value("both", TestSide::both);
  py::enum_<LevelAdjust>(m, "LevelAdjust")
      .value("none", LevelAdjust::none)
      .value("bonferroni", LevelAdjust::bonferroni);

  py::class_<PhiTheory>(m, "PhiTheory")
      .def_readonly("K0", &PhiTheory::K0)
      .def_readonly("phi", &PhiTheory::phi);
  m.def("phi_theory", &phi_theory, py::arg("side_length"), py::arg("p_error"),
        py::arg("factor") = 2.0);

  py::class_<CalibrationEntry>(m, "CalibrationEntry")
      .def_readonly("side_length", &CalibrationEntry::side_length)
      .def_readonly("family", &CalibrationEntry::family)
      .def_readonly("sigma", &CalibrationEntry::sigma)
      .def_readonly("tau", &CalibrationEntry::tau)
      .def_readonly("replicates", &CalibrationEntry::replicates)
      .def_readonly("seed", &CalibrationEntry::seed)
      .def_readonly("alpha", &CalibrationEntry::alpha)
      .def_readonly("phi", &CalibrationEntry::phi)
      .def_readonly("low_resolution_warning", &CalibrationEntry::low_resolution_warning);
  m.def("calibrate_phi", &calibrate_phi, py::arg("side_length"), py::arg("tau"), py::arg("model"),
        py::arg("sigma"), py::arg("alpha_target"), py::arg("replicates"), py::arg("seed"),
        py::arg("workers") = 1);

  py::class_<TestConfig>(m, "TestConfig")
      .def(py::init([](int32_t n, double tau, double phi, PhiMode mode, TestSide side,
                       std::optional<double> K0, std::optional<double> alpha_target) {
             return TestConfig{n, tau, phi, mode, side, K0, alpha_target};
           }),
           py::arg("side_length"), py::arg("tau"), py::arg("phi"),
           py::arg("phi_mode") = PhiMode::calibrated, py::arg("side") = TestSide::both,
           py::arg("K0") = std::nullopt, py::arg("alpha_target") = std::nullopt)
      .def_readwrite("side_length", &TestConfig::side_length)
      .def_readwrite("tau", &TestConfig::tau)
      .def_readwrite("phi", &TestConfig::phi);

  py::class_<TestResult>(m, "TestResult")
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("phi", &TestResult::phi)
      .def_readonly("reject", &TestResult::reject)
      .def_readonly("tau", &TestResult::tau);
  m.def("max_cluster_test", &max_cluster_test, py::arg("image"), py::arg("config"));

  py::class_<MultiTestDecision>(m, "MultiTestDecision")
      .def_readonly("k", &MultiTestDecision::k)
      .def_readonly("a_k", &MultiTestDecision::a_k)
      .def_readonly("t_plus", &MultiTestDecision::t_plus)
      .def_readonly("t_minus", &MultiTestDecision::t_minus)
      .def_readonly("tested", &MultiTestDecision::tested)
      .def_readonly("skipped_crossing", &MultiTestDecision::skipped_crossing)
      .def_readonly("phi", &MultiTestDecision::phi)
      .def_readonly("reject", &MultiTestDecision::reject);

  py::class_<MultiTestResult>(m, "MultiTestResult")
      .def_readonly("decisions", &MultiTestResult::decisions)
      .def_readonly("overall_reject", &MultiTestResult::overall_reject)
      .def_readonly("first_rejecting_k", &MultiTestResult::first_rejecting_k)
      .def_readonly("k_max", &MultiTestResult::k_max)
      .def_readonly("per_test_level", &MultiTestResult::per_test_level);
  m.def("multi_test", &multi_test, py::arg("image"), py::arg("r"), py::arg("tau0"),
        py::arg("phi_provider"), py::arg("adjust") = LevelAdjust::bonferroni,
        py::arg("alpha_target") = 0.05);

  py::class_<UncertaintyReport>(m, "UncertaintyReport")
      .def_readonly("rho", &UncertaintyReport::rho)
      .def_readonly("side_length", &UncertaintyReport::side_length)
      .def_readonly("lhs", &UncertaintyReport::lhs)
      .def_readonly("rhs", &UncertaintyReport::rhs)
      .def_readonly("detectable", &UncertaintyReport::detectable)
      .def_readonly("sufficient_constant", &UncertaintyReport::sufficient_constant)
      .def_readonly("weak_bound_M", &UncertaintyReport::weak_bound_M);
  m.def("uncertainty_check", &uncertainty_check, py::arg("model"), py::arg("rho"),
        py::arg("side_length"));
  m.def("never_reject_bound", &never_reject_bound, py::arg("side_length"));
  m.def("s_function", &s_function, py::arg("x"));
  m.def("s_max", &s_max);
  m.def("weak_uncertainty_bound", &weak_uncertainty_bound, py::arg("model"),
        py::arg("side_length"));
  m.def("tau0_from_uncertainty", &tau0_from_uncertainty, py::arg("model"), py::arg("sigma"),
        py::arg("side_length"));

  py::class_<PercolationSample>(m, "PercolationSample")
      .def_readonly("lattice", &PercolationSample::lattice)
      .def_readonly("p", &PercolationSample::p)
      .def_readonly("mask", &PercolationSample::mask)
      .def_readonly("seed", &PercolationSample::seed);
  m.def("sample_configuration", &sample_configuration, py::arg("side_length"), py::arg("p"),
        py::arg("seed"));

  py::class_<ClusterStats>(m, "ClusterStats")
      .def_readonly("p", &ClusterStats::p)
      .def_readonly("side_length", &ClusterStats::side_length)
      .def_readonly("replicates", &ClusterStats::replicates)
      .def_readonly("tail", &ClusterStats::tail)
      .def_readonly("chi_hat", &ClusterStats::chi_hat)
      .def_readonly("chi_se", &ClusterStats::chi_se)
      .def_readonly("lambda_hat", &ClusterStats::lambda_hat)
      .def_readonly("lambda_se", &ClusterStats::lambda_se)
      .def_readonly("degenerate", &ClusterStats::degenerate)
      .def_readonly("supercritical", &ClusterStats::supercritical);
  m.def("estimate_cluster_stats", &estimate_cluster_stats, py::arg("side_length"), py::arg("p"),
        py::arg("replicates"), py::arg("seed"), py::arg("allow_supercritical") = false,
        py::arg("workers") = 1);

  py::class_<LambdaBoundReport>(m, "LambdaBoundReport")
      .def_readonly("p", &LambdaBoundReport::p)
      .def_readonly("chi_hat", &LambdaBoundReport::chi_hat)
      .def_readonly("lambda_hat", &LambdaBoundReport::lambda_hat)
      .def_readonly("geometric_sum_bound", &LambdaBoundReport::geometric_sum_bound)
      .def_readonly("definitional_ok", &LambdaBoundReport::definitional_ok)
      .def_readonly("log_bound", &LambdaBoundReport::log_bound)
      .def_readonly("lambda_within_log_bound", &LambdaBoundReport::lambda_within_log_bound)
      .def_readonly("chi_bound", &LambdaBoundReport::chi_bound)
      .def_readonly("chi_above_lower_bound", &LambdaBoundReport::chi_above_lower_bound)
      .def_readonly("chi_below_upper_bound", &LambdaBoundReport::chi_below_upper_bound);
  m.def("verify_lambda_bound", &verify_lambda_bound, py::arg("stats"));

  py::class_<GrayscaleImage>(m, "GrayscaleImage")
      .def_readonly("width", &GrayscaleImage::width)
      .def_readonly("height", &GrayscaleImage::height)
      .def_readonly("maxval", &GrayscaleImage::maxval)
      .def_readonly("pixels", &GrayscaleImage::pixels);
  m.def("load_pgm", &load_pgm, py::arg("path"));
  m.def("write_pgm", &write_pgm, py::arg("image"), py::arg("path"), py::arg("binary") = true);
  m.def("image_to_observed", &image_to_observed, py::arg("image"), py::arg("r"),
        py::arg("baseline"), py::arg("side_length"), py::arg("sigma") = 1.0);
  m.def("observed_to_pgm", &observed_to_pgm, py::arg("image"), py::arg("r"),
        py::arg("maxval") = 255);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("percdet");
    for (const auto& a : args) argv.push_back(a.c_str());
    return percdet::cli::run_cli(static_cast<int>(argv.size()), argv.data());
  });
}
