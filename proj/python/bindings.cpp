#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "adnpca/error.hpp"
#include "adnpca/eval.hpp"
#include "adnpca/featstore.hpp"
#include "adnpca/gaussian.hpp"
#include "adnpca/heuristics.hpp"
#include "adnpca/npca.hpp"
#include "adnpca/synthgen.hpp"

namespace py = pybind11;
using namespace adnpca;

namespace {

PyObject* g_error_type = nullptr;

Pairing pairs_from_python(const std::vector<std::pair<std::string, std::string>>& pairs) {
    Pairing out;
    for (const auto& [n, s] : pairs) out.push_back({n, s});
    return out;
}

}  // namespace

PYBIND11_MODULE(_adnpca, m) {
    m.doc() = "Gaussian feature-space anomaly detection with Negated PCA";

    g_error_type = PyErr_NewException("adnpca.AdnpcaError", PyExc_RuntimeError, nullptr);
    m.add_object("AdnpcaError", py::handle(g_error_type));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(g_error_type, "s", e.what()));
            inst.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(g_error_type, inst.ptr());
        }
    });

    py::enum_<Split>(m, "Split")
        .value("train", Split::Train)
        .value("test_normal", Split::TestNormal)
        .value("test_anomalous", Split::TestAnomalous)
        .value("synthetic", Split::Synthetic);

    py::enum_<CurveMethod>(m, "CurveMethod")
        .value("eigen_ratio", CurveMethod::EigenRatio)
        .value("normality", CurveMethod::Normality)
        .value("relative_distance", CurveMethod::RelativeDistance)
        .value("differential", CurveMethod::Differential);

    py::enum_<KsCorrection>(m, "KsCorrection")
        .value("none", KsCorrection::None)
        .value("stephens", KsCorrection::Stephens);

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def(py::init([](Eigen::MatrixXd data, std::string category, int stage, Split split,
                         std::vector<std::string> ids) {
                 return make_feature_matrix(std::move(data), std::move(category), stage, split, std::move(ids));
             }),
             py::arg("data"), py::arg("category") = "", py::arg("stage") = 0, py::arg("split") = Split::Train,
             py::arg("image_ids") = std::vector<std::string>{})
        .def_readonly("data", &FeatureMatrix::data)
        .def_readonly("category", &FeatureMatrix::category)
        .def_readonly("stage", &FeatureMatrix::stage)
        .def_readonly("split", &FeatureMatrix::split)
        .def_readonly("image_ids", &FeatureMatrix::image_ids);

    m.def("read_feature_matrix", &read_feature_matrix, py::arg("path"));
    m.def(
        "write_feature_matrix",
        [](const FeatureMatrix& fm, const std::filesystem::path& path) { write_feature_matrix(fm, path, std::nullopt); },
        py::arg("matrix"), py::arg("path"));

    py::class_<GaussianModel>(m, "GaussianModel")
        .def_readonly("mu", &GaussianModel::mu)
        .def_readonly("sigma", &GaussianModel::sigma)
        .def_readonly("shrinkage", &GaussianModel::shrinkage)
        .def_readonly("n_fit", &GaussianModel::n_fit)
        .def_readonly("has_constant_column", &GaussianModel::has_constant_column)
        .def_property_readonly("dim", &GaussianModel::dim)
        .def_property_readonly("rank_deficient", &GaussianModel::rank_deficient);

    m.def(
        "fit_gaussian",
        [](const Eigen::MatrixXd& rows, double shrinkage) { return fit_gaussian(rows, shrinkage); },
        py::arg("rows"), py::arg("shrinkage") = kDefaultShrinkage);

    py::class_<SpectralModel>(m, "SpectralModel")
        .def_readonly("source", &SpectralModel::source)
        .def_readonly("eigenvalues", &SpectralModel::eigenvalues)
        .def_readonly("eigenvectors", &SpectralModel::eigenvectors)
        .def_readonly("fingerprint", &SpectralModel::fingerprint)
        .def_property_readonly("dim", &SpectralModel::dim)
        .def_property_readonly("mu", [](const SpectralModel& s) { return s.mu(); });

    m.def("spectral_decompose", &spectral_decompose, py::arg("model"));
    m.def(
        "save_model",
        [](const SpectralModel& s, const std::filesystem::path& path) { save_model(s, path); },
        py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<WhitenedMatrix>(m, "WhitenedMatrix")
        .def_readonly("data", &WhitenedMatrix::data)
        .def_readonly("image_ids", &WhitenedMatrix::image_ids)
        .def_readonly("split", &WhitenedMatrix::split)
        .def_readonly("model_fingerprint", &WhitenedMatrix::model_fingerprint);

    m.def(
        "whiten", [](const SpectralModel& s, const Eigen::MatrixXd& rows) { return whiten(s, rows); },
        py::arg("model"), py::arg("rows"));
    m.def(
        "whiten", [](const SpectralModel& s, const FeatureMatrix& fm) { return whiten(s, fm); }, py::arg("model"),
        py::arg("features"));
    m.def(
        "mahalanobis", [](const SpectralModel& s, const Eigen::VectorXd& x) { return mahalanobis(s, x); },
        py::arg("model"), py::arg("x"));
    m.def(
        "gaussian_logpdf", [](const SpectralModel& s, const Eigen::VectorXd& x) { return gaussian_logpdf(s, x); },
        py::arg("model"), py::arg("x"));

    m.def(
        "npca_score", [](const WhitenedMatrix& w, Index k) { return npca_score(w, k).mean_sq; }, py::arg("whitened"),
        py::arg("k"), "Mean squared whitened coordinate over the k smallest-variance directions, per row.");

    py::class_<HeuristicCurve>(m, "HeuristicCurve")
        .def_readonly("method", &HeuristicCurve::method)
        .def_readonly("ks", &HeuristicCurve::ks)
        .def_readonly("values", &HeuristicCurve::values)
        .def("__len__", &HeuristicCurve::size);

    py::class_<Selection>(m, "Selection")
        .def_readonly("k_tilde", &Selection::k_tilde)
        .def_readonly("tolerance", &Selection::tolerance)
        .def_readonly("discarded_first_point", &Selection::discarded_first_point)
        .def_readonly("no_local_minimum", &Selection::no_local_minimum)
        .def_readonly("first_local_minimum", &Selection::first_local_minimum);

    m.def(
        "eigenvalue_ratio_curve",
        [](const SpectralModel& s, bool literal) { return eigenvalue_ratio_curve(s, literal); }, py::arg("model"),
        py::arg("literal") = false);
    m.def(
        "ks_statistic", [](const std::vector<double>& x) { return ks_statistic(x); }, py::arg("sample"));
    m.def("kolmogorov_sf", &kolmogorov_sf, py::arg("t"));
    m.def(
        "ks_pvalue", [](const std::vector<double>& x, KsCorrection c) { return ks_pvalue(x, c); }, py::arg("sample"),
        py::arg("correction") = KsCorrection::None);
    m.def("normality_curve", &normality_curve, py::arg("whitened_train"), py::arg("correction") = KsCorrection::None);
    m.def(
        "relative_distance_curve",
        [](const WhitenedMatrix& n, const WhitenedMatrix& s,
           const std::optional<std::vector<std::pair<std::string, std::string>>>& pairs) {
            return pairs ? relative_distance_curve(n, s, pairs_from_python(*pairs)) : relative_distance_curve(n, s);
        },
        py::arg("whitened_normal"), py::arg("whitened_synthetic"), py::arg("pairing") = py::none());
    m.def("differential_curve", &differential_curve, py::arg("curve"));
    m.def("select_k_argmax", &select_k_argmax, py::arg("curve"));
    m.def("select_k_tolerance", &select_k_tolerance, py::arg("curve"), py::arg("tolerance") = kDefaultTolerance);

    m.def(
        "auroc", [](const std::vector<double>& n, const std::vector<double>& a) { return auroc(n, a); },
        py::arg("scores_normal"), py::arg("scores_anomalous"));
    m.def(
        "roc_curve",
        [](const std::vector<double>& scores, const std::vector<bool>& labels) {
            const RocResult r = roc_curve(scores, labels);
            py::dict d;
            d["thresholds"] = r.thresholds;
            d["tpr"] = r.tpr;
            d["fpr"] = r.fpr;
            d["auroc"] = r.auroc;
            return d;
        },
        py::arg("scores"), py::arg("labels"));

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("ks", &SweepResult::ks)
        .def_readonly("auroc_per_k", &SweepResult::auroc_per_k)
        .def_readonly("k_star", &SweepResult::k_star)
        .def_readonly("auroc_star", &SweepResult::auroc_star)
        .def("auroc_at", &SweepResult::auroc_at, py::arg("k"));

    m.def("sweep_k", &sweep_k, py::arg("whitened_normal"), py::arg("whitened_anomalous"), py::arg("threads") = 1);
    m.def(
        "regret", [](const SweepResult& s, const Selection& sel) { return regret(s, sel).regret; }, py::arg("sweep"),
        py::arg("selection"));

    py::class_<BenchmarkSpec>(m, "BenchmarkSpec")
        .def(py::init<>())
        .def_readwrite("seed", &BenchmarkSpec::seed)
        .def_readwrite("n_train", &BenchmarkSpec::n_train)
        .def_readwrite("n_test", &BenchmarkSpec::n_test)
        .def_readwrite("d", &BenchmarkSpec::d)
        .def_readwrite("k_true", &BenchmarkSpec::k_true)
        .def_readwrite("gap", &BenchmarkSpec::gap)
        .def_readwrite("offset", &BenchmarkSpec::offset)
        .def_readwrite("ramp", &BenchmarkSpec::ramp)
        .def_readwrite("rotate", &BenchmarkSpec::rotate)
        .def_readwrite("fixed_direction", &BenchmarkSpec::fixed_direction)
        .def_readwrite("category", &BenchmarkSpec::category)
        .def_readwrite("stage", &BenchmarkSpec::stage);

    m.def("planted_spectrum", &planted_spectrum, py::arg("spec"));
    m.def(
        "generate_benchmark",
        [](const BenchmarkSpec& spec) {
            Benchmark b = generate_benchmark(spec);
            py::dict d;
            d["train"] = b.train;
            d["test_normal"] = b.test_normal;
            d["test_anomalous"] = b.test_anomalous;
            d["synthetic"] = b.synthetic;
            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& p : b.pairing) pairs.emplace_back(p.normal_id, p.synth_id);
            d["pairing"] = pairs;
            d["k_true"] = b.k_true;
            d["spectrum"] = b.spectrum;
            return d;
        },
        py::arg("spec"));
}
