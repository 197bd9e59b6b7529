#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "transrate/baselines.hpp"
#include "transrate/errors.hpp"
#include "transrate/oracle.hpp"
#include "transrate/rankeval.hpp"
#include "transrate/transrate.hpp"
#include "transrate/zoo_io.hpp"

namespace py = pybind11;
using namespace transrate;

namespace {

using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_features(const Eigen::Ref<const Matrix>& x) { return FeatureMatrix(Matrix(x)); }

LabelVector to_labels(py::array labels, const std::string& task) {
  if (task == "regression") {
    const auto v = RealArray::ensure(labels);
    if (!v || v.ndim() != 1) throw Error(ErrorKind::InvalidArgument, "labels must be a 1-D array");
    return LabelVector::regression(std::vector<double>(v.data(), v.data() + v.size()));
  }
  if (task != "classification")
    throw Error(ErrorKind::InvalidArgument, "task must be 'classification' or 'regression'");
  const auto v = IntArray::ensure(labels);
  if (!v || v.ndim() != 1) throw Error(ErrorKind::InvalidArgument, "labels must be a 1-D array");
  std::vector<std::int32_t> ids;
  ids.reserve(static_cast<std::size_t>(v.size()));
  for (py::ssize_t i = 0; i < v.size(); ++i) {
    const auto id = v.data()[i];
    if (id < 0 || id > std::numeric_limits<std::int32_t>::max())
      throw Error(ErrorKind::NonInteger, "class ids must be non-negative 32-bit integers");
    ids.push_back(static_cast<std::int32_t>(id));
  }
  return LabelVector::classification(std::move(ids));
}

std::vector<double> to_vector(const RealArray& a) {
  if (a.ndim() != 1) throw Error(ErrorKind::InvalidArgument, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transferability scores over extracted features";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "TransRateError", PyExc_ValueError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object instance = type(e.what());
      instance.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  m.def(
      "transrate",
      [](const Eigen::Ref<const Matrix>& features, py::array labels, double eps, bool unit_norm,
         bool per_dim, const std::string& class_weighting, bool subtract_label_entropy, int bins,
         const std::string& task, int threads) {
        ScoreConfig cfg;
        cfg.eps = eps;
        cfg.unit_norm = unit_norm;
        cfg.per_dim = per_dim;
        cfg.class_weighting = parse_class_weighting(class_weighting);
        cfg.subtract_label_entropy = subtract_label_entropy;
        cfg.regression_bins = bins;
        const auto f = to_features(features);
        const auto y = to_labels(std::move(labels), task);
        py::gil_scoped_release release;
        return transrate_score(f, y, cfg, "", threads).value;
      },
      py::arg("features"), py::arg("labels"), py::arg("eps") = 1e-4, py::arg("unit_norm") = true,
      py::arg("per_dim") = true, py::arg("class_weighting") = "empirical",
      py::arg("subtract_label_entropy") = false, py::arg("bins") = 10,
      py::arg("task") = "classification", py::arg("threads") = 1);

  m.def(
      "coding_rate",
      [](const Eigen::Ref<const Matrix>& features, double eps) {
        return coding_rate(to_features(features), eps);
      },
      py::arg("features"), py::arg("eps") = 1e-4);

  m.def(
      "conditional_coding_rate",
      [](const Eigen::Ref<const Matrix>& features, py::array labels, double eps,
         const std::string& class_weighting) {
        return conditional_coding_rate(to_features(features), to_labels(std::move(labels), "classification"),
                                       eps, parse_class_weighting(class_weighting));
      },
      py::arg("features"), py::arg("labels"), py::arg("eps") = 1e-4,
      py::arg("class_weighting") = "empirical");

  m.def(
      "leep",
      [](const Eigen::Ref<const Matrix>& probs, py::array labels) {
        return leep_score(PseudoLabelMatrix(Matrix(probs)), to_labels(std::move(labels), "classification"));
      },
      py::arg("pseudo_labels"), py::arg("labels"));
  m.def(
      "nce",
      [](const Eigen::Ref<const Matrix>& probs, py::array labels) {
        return nce_score(PseudoLabelMatrix(Matrix(probs)), to_labels(std::move(labels), "classification"));
      },
      py::arg("pseudo_labels"), py::arg("labels"));
  m.def(
      "hscore",
      [](const Eigen::Ref<const Matrix>& features, py::array labels) {
        return hscore(to_features(features), to_labels(std::move(labels), "classification"));
      },
      py::arg("features"), py::arg("labels"));
  m.def(
      "logme",
      [](const Eigen::Ref<const Matrix>& features, py::array labels, const std::string& task) {
        return logme_score(to_features(features), to_labels(std::move(labels), task)).value;
      },
      py::arg("features"), py::arg("labels"), py::arg("task") = "classification");
  m.def(
      "lfc",
      [](const Eigen::Ref<const Matrix>& features, py::array labels) {
        return lfc_score(to_features(features), to_labels(std::move(labels), "classification"));
      },
      py::arg("features"), py::arg("labels"));

  m.def("pearson", [](const RealArray& x, const RealArray& y) { return pearson(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));
  m.def("kendall_tau",
        [](const RealArray& x, const RealArray& y) { return kendall_tau(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));
  m.def("weighted_tau",
        [](const RealArray& x, const RealArray& y) { return weighted_tau(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));

  m.def(
      "histogram_mi",
      [](const Eigen::Ref<const Matrix>& features, py::array labels, int bins_per_dim) {
        return histogram_mi(to_features(features), to_labels(std::move(labels), "classification"),
                            bins_per_dim);
      },
      py::arg("features"), py::arg("labels"), py::arg("bins_per_dim") = 8);

  m.def(
      "gen_blobs",
      [](std::vector<std::vector<double>> means, double stddev, std::size_t per_class, std::uint64_t seed) {
        const auto data = gen_blobs(BlobSpec{std::move(means), stddev, per_class, seed});
        const auto ids = data.labels.class_ids();
        py::array_t<std::int64_t> y(static_cast<py::ssize_t>(ids.size()));
        std::copy(ids.begin(), ids.end(), y.mutable_data());
        return py::make_tuple(data.features.data(), y);
      },
      py::arg("means"), py::arg("stddev") = 1.0, py::arg("per_class") = 100, py::arg("seed") = 0);

  m.def(
      "read_features", [](const std::string& path) { return read_feature_file(path).data(); },
      py::arg("path"));
  m.def(
      "write_features",
      [](const std::string& path, const Eigen::Ref<const Matrix>& m) {
        write_feature_file(path, Matrix(m), detect_feature_format(path));
      },
      py::arg("path"), py::arg("matrix"));
}
