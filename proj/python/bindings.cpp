#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ergokit/config.hpp"
#include "ergokit/ergodicity.hpp"
#include "ergokit/error.hpp"
#include "ergokit/io.hpp"
#include "ergokit/models.hpp"
#include "ergokit/noise.hpp"
#include "ergokit/norms.hpp"
#include "ergokit/simulate.hpp"

namespace py = pybind11;
using namespace ergokit;

namespace {

using Rows = std::vector<std::vector<double>>;

StateVector to_vector(const std::vector<double>& v) {
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorKind::invalid_parameter, "vector length must be in 1.." + std::to_string(kMaxDim));
  }
  return StateVector(std::span<const double>(v));
}

SquareMatrix to_matrix(const Rows& rows) {
  const std::size_t n = rows.size();
  if (n == 0 || n > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorKind::invalid_parameter, "matrix dimension must be in 1.." + std::to_string(kMaxDim));
  }
  SquareMatrix m(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorKind::invalid_parameter, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

Rows from_matrix(const SquareMatrix& m) {
  Rows rows(static_cast<std::size_t>(m.dim()), std::vector<double>(static_cast<std::size_t>(m.dim())));
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) rows[i][j] = m(i, j);
  return rows;
}

NoiseSpec noise_named(const std::string& name, int dim) {
  if (name == "expol2") {
    if (dim != 2) throw Error(ErrorKind::config, "expol2 noise is two-dimensional");
    return NoiseSpec::expol2();
  }
  if (name == "gaussian") return NoiseSpec::gaussian(dim);
  throw Error(ErrorKind::config, "unknown noise '" + name + "'");
}

std::string check_json(const std::string& config_text) {
  const ExperimentConfig c = parse_config_text(config_text);
  const ErgodicityReport r = build_report(c.build_model(), c.build_noise(), c.build_report_options());
  return dump_with_provenance(to_json(r), provenance_of(c));
}

std::string simulate_json(const std::string& config_text, int threads) {
  const ExperimentConfig c = parse_config_text(config_text);
  EnsembleSummary s;
  {
    py::gil_scoped_release release;
    s = simulate_ensemble(c.build_simulation(threads));
  }
  ordered_json doc = to_json(s);
  if (!s.paths.empty()) {
    ordered_json paths = ordered_json::array();
    for (const auto& path : s.paths) {
      ordered_json states = ordered_json::array();
      for (const auto& x : path) states.push_back(std::vector<double>(x.values().begin(), x.values().end()));
      paths.push_back(states);
    }
    doc["paths"] = paths;
  }
  return dump_with_provenance(doc, provenance_of(c));
}

}  // namespace

PYBIND11_MODULE(_ergokit, m) {
  m.doc() = "Norms, noise moments, drift checks and ensemble simulation for nonlinear stochastic difference equations.";

  static py::exception<Error> error(m, "ErgokitError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("vector_s_norm", [](const std::vector<double>& x, double s) { return vector_s_norm(to_vector(x), SExponent(s)); },
        py::arg("x"), py::arg("s"));
  m.def("matrix_col_sum_norm", [](const Rows& a, double s) { return matrix_col_sum_norm(to_matrix(a), SExponent(s)); },
        py::arg("a"), py::arg("s"));
  m.def("frobenius_norm", [](const Rows& a) { return frobenius_norm(to_matrix(a)); }, py::arg("a"));
  m.def("operator_norm", [](const Rows& a, double p) { return operator_norm(to_matrix(a), p); }, py::arg("a"),
        py::arg("p"));
  m.def("psd_sqrt", [](const Rows& a, double tol) { return from_matrix(psd_sqrt(to_matrix(a), tol)); }, py::arg("m"),
        py::arg("tol") = kPsdSqrtDefaultTol);

  m.def(
      "abs_moment",
      [](const std::string& noise, int dim, double s, const std::string& method, std::uint64_t samples,
         std::uint64_t seed) {
        MomentBudget budget;
        budget.samples = samples;
        budget.seed = seed;
        const MomentEstimate e =
            abs_moment(noise_named(noise, dim), SExponent(s), moment_method_from_string(method), budget);
        return to_json(e).dump();
      },
      py::arg("noise") = "expol2", py::arg("dim") = 2, py::arg("s") = 1.0, py::arg("method") = "quadrature",
      py::arg("samples") = 1'000'000, py::arg("seed") = 7);

  m.def(
      "bekk_degeneracy",
      [](const Rows& a, const Rows& b) {
        const BekkDegeneracy d = bekk_degeneracy(to_matrix(a), to_matrix(b));
        return py::make_tuple(std::string(to_string(d.kind)), py::make_tuple(d.normal[0], d.normal[1]));
      },
      py::arg("a"), py::arg("b"));

  m.def("builtin_names", &builtin_names);
  m.def("builtin_config", [](const std::string& name) { return to_json(builtin_config(name)).dump(); },
        py::arg("name"));
  m.def("check", &check_json, py::arg("config"));
  m.def("simulate", &simulate_json, py::arg("config"), py::arg("threads") = 1);
  m.attr("__version__") = std::string(kToolVersion);
}
