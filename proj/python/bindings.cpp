// Python bindings: the spectral toolbox, admissible exponents and the spine
// construction, plus single-path and exponential-functional sampling. Specs
// travel as JSON strings (the same schema the CLI and C++ loaders use);
// vectors and matrices convert to nested lists.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "gfmap/cumulants.hpp"
#include "gfmap/fixtures.hpp"
#include "gfmap/lamperti.hpp"
#include "gfmap/map_path.hpp"
#include "gfmap/map_spec.hpp"
#include "gfmap/rng.hpp"
#include "gfmap/spectral.hpp"

namespace py = pybind11;
using namespace gfmap;

namespace {

MapSpec spec_from_json(const std::string& text) {
  MapSpec s = MapSpec::from_json(text);
  validate_spec(s);
  return s;
}

std::vector<double> to_list(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

std::vector<std::vector<double>> to_lists(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[static_cast<std::size_t>(i)].assign(m.row(i).begin(), m.row(i).end());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_gfmap, m) {
  m.doc() =
      "Multitype self-similar growth-fragmentation toolkit: Markov additive "
      "spectral theory, admissible exponents, spine MAPs and path sampling.";

  py::class_<MapSpec>(m, "MapSpec")
      .def_static("from_json", &spec_from_json, py::arg("text"),
                  "Parse and validate a spec from its JSON representation.")
      .def_static(
          "load", [](const std::string& path) { return MapSpec::load(path); },
          py::arg("path"))
      .def("to_json", [](const MapSpec& s) { return s.to_json(); })
      .def_property_readonly("n_types", [](const MapSpec& s) { return s.n_types; })
      .def_property_readonly("conservative",
                             [](const MapSpec& s) { return s.conservative(); })
      .def("__repr__", [](const MapSpec& s) {
        return "<MapSpec n_types=" + std::to_string(s.n_types) + ">";
      });

  m.def(
      "fixture",
      [](const std::string& name) {
        if (name == "m2") return fixtures::m2();
        if (name == "binary_conservative") return fixtures::binary_conservative();
        if (name == "drifted_split") return fixtures::drifted_split();
        if (name == "brownian_drift_2") return fixtures::brownian_drift(2.0);
        throw std::invalid_argument("unknown fixture: " + name);
      },
      py::arg("name"),
      "Built-in specs: m2, binary_conservative, drifted_split, brownian_drift_2.");

  // Spectral toolbox.
  m.def(
      "matrix_exponent",
      [](const MapSpec& s, double z) { return to_lists(matrix_exponent(s, z)); },
      py::arg("spec"), py::arg("z"), "F(z) as a nested list.");
  m.def("chi", &chi, py::arg("spec"), py::arg("z"),
        "Perron eigenvalue of the matrix exponent.");
  m.def(
      "chi_prime", [](const MapSpec& s, double z) { return chi_prime(s, z); },
      py::arg("spec"), py::arg("z"));
  m.def(
      "perron_vector",
      [](const MapSpec& s, double z) { return to_list(spectral_data(s, z).w); },
      py::arg("spec"), py::arg("z"), "Eigenvector w(z), normalized to w[0] = 1.");
  m.def(
      "stationary_distribution",
      [](const MapSpec& s) { return to_list(stationary_distribution(s)); },
      py::arg("spec"));
  m.def("dual_spec", &dual_spec, py::arg("spec"),
        "Time-reversed spec under the stationary distribution.");
  m.def("tilt_spec", &tilt_spec, py::arg("spec"), py::arg("gamma"),
        "Esscher tilt by gamma.");
  m.def("cramer_number", &cramer_number, py::arg("spec"), py::arg("lo") = 1e-3,
        py::arg("hi") = 32.0, "Positive root of chi for a killed spec.");

  // Admissible exponents and the spine.
  py::class_<AdmissiblePair>(m, "AdmissiblePair")
      .def_readonly("omega", &AdmissiblePair::omega)
      .def_readonly("residual", &AdmissiblePair::residual)
      .def_property_readonly("v", [](const AdmissiblePair& p) { return to_list(p.v); })
      .def("__repr__", [](const AdmissiblePair& p) {
        return "<AdmissiblePair omega=" + std::to_string(p.omega) + ">";
      });
  m.def(
      "find_admissible", [](const MapSpec& s) { return find_admissible(s); },
      py::arg("spec"), "All admissible (omega, v) pairs, omega increasing.");
  m.def(
      "multitype_cumulant",
      [](const MapSpec& s, int i, double q, const std::vector<double>& v) {
        const Vector vv =
            Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        return multitype_cumulant(s, i, q, vv);
      },
      py::arg("spec"), py::arg("i"), py::arg("q"), py::arg("v"));

  py::class_<SpineExponent>(m, "SpineExponent")
      .def(py::init<const MapSpec&, const AdmissiblePair&>(), py::arg("spec"),
           py::arg("pair"))
      .def("chi_hat", &SpineExponent::chi_hat, py::arg("q"))
      .def(
          "chi_hat_prime",
          [](const SpineExponent& s, double q) { return s.chi_hat_prime(q); },
          py::arg("q"))
      .def("fhat", [](const SpineExponent& s, double q) { return to_lists(s.fhat(q)); })
      .def("spine_spec", &SpineExponent::spine_spec,
           py::return_value_policy::copy,
           "The spine dynamics materialized as a spec of its own.")
      .def("mu_ii", &SpineExponent::mu_ii, py::arg("i"),
           "Same-type split-chain weight; < 1 when the construction terminates.");

  // Path and exponential-functional sampling.
  m.def(
      "sample_path",
      [](const MapSpec& s, int start_type, double horizon, std::uint64_t seed) {
        RngStream rng(seed);
        const MapPath path = sample_map_path(s, start_type, horizon, rng);
        py::dict out;
        out["killed"] = path.killed;
        out["end_value"] = path.killed ? 0.0 : path.end_value();
        out["end_type"] = path.killed ? -1 : path.end_type();
        out["n_jumps"] = path.jumps.size();
        return out;
      },
      py::arg("spec"), py::arg("start_type"), py::arg("horizon"), py::arg("seed"),
      "End state of one additive path (killed paths report killed=True).");
  m.def(
      "exp_functional_sample",
      [](const MapSpec& s, int start_type, double alpha, std::uint64_t seed,
         double eps_tail) {
        RngStream rng(seed);
        return sample_exp_functional(s, start_type, alpha, eps_tail, rng).value;
      },
      py::arg("spec"), py::arg("start_type"), py::arg("alpha"), py::arg("seed"),
      py::arg("eps_tail") = 1e-8,
      "One sample of the exponential functional of the alpha-scaled path.");
}
