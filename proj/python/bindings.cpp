#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rts/report.hpp"

namespace py = pybind11;

namespace {

// Python-facing parameter: an exact rational string or a float.
using Param = std::variant<std::string, double>;

struct PyFamily {
  rts::Family family;

  rts::RecursiveTreeSystem instantiate(const Param& t) const {
    if (const auto* s = std::get_if<std::string>(&t)) {
      const auto* f = std::get_if<rts::SystemFamily>(&family);
      if (f && rts::looks_rational(*s)) return f->instantiate(rts::parse_rational(*s));
      return rts::family_function(family)(rts::parse_rational(*s).get_d());
    }
    return rts::family_function(family)(std::get<double>(t));
  }
};

std::map<int, std::string> rational_map(const std::map<int, rts::Rational>& m) {
  std::map<int, std::string> out;
  for (const auto& [k, q] : m) out.emplace(k, rts::to_string(q));
  return out;
}

}  // namespace

PYBIND11_MODULE(_rts_lab, mod) {
  mod.doc() = "Recursive tree systems on Galton-Watson trees";

  py::register_exception<rts::ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<rts::NumericError>(mod, "NumericError", PyExc_ArithmeticError);

  py::class_<rts::RecursiveTreeSystem>(mod, "System")
      .def_static("from_json", [](const std::string& text) { return rts::parse_system(text); })
      .def_static("named", [](const std::string& name) { return rts::named_system(name); })
      .def("to_json", [](const rts::RecursiveTreeSystem& s) { return rts::system_json(s).dump(); })
      .def_property_readonly("is_exact", &rts::RecursiveTreeSystem::is_exact)
      .def_property_readonly("max_value", &rts::RecursiveTreeSystem::max_value)
      .def_property_readonly("max_threshold", &rts::RecursiveTreeSystem::max_threshold)
      .def_property_readonly("weights", [](const rts::RecursiveTreeSystem& s) { return s.chi().weights(); })
      .def_property_readonly("thresholds", [](const rts::RecursiveTreeSystem& s) { return s.h().thresholds(); })
      .def("psi", [](const rts::RecursiveTreeSystem& s, double x) { return rts::psi(s, x); })
      .def("psi_exact",
           [](const rts::RecursiveTreeSystem& s, const std::string& x) {
             return rts::to_string(rts::psi(s, rts::parse_rational(x)));
           })
      .def("derivs_at_zero", [](const rts::RecursiveTreeSystem& s, int m) { return rts::derivs_at_zero(s, m); })
      .def("truncate", [](const rts::RecursiveTreeSystem& s, int m) { return rts::m_truncation(s, m); });

  py::class_<PyFamily>(mod, "Family")
      .def_static("from_json", [](const std::string& text) { return PyFamily{rts::parse_family(text)}; })
      .def_static("named", [](const std::string& name) { return PyFamily{rts::named_family(name)}; })
      .def_property_readonly("t_min", [](const PyFamily& f) { return rts::family_t_min(f.family); })
      .def_property_readonly("t_max", [](const PyFamily& f) { return rts::family_t_max(f.family); })
      .def("instantiate", &PyFamily::instantiate, py::arg("t"));

  mod.def(
      "analyze_json",
      [](const rts::RecursiveTreeSystem& s, double tol) {
        rts::FixedPointOptions options;
        options.tol = tol;
        return rts::analysis_json(s, options).dump();
      },
      py::arg("system"), py::arg("tol") = 1e-12);
  mod.def("fixed_points", [](const rts::RecursiveTreeSystem& s) {
    std::vector<double> xs;
    for (const auto& p : rts::find_fixed_points(s).points) xs.push_back(p.x);
    return xs;
  });
  mod.def("is_critical", [](const rts::RecursiveTreeSystem& s) { return rts::is_critical(s).critical; });
  mod.def("interpretable", [](const rts::RecursiveTreeSystem& s, double x0) { return rts::interpretable(s, x0); });
  mod.def("crit", [](const std::vector<int>& seq) { return rational_map(rts::crit_measure(seq).weights()); });
  mod.def("decompose_json", [](const rts::RecursiveTreeSystem& s) { return rts::decomposition_json(rts::decompose(s)).dump(); });
  mod.def("curve_csv", &rts::curve_csv, py::arg("system"), py::arg("samples") = 1001);
  mod.def(
      "find_critical_json",
      [](const PyFamily& f, double lo, double hi) {
        return rts::transition_json(rts::find_tangency(rts::family_function(f.family), lo, hi)).dump();
      },
      py::arg("family"), py::arg("t_lo"), py::arg("t_hi"));
  mod.def(
      "estimate_admissible_json",
      [](const rts::RecursiveTreeSystem& s, int depth, std::int64_t trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        return rts::estimate_json(rts::estimate_admissible(s, depth, trials, seed)).dump();
      },
      py::arg("system"), py::arg("depth"), py::arg("trials"), py::arg("seed"));
}
