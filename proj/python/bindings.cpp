#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lagspec/ensembles.hpp"
#include "lagspec/errors.hpp"
#include "lagspec/experiments.hpp"
#include "lagspec/fixed_point.hpp"
#include "lagspec/limit_law.hpp"
#include "lagspec/linalg.hpp"

namespace py = pybind11;
using namespace lagspec;

namespace {

LawKind parse_law(const std::string& name) { return law_kind_from_string(name); }

}  // namespace

PYBIND11_MODULE(_lagspec, m) {
  m.doc() = "Lag-k sample auto-covariance matrices: builders, spectra, limit law, fixed point";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("sample_entry_matrix",
        [](Eigen::Index n, Eigen::Index big_n, Eigen::Index k, const std::string& law,
           std::uint64_t seed, std::uint64_t trial) {
          const auto spec = EnsembleSpec::make(n, big_n, k, parse_law(law), seed);
          return sample_entry_matrix(spec, SeededTrial::make(seed, trial));
        },
        py::arg("n"), py::arg("N"), py::arg("k"), py::arg("law") = "complex-gaussian",
        py::arg("seed") = 0, py::arg("trial") = 0,
        "N x n matrix of i.i.d. entries for trial `trial` under master seed `seed`.");
  m.def("build_autocov", &build_autocov, py::arg("x"), py::arg("k"));
  m.def("build_circular", &build_circular, py::arg("x"));
  m.def("hermitize", &hermitize, py::arg("m"), py::arg("z"));
  m.def("eigenvalues", [](const ComplexMatrix& a) { return ComplexVector(eigenvalues(a).values); },
        py::arg("m"));
  m.def("singular_values", [](const ComplexMatrix& a) { return RealVector(singular_values(a).values); },
        py::arg("m"), "Descending singular values.");
  m.def("linearization",
        [](const ComplexMatrix& x, Complex z, Eigen::Index k) {
          auto lin = build_linearization(x, z, k);
          return py::make_tuple(lin.h_prime, lin.h, lin.reordered);
        },
        py::arg("x"), py::arg("z"), py::arg("k"), "(H', H, reordered)");

  m.def("g", &g_eval, py::arg("x"), py::arg("gamma0"));
  m.def("g_inverse", py::overload_cast<double, double>(&lagspec::g_inverse), py::arg("y"),
        py::arg("gamma0"));
  m.def("radial_cdf", py::overload_cast<double, double>(&lagspec::radial_cdf), py::arg("r"),
        py::arg("gamma0"));
  m.def("radial_quantile", &lagspec::radial_quantile, py::arg("p"), py::arg("gamma0"));
  m.def("support_radius", [](double g0) { return Gamma0Law(g0).support_radius(); }, py::arg("gamma0"));
  m.def("sample_limit_law", &sample_limit_law, py::arg("gamma0"), py::arg("count"), py::arg("seed"));

  m.def("solve_s",
        [](Complex z, double t, double gamma0, double a) {
          const ResolventParams p{z, t, gamma0, a};
          const auto sol = solve_s(p);
          py::dict d;
          d["s"] = sol.s;
          d["g12"] = sol.g12;
          d["residual"] = sol.residual;
          d["multiple_roots"] = sol.multiple_roots;
          d["stieltjes"] = predicted_stieltjes(sol, p);
          return d;
        },
        py::arg("z"), py::arg("t"), py::arg("gamma0"), py::arg("a"));
  m.def("empirical_resolvent_trace",
        py::overload_cast<const ComplexMatrix&, Complex, double>(&empirical_resolvent_trace),
        py::arg("m"), py::arg("z"), py::arg("t"));
  m.def("radial_ks",
        [](const ComplexVector& eigs, double gamma0) { return radial_ks(EigenSpectrum{eigs}, gamma0); },
        py::arg("eigenvalues"), py::arg("gamma0"));
}
