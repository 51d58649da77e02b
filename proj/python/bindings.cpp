#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frontctrl/errors.hpp"
#include "frontctrl/optimal_control.hpp"
#include "frontctrl/path_oracle.hpp"
#include "frontctrl/pde_sim.hpp"
#include "frontctrl/phase_plane.hpp"
#include "frontctrl/reaction_models.hpp"

namespace py = pybind11;
using namespace frontctrl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal control of travelling fronts";
  m.attr("__version__") = FRONTCTRL_VERSION;

  // Kept alive by the module attribute for the lifetime of the interpreter.
  static PyObject* error_type = py::exception<Error>(m, "FrontctrlError", PyExc_RuntimeError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(error_type);
      py::object exc = type(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<ReactionModel>(m, "ReactionModel")
      .def("f", &ReactionModel::f)
      .def("df", &ReactionModel::df)
      .def_property_readonly("bistable", &ReactionModel::bistable)
      .def_property_readonly("u_star", [](const ReactionModel& r) { return r.u_star_opt(); })
      .def_property_readonly("name", &ReactionModel::name);
  m.def("cubic", &make_cubic, py::arg("a"));
  m.def("logistic", &make_logistic);
  m.def("polynomial", [](const std::vector<double>& c) { return make_polynomial(c); }, py::arg("coeffs"));

  m.def("find_cstar", &find_cstar, py::arg("model"));

  py::class_<Atom>(m, "Atom")
      .def_readonly("x", &Atom::x)
      .def_readonly("mass", &Atom::mass)
      .def_readonly("U", &Atom::U);
  py::class_<TravelingProfile>(m, "TravelingProfile")
      .def_readonly("c", &TravelingProfile::c)
      .def_readonly("x", &TravelingProfile::x)
      .def_readonly("U", &TravelingProfile::U)
      .def_readonly("P", &TravelingProfile::P)
      .def_readonly("alpha", &TravelingProfile::alpha)
      .def_readonly("u_minus", &TravelingProfile::u_minus)
      .def_readonly("u_plus", &TravelingProfile::u_plus)
      .def_property_readonly("atoms", [](const TravelingProfile& p) { return p.control.atoms; })
      .def_property_readonly("J0", [](const TravelingProfile& p) { return p.control.total_J0; })
      .def_property_readonly("J1", [](const TravelingProfile& p) { return p.control.total_J1; })
      .def("U_at", &TravelingProfile::U_at);
  m.def("solve_P1", &solve_P1, py::arg("model"), py::arg("c"));
  m.def("solve_P2", &solve_P2, py::arg("model"), py::arg("c"));

  py::class_<ECurveSample>(m, "ECurveSample")
      .def_readonly("c", &ECurveSample::c)
      .def_readonly("E", &ECurveSample::E)
      .def_readonly("u_minus", &ECurveSample::u_minus)
      .def_readonly("u_plus", &ECurveSample::u_plus);
  py::class_<ECurve>(m, "ECurve")
      .def_readonly("samples", &ECurve::samples)
      .def_readonly("c_star", &ECurve::c_star)
      .def("E_at", &ECurve::E_at);
  m.def("compute_ecurve", &compute_ecurve, py::arg("model"), py::arg("c_values"), py::arg("threads") = 1);
  m.def("p1_cost_curve",
        [](const ReactionModel& r, const std::vector<double>& cs) {
          std::vector<double> out;
          for (const auto& p : p1_cost_curve(r, cs)) out.push_back(p.C_min);
          return out;
        },
        py::arg("model"), py::arg("c_values"));

  py::enum_<Functional>(m, "Functional").value("J0", Functional::J0).value("J1", Functional::J1);
  m.def("grid_search",
        [](const ReactionModel& r, double c, Functional fn, std::size_t nU, std::size_t nP) {
          return grid_search(r, c, fn, nU, nP).cost;
        },
        py::arg("model"), py::arg("c"), py::arg("functional"), py::arg("nU") = 512, py::arg("nP") = 512);

  m.def("front_speed",
        [](const ReactionModel& r, double x_lo, double x_hi, double dx, double T, double dt, double x0) {
          Run1DOptions o;
          o.grid = Grid1D::with_spacing(x_lo, x_hi, dx);
          o.T = T;
          o.dt = dt;
          return run_1d(r, ControlCoupling{}, nullptr, step_on_grid(o.grid, x0), o).trace.speed;
        },
        "Fitted speed of an uncontrolled step", py::arg("model"), py::arg("x_lo") = -40.0, py::arg("x_hi") = 40.0,
        py::arg("dx") = 0.08, py::arg("T") = 100.0, py::arg("dt") = 0.04, py::arg("x0") = -12.0);
}
