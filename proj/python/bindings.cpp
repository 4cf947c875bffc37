#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "mpec/errors.hpp"
#include "mpec/implicit.hpp"
#include "mpec/instance_io.hpp"
#include "mpec/matrix_props.hpp"
#include "mpec/model.hpp"
#include "mpec/oracle.hpp"
#include "mpec/report.hpp"
#include "mpec/subsolvers.hpp"

namespace py = pybind11;
using namespace mpec;

namespace {

Iterate make_iterate(const MpecInstance& inst, const Vec& x, const Vec& y, const Vec& w,
                     const std::optional<Vec>& z) {
  return Iterate{x, y, w, z ? *z : Vec::Zero(inst.l())};
}

const char* method_name(LcpSolution::Method m) {
  switch (m) {
    case LcpSolution::Method::Trivial: return "trivial";
    case LcpSolution::Method::Lemke: return "lemke";
    case LcpSolution::Method::Enumeration: return "enumeration";
  }
  return "";
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Quadratic MPEC solvers: interior-point, implicit and piecewise SQP";

  static py::exception<Error> error_type(mod, "MpecError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::reinterpret_borrow<py::object>(error_type.ptr());
      py::object exc = cls(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("index") = e.index();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<MpecInstance>(mod, "Instance")
      .def_static("from_json",
                  [](const std::string& text) { return parse_instance(nlohmann::json::parse(text)); },
                  py::arg("text"))
      .def_static("load", &load_instance, py::arg("path"))
      .def("to_json", [](const MpecInstance& inst) { return instance_to_json(inst).dump(); })
      .def("validate", &validate_instance)
      .def_property_readonly("n", &MpecInstance::n)
      .def_property_readonly("m", &MpecInstance::m)
      .def_property_readonly("l", &MpecInstance::l)
      .def_property_readonly("k", &MpecInstance::k)
      .def_property_readonly("is_lcp_form", &MpecInstance::is_lcp_form)
      .def("__repr__", [](const MpecInstance& inst) {
        std::ostringstream os;
        os << "Instance(n=" << inst.n() << ", m=" << inst.m() << ", l=" << inst.l()
           << ", k=" << inst.k() << (inst.is_lcp_form() ? ", lcp" : "") << ")";
        return os.str();
      });

  mod.def("default_x0", &cli::default_x0, py::arg("instance"));

  mod.def(
      "solve_json",
      [](const std::string& algo, const MpecInstance& inst, const std::optional<Vec>& x0,
         const std::string& params) {
        const Vec start = x0 ? *x0 : cli::default_x0(inst);
        SolveReport rep;
        {
          py::gil_scoped_release release;
          rep = cli::run_solver(algo, inst, start, nlohmann::json::parse(params));
        }
        nlohmann::ordered_json out = report_to_json(rep);
        out["trace"] = nlohmann::ordered_json::array();
        for (const TraceRow& row : rep.trace) out["trace"].push_back(trace_row_to_json(row));
        return out.dump();
      },
      py::arg("algo"), py::arg("instance"), py::arg("x0") = py::none(), py::arg("params") = "{}");

  mod.def(
      "oracle_json",
      [](const MpecInstance& inst) {
        GlobalResult g;
        {
          py::gil_scoped_release release;
          g = enumerate_global(inst);
        }
        return cli::oracle_to_json(g).dump();
      },
      py::arg("instance"));

  mod.def(
      "lower_solve",
      [](const MpecInstance& inst, const Vec& x) {
        const LowerSolution s = lower_solve(inst, x);
        return py::make_tuple(s.y, s.w);
      },
      py::arg("instance"), py::arg("x"));

  mod.def("feasible_objective", &feasible_objective, py::arg("instance"), py::arg("x"));

  mod.def(
      "phi",
      [](const MpecInstance& inst, const Vec& x, const Vec& y, const Vec& w,
         const std::optional<Vec>& z, const std::string& kind) {
        const Iterate it = make_iterate(inst, x, y, w, z);
        if (kind == "general") return phi_general(inst, it);
        if (kind == "lcp") return phi_lcp(inst, it);
        throw Error(ErrorCode::InvalidArgument, "kind must be 'general' or 'lcp'");
      },
      py::arg("instance"), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("z") = py::none(),
      py::arg("kind") = "general");

  mod.def(
      "objective",
      [](const MpecInstance& inst, const Vec& x, const Vec& y, const Vec& w,
         const std::optional<Vec>& z) { return objective_value(inst, make_iterate(inst, x, y, w, z)); },
      py::arg("instance"), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("z") = py::none());

  mod.def(
      "b_stationarity_residual",
      [](const MpecInstance& inst, const Vec& x, const Vec& y, const Vec& w,
         const std::optional<Vec>& z) {
        return b_stationarity_residual(inst, make_iterate(inst, x, y, w, z));
      },
      py::arg("instance"), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("z") = py::none());

  mod.def(
      "is_stationary",
      [](const MpecInstance& inst, const Vec& x, double tol) {
        const LowerSolution s = lower_solve(inst, x);
        return tangent_cone_check(inst, x, s, tol).stationary;
      },
      py::arg("instance"), py::arg("x"), py::arg("tol") = 1e-8);

  mod.def(
      "solve_lcp",
      [](const Mat& M, const Vec& q) {
        const LcpSolution s = solve_lcp(M, q);
        return py::make_tuple(s.y, s.w, method_name(s.method));
      },
      py::arg("M"), py::arg("q"));

  mod.def("lh_star_is_homeomorphism", &lh_star_is_homeomorphism, py::arg("DFy"), py::arg("DFw"));

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
