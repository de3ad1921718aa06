#include "hyperham/hyperkahler.hpp"
#include "hyperham/integrate.hpp"
#include "hyperham/oscillator.hpp"
#include "hyperham/pauli.hpp"
#include "hyperham/quaternion_core.hpp"
#include "hyperham/scenario.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace hyperham;

namespace {

std::vector<Matrix> triple_list(const QuaternionTriple& t) { return {t[0], t[1], t[2]}; }

QuaternionTriple triple_from(const std::vector<Matrix>& m) {
  if (m.size() != 3) throw DimensionError("expected three 4x4 matrices");
  QuaternionTriple t;
  for (int a = 0; a < 3; ++a) {
    if (m[a].rows() != 4 || m[a].cols() != 4) throw DimensionError("expected three 4x4 matrices");
    t.k[a] = m[a];
  }
  return t;
}

GeneratorSet generators_from(const py::object& choice) {
  if (py::isinstance<py::str>(choice)) {
    const std::string name = choice.cast<std::string>();
    if (name == "quaternion") return builtin_generator_set(4);
    if (name == "symplectic_2d") return builtin_generator_set(2);
    throw DomainError("unknown generator set '" + name + "'");
  }
  const auto mats = choice.cast<std::vector<Matrix>>();
  if (mats.empty()) throw DimensionError("empty generator list");
  return GeneratorSet(static_cast<int>(mats[0].rows()), mats);
}

py::dict trajectory_dict(const Trajectory& t) {
  Matrix states(static_cast<Eigen::Index>(t.size()), t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) states.row(static_cast<Eigen::Index>(i)) = t.states[i].transpose();
  py::dict d;
  d["times"] = t.times;
  d["states"] = states;
  d["aborted"] = t.aborted;
  return d;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict command_dict(const CommandResult& r) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["report"] = r.report;
  d["warnings"] = r.warnings;
  d["summary"] = json_to_py(r.summary);
  return d;
}

Scenario scenario_with_output(const std::string& path, const std::optional<std::string>& out) {
  Scenario s = load_scenario(path);
  if (out) s.output.directory = *out;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quaternionic oscillators, hyperhamiltonian flows and the Pauli equation";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("standard_symplectic_2d", [] { return Matrix(standard_symplectic_2d()); });
  m.def("standard_quaternion_triple", [] { return triple_list(standard_quaternion_triple()); });
  m.def("commutant_triple", [] { return triple_list(commutant_triple()); });
  m.def("quaternion_relation_residual",
        [](const std::vector<Matrix>& t) { return quaternion_relation_residual(triple_from(t)); });
  m.def(
      "validate_generators",
      [](const py::object& gens, double tol) {
        const ValidationReport r = validate_generator_set(generators_from(gens), tol);
        py::dict d;
        d["valid"] = r.valid;
        d["max_residual"] = r.max_residual();
        d["report"] = r.to_text();
        return d;
      },
      py::arg("generators"), py::arg("tol") = kDefaultTolerance);
  m.def(
      "kahler_two_form", [](const Matrix& k) { return kahler_two_form(k).to_string(); }, py::arg("structure"));
  m.def(
      "rotate_triple",
      [](const Matrix3& r, const std::vector<Matrix>& t) { return triple_list(rotate_triple(r, triple_from(t))); },
      py::arg("rotation"), py::arg("triple"));
  m.def(
      "hopf_map", [](const Vector4& xi, const Matrix4& a) { return hopf_map(xi, a); }, py::arg("xi"),
      py::arg("generator"));

  m.def(
      "exact_flow",
      [](const Matrix& nu, const Vector& x0, double t, const py::object& gens) {
        const GeneratorSet set = generators_from(gens);
        const CliffordOscillator sys = CliffordOscillator::constant(set, nu);
        return exact_flow(sys, BlockState(set.dim(), x0), t).data();
      },
      py::arg("nu"), py::arg("x0"), py::arg("t"), py::arg("generators") = "quaternion");
  m.def(
      "integrate_oscillator",
      [](const Matrix& nu, const Vector& x0, double t1, double dt, const std::string& method,
         const py::object& gens, std::size_t stride) {
        const GeneratorSet set = generators_from(gens);
        const CliffordOscillator sys = CliffordOscillator::constant(set, nu);
        if (method == "exact") return trajectory_dict(integrate_exact_blocks(sys, BlockState(set.dim(), x0), 0.0, t1, dt));
        if (method != "rk4") throw DomainError("method must be rk4 or exact");
        const Field f = autonomous([sys](const Vector& x) { return oscillator_field(sys, BlockState(sys.block_dim(), x)); });
        return trajectory_dict(integrate_rk4(f, x0, 0.0, t1, dt, stride));
      },
      py::arg("nu"), py::arg("x0"), py::arg("t1"), py::arg("dt"), py::arg("method") = "rk4",
      py::arg("generators") = "quaternion", py::arg("stride") = 1);

  m.def(
      "pauli_generator", [](const Vector3& b) { return Matrix(pauli_generator(b)); }, py::arg("B"));
  m.def(
      "pauli_field", [](const Vector3& b, const Vector& xi) { return hyperham_field_at(pauli_system(b), xi); },
      py::arg("B"), py::arg("xi"));
  m.def(
      "spinor_to_r4", [](Complex up, Complex down) { return Vector(spinor_to_r4({up, down})); }, py::arg("up"),
      py::arg("down"));
  m.def(
      "r4_to_spinor",
      [](const Vector4& xi) {
        const Spinor s = r4_to_spinor(xi);
        return std::pair<Complex, Complex>(s.up, s.down);
      },
      py::arg("xi"));
  m.def(
      "bloch_vector", [](Complex up, Complex down) { return Vector(bloch_vector(Spinor{up, down})); },
      py::arg("up"), py::arg("down"));
  m.def(
      "evolve_pauli",
      [](const Vector3& b, Complex up, Complex down, double t1, double dt, const std::string& method) {
        const SpinorTrajectory t =
            evolve_pauli_c2(MagneticField::constant(b), {up, down}, 0.0, t1, dt, parse_pauli_method(method));
        Eigen::MatrixX2cd states(static_cast<Eigen::Index>(t.states.size()), 2);
        for (std::size_t i = 0; i < t.states.size(); ++i) {
          states(static_cast<Eigen::Index>(i), 0) = t.states[i].up;
          states(static_cast<Eigen::Index>(i), 1) = t.states[i].down;
        }
        py::dict d;
        d["times"] = t.times;
        d["states"] = states;
        return d;
      },
      py::arg("B"), py::arg("up"), py::arg("down"), py::arg("t1"), py::arg("dt"), py::arg("method") = "rk4");

  m.def(
      "load_scenario", [](const std::string& path) { return json_to_py(load_scenario(path).to_json()); },
      py::arg("path"), "Effective scenario (defaults filled in) as a dict.");
  m.def(
      "validate",
      [](const std::string& path) { return command_dict(cmd_validate(load_scenario(path))); }, py::arg("scenario"));
  m.def(
      "simulate",
      [](const std::string& path, std::optional<std::string> out) {
        return command_dict(cmd_simulate(scenario_with_output(path, out)));
      },
      py::arg("scenario"), py::arg("out") = py::none());
  m.def(
      "diagnose",
      [](const std::string& path, std::optional<std::string> trajectory) {
        return command_dict(cmd_diagnose(load_scenario(path), trajectory));
      },
      py::arg("scenario"), py::arg("trajectory") = py::none());
}
