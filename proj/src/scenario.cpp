#include "hyperham/scenario.hpp"

#include "hyperham/quaternion_core.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hyperham {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownDiagnostics = {
    "radii", "norm", "hopf", "great_circle", "component_hamiltonians", "divergence", "bloch",
    "larmor"};

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioError("field '" + path + "': " + message, path);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(join_path(path, key), "unknown key");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(join_path(path, key), "missing required entry");
  return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_or(const json& obj, const std::string& key, const std::string& path, double def) {
  return obj.contains(key) ? as_number(obj.at(key), join_path(path, key)) : def;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], index_path(path, i));
  }
  return v;
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) fail(index_path(path, 0), "expected a row array");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = as_vector(j[r], index_path(path, r));
    if (static_cast<std::size_t>(row.size()) != cols) {
      fail(index_path(path, r), "row length " + std::to_string(row.size()) + " != " +
                                    std::to_string(cols));
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::Ref<const Vector>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

SystemKind parse_kind(const std::string& name, const std::string& path) {
  if (name == "clifford_oscillator") return SystemKind::clifford_oscillator;
  if (name == "quaternionic_oscillator") return SystemKind::quaternionic_oscillator;
  if (name == "flat_hyperhamiltonian") return SystemKind::flat_hyperhamiltonian;
  if (name == "pauli") return SystemKind::pauli;
  fail(path, "unknown system kind '" + name +
                 "' (expected clifford_oscillator, quaternionic_oscillator, "
                 "flat_hyperhamiltonian or pauli)");
}

bool is_oscillator(SystemKind k) {
  return k == SystemKind::clifford_oscillator || k == SystemKind::quaternionic_oscillator;
}

void parse_oscillator(const json& sys, const std::string& path, Scenario& s) {
  if (s.kind == SystemKind::quaternionic_oscillator) {
    reject_unknown_keys(sys, path, {"kind", "generators", "blocks", "nu", "nu_slope"});
  } else {
    reject_unknown_keys(sys, path, {"kind", "generators", "blocks", "nu", "nu_slope"});
  }
  const std::string gpath = join_path(path, "generators");
  if (!sys.contains("generators")) {
    if (s.kind == SystemKind::clifford_oscillator) fail(gpath, "missing required entry");
    s.generator_choice = "quaternion";
  } else if (sys.at("generators").is_string()) {
    s.generator_choice = sys.at("generators").get<std::string>();
    if (s.generator_choice != "quaternion" && s.generator_choice != "symplectic_2d") {
      fail(gpath, "unknown built-in generator set '" + s.generator_choice +
                      "' (expected quaternion or symplectic_2d)");
    }
    if (s.kind == SystemKind::quaternionic_oscillator && s.generator_choice != "quaternion") {
      fail(gpath, "quaternionic oscillators use the quaternion generators");
    }
  } else {
    if (s.kind == SystemKind::quaternionic_oscillator) {
      fail(gpath, "quaternionic oscillators use the built-in quaternion generators; "
                  "use clifford_oscillator for custom sets");
    }
    const json& list = sys.at("generators");
    if (!list.is_array() || list.empty()) fail(gpath, "expected a name or a list of matrices");
    s.generator_choice = "custom";
    for (std::size_t i = 0; i < list.size(); ++i) {
      Matrix k = as_matrix(list[i], index_path(gpath, i));
      if (k.rows() != k.cols()) fail(index_path(gpath, i), "generator must be square");
      if (i > 0 && k.rows() != s.generators.front().rows()) {
        fail(index_path(gpath, i), "generator dimension differs from the first generator");
      }
      s.generators.push_back(std::move(k));
    }
  }
  if (s.generator_choice == "quaternion") {
    s.block_dim = 4;
  } else if (s.generator_choice == "symplectic_2d") {
    s.block_dim = 2;
  } else {
    s.block_dim = static_cast<int>(s.generators.front().rows());
  }
  const int p = s.generator_choice == "quaternion"      ? 3
                : s.generator_choice == "symplectic_2d" ? 1
                                                        : static_cast<int>(s.generators.size());

  const std::string npath = join_path(path, "nu");
  const json& nu = require(sys, "nu", path);
  if (nu.is_array() && !nu.empty() && nu[0].is_number()) {
    s.nu = as_vector(nu, npath).transpose();
  } else {
    s.nu = as_matrix(nu, npath);
  }
  if (s.nu.cols() != p) {
    fail(npath, "expected " + std::to_string(p) + " coefficients per block, found " +
                    std::to_string(s.nu.cols()));
  }
  s.blocks = static_cast<int>(s.nu.rows());
  if (sys.contains("blocks")) {
    const double b = as_number(sys.at("blocks"), join_path(path, "blocks"));
    if (b != static_cast<double>(s.blocks)) {
      fail(join_path(path, "blocks"), "does not match the number of coefficient rows");
    }
  }
  if (sys.contains("nu_slope")) {
    const std::string spath = join_path(path, "nu_slope");
    const json& sl = sys.at("nu_slope");
    if (!sl.is_array() || sl.size() != static_cast<std::size_t>(s.blocks)) {
      fail(spath, "expected one slope matrix per block");
    }
    for (std::size_t k = 0; k < sl.size(); ++k) {
      Matrix m = as_matrix(sl[k], index_path(spath, k));
      if (m.rows() != p || m.cols() != s.blocks) {
        fail(index_path(spath, k), "slope matrix must be " + std::to_string(p) + " x " +
                                       std::to_string(s.blocks));
      }
      s.nu_slope.push_back(std::move(m));
    }
  }
}

void parse_flat(const json& sys, const std::string& path, Scenario& s) {
  reject_unknown_keys(sys, path, {"kind", "blocks", "metric", "structures", "hamiltonians"});
  s.blocks = 1;
  if (sys.contains("blocks")) {
    const double b = as_number(sys.at("blocks"), join_path(path, "blocks"));
    if (b < 1 || b != std::floor(b)) fail(join_path(path, "blocks"), "must be a positive integer");
    s.blocks = static_cast<int>(b);
  }
  s.block_dim = 4;
  const int n = 4 * s.blocks;
  if (sys.contains("metric")) {
    s.metric = as_matrix(sys.at("metric"), join_path(path, "metric"));
    if (s.metric.rows() != n || s.metric.cols() != n) {
      fail(join_path(path, "metric"), "must be " + std::to_string(n) + " x " + std::to_string(n));
    }
  } else {
    s.metric = Matrix::Identity(n, n);
  }
  const std::string ypath = join_path(path, "structures");
  if (!sys.contains("structures") ||
      (sys.at("structures").is_string() && sys.at("structures").get<std::string>() == "standard")) {
    s.structure_choice = "standard";
    const HyperkahlerChart flat = HyperkahlerChart::flat(s.blocks);
    for (int a = 0; a < 3; ++a) s.structures[a] = flat.structure(a, Vector::Zero(n));
  } else {
    const json& ys = sys.at("structures");
    if (!ys.is_array() || ys.size() != 3) fail(ypath, "expected \"standard\" or three matrices");
    s.structure_choice = "custom";
    for (std::size_t a = 0; a < 3; ++a) {
      s.structures[a] = as_matrix(ys[a], index_path(ypath, a));
      if (s.structures[a].rows() != n || s.structures[a].cols() != n) {
        fail(index_path(ypath, a), "must be " + std::to_string(n) + " x " + std::to_string(n));
      }
    }
  }
  const std::string hpath = join_path(path, "hamiltonians");
  const json& hs = require(sys, "hamiltonians", path);
  if (!hs.is_array() || hs.size() != 3) fail(hpath, "expected three hamiltonian entries");
  for (std::size_t a = 0; a < 3; ++a) {
    const std::string p = index_path(hpath, a);
    const json& h = hs[a];
    if (!h.is_object()) fail(p, "expected an object with Q, b, c");
    reject_unknown_keys(h, p, {"Q", "b", "c"});
    QuadraticHamiltonian q;
    q.q = h.contains("Q") ? as_matrix(h.at("Q"), join_path(p, "Q")) : Matrix::Zero(n, n);
    q.b = h.contains("b") ? as_vector(h.at("b"), join_path(p, "b")) : Vector::Zero(n);
    q.c = number_or(h, "c", p, 0.0);
    if (q.q.rows() != n || q.q.cols() != n) fail(join_path(p, "Q"), "must be " + std::to_string(n) + " x " + std::to_string(n));
    if (q.b.size() != n) fail(join_path(p, "b"), "must have length " + std::to_string(n));
    s.hamiltonians[a] = std::move(q);
  }
}

Vector3 as_vector3(const json& j, const std::string& path) {
  const Vector v = as_vector(j, path);
  if (v.size() != 3) fail(path, "expected 3 components");
  return v;
}

void parse_pauli(const json& sys, const std::string& path, Scenario& s) {
  reject_unknown_keys(sys, path, {"kind", "field"});
  s.block_dim = 4;
  s.blocks = 1;
  const std::string fpath = join_path(path, "field");
  const json& f = require(sys, "field", path);
  if (!f.is_object()) fail(fpath, "expected an object");
  const std::string type = as_string(require(f, "type", fpath), join_path(fpath, "type"));
  if (type == "constant") {
    reject_unknown_keys(f, fpath, {"type", "B"});
    s.field = MagneticField::constant(as_vector3(require(f, "B", fpath), join_path(fpath, "B")));
  } else if (type == "rotating") {
    reject_unknown_keys(f, fpath, {"type", "b", "omega", "Bz"});
    s.field = MagneticField::rotating(as_number(require(f, "b", fpath), join_path(fpath, "b")),
                                      as_number(require(f, "omega", fpath), join_path(fpath, "omega")),
                                      as_number(require(f, "Bz", fpath), join_path(fpath, "Bz")));
  } else if (type == "tabulated") {
    reject_unknown_keys(f, fpath, {"type", "times", "B"});
    const Vector times = as_vector(require(f, "times", fpath), join_path(fpath, "times"));
    const json& bs = require(f, "B", fpath);
    if (!bs.is_array() || bs.size() != static_cast<std::size_t>(times.size())) {
      fail(join_path(fpath, "B"), "expected one field vector per table time");
    }
    std::vector<double> ts(times.data(), times.data() + times.size());
    std::vector<Vector3> values;
    for (std::size_t i = 0; i < bs.size(); ++i) values.push_back(as_vector3(bs[i], index_path(join_path(fpath, "B"), i)));
    try {
      s.field = MagneticField::tabulated(std::move(ts), std::move(values));
    } catch (const Error& e) {
      fail(fpath, e.what());
    }
  } else {
    fail(join_path(fpath, "type"), "unknown field type '" + type +
                                       "' (expected constant, rotating or tabulated)");
  }
}

}  // namespace

ScenarioError::ScenarioError(const std::string& message, std::string field, int line)
    : Error(message), field_(std::move(field)), line_(line) {}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::clifford_oscillator: return "clifford_oscillator";
    case SystemKind::quaternionic_oscillator: return "quaternionic_oscillator";
    case SystemKind::flat_hyperhamiltonian: return "flat_hyperhamiltonian";
    case SystemKind::pauli: return "pauli";
  }
  return "unknown";
}

std::string to_string(IntegratorKind kind) { return kind == IntegratorKind::rk4 ? "rk4" : "exact"; }

int Scenario::state_dim() const { return block_dim * blocks; }

void Scenario::override_tolerance(double tol) {
  tolerances = {tol, tol, tol, tol, tol, tol};
}

json Scenario::to_json() const {
  json sys;
  sys["kind"] = to_string(kind);
  switch (kind) {
    case SystemKind::clifford_oscillator:
    case SystemKind::quaternionic_oscillator: {
      if (generator_choice == "custom") {
        json list = json::array();
        for (const Matrix& k : generators) list.push_back(matrix_json(k));
        sys["generators"] = std::move(list);
      } else {
        sys["generators"] = generator_choice;
      }
      sys["blocks"] = blocks;
      sys["nu"] = matrix_json(nu);
      if (!nu_slope.empty()) {
        json sl = json::array();
        for (const Matrix& m : nu_slope) sl.push_back(matrix_json(m));
        sys["nu_slope"] = std::move(sl);
      }
      break;
    }
    case SystemKind::flat_hyperhamiltonian: {
      sys["blocks"] = blocks;
      sys["metric"] = matrix_json(metric);
      if (structure_choice == "standard") {
        sys["structures"] = "standard";
      } else {
        sys["structures"] = json::array({matrix_json(structures[0]), matrix_json(structures[1]),
                                         matrix_json(structures[2])});
      }
      json hs = json::array();
      for (const auto& h : hamiltonians) {
        hs.push_back({{"Q", matrix_json(h.q)}, {"b", vector_json(h.b)}, {"c", h.c}});
      }
      sys["hamiltonians"] = std::move(hs);
      break;
    }
    case SystemKind::pauli: {
      json f;
      switch (field->kind()) {
        case MagneticField::Kind::constant:
          f = {{"type", "constant"}, {"B", vector_json(field->constant_value())}};
          break;
        case MagneticField::Kind::rotating:
          f = {{"type", "rotating"}, {"b", field->transverse()}, {"omega", field->rate()},
               {"Bz", field->axial()}};
          break;
        case MagneticField::Kind::tabulated: {
          json bs = json::array();
          for (const Vector3& v : field->table_values()) bs.push_back(vector_json(v));
          f = {{"type", "tabulated"}, {"times", field->table_times()}, {"B", std::move(bs)}};
          break;
        }
      }
      sys["field"] = std::move(f);
      break;
    }
  }
  json doc;
  doc["schema_version"] = schema_version;
  doc["name"] = name;
  doc["system"] = std::move(sys);
  doc["initial_state"] = vector_json(initial_state);
  doc["time"] = {{"t0", t0}, {"t1", t1}, {"dt", dt}, {"stride", stride}};
  doc["integrator"] = to_string(integrator);
  doc["diagnostics"] = diagnostics;
  doc["tolerances"] = {{"structure", tolerances.structure},
                       {"conservation", tolerances.conservation},
                       {"hopf", tolerances.hopf},
                       {"great_circle", tolerances.great_circle},
                       {"divergence", tolerances.divergence},
                       {"larmor", tolerances.larmor}};
  doc["output"] = {{"directory", output.directory},
                   {"trajectory", output.trajectory},
                   {"summary", output.summary},
                   {"report", output.report}};
  return doc;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("", "scenario must be a JSON object");
  reject_unknown_keys(doc, "", {"schema_version", "name", "system", "initial_state", "initial_spinor",
                                "time", "integrator", "diagnostics", "tolerances", "output"});
  Scenario s;
  const double version = as_number(require(doc, "schema_version", ""), "schema_version");
  if (version != kScenarioSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kScenarioSchemaVersion) + ")");
  }
  if (doc.contains("name")) s.name = as_string(doc.at("name"), "name");

  const json& sys = require(doc, "system", "");
  if (!sys.is_object()) fail("system", "expected an object");
  s.kind = parse_kind(as_string(require(sys, "kind", "system"), "system.kind"), "system.kind");
  switch (s.kind) {
    case SystemKind::clifford_oscillator:
    case SystemKind::quaternionic_oscillator:
      parse_oscillator(sys, "system", s);
      break;
    case SystemKind::flat_hyperhamiltonian:
      parse_flat(sys, "system", s);
      break;
    case SystemKind::pauli:
      parse_pauli(sys, "system", s);
      break;
  }

  if (doc.contains("initial_spinor")) {
    if (s.kind != SystemKind::pauli) fail("initial_spinor", "only valid for pauli scenarios");
    if (doc.contains("initial_state")) fail("initial_spinor", "give initial_state or initial_spinor, not both");
    const json& sp = doc.at("initial_spinor");
    if (!sp.is_array() || sp.size() != 2) fail("initial_spinor", "expected [[re, im], [re, im]]");
    Vector4 xi;
    for (std::size_t c = 0; c < 2; ++c) {
      const Vector z = as_vector(sp[c], index_path("initial_spinor", c));
      if (z.size() != 2) fail(index_path("initial_spinor", c), "expected [re, im]");
      xi[2 * c] = z[0];
      xi[2 * c + 1] = z[1];
    }
    s.initial_state = xi;
  } else {
    s.initial_state = as_vector(require(doc, "initial_state", ""), "initial_state");
  }
  if (s.initial_state.size() != s.state_dim()) {
    fail("initial_state", "has " + std::to_string(s.initial_state.size()) +
                              " components; the system is " + std::to_string(s.state_dim()) +
                              "-dimensional");
  }

  const json& time = require(doc, "time", "");
  if (!time.is_object()) fail("time", "expected an object");
  reject_unknown_keys(time, "time", {"t0", "t1", "dt", "stride"});
  s.t0 = number_or(time, "t0", "time", 0.0);
  s.t1 = as_number(require(time, "t1", "time"), "time.t1");
  s.dt = as_number(require(time, "dt", "time"), "time.dt");
  const double stride = number_or(time, "stride", "time", 1.0);
  if (!(s.dt > 0.0)) fail("time.dt", "must be positive");
  if (!(s.t1 > s.t0)) fail("time.t1", "must exceed t0");
  if (stride < 1 || stride != std::floor(stride)) fail("time.stride", "must be a positive integer");
  s.stride = static_cast<std::size_t>(stride);

  const std::string integrator = doc.contains("integrator") ? as_string(doc.at("integrator"), "integrator") : "rk4";
  if (integrator == "rk4") {
    s.integrator = IntegratorKind::rk4;
  } else if (integrator == "exact") {
    s.integrator = IntegratorKind::exact;
    if (s.kind == SystemKind::flat_hyperhamiltonian) {
      fail("integrator", "no closed-form flow for flat_hyperhamiltonian; use rk4");
    }
    if (s.kind == SystemKind::pauli && !s.field->is_constant()) {
      fail("integrator", "exact Pauli evolution requires a constant field");
    }
  } else {
    fail("integrator", "unknown integrator '" + integrator + "' (expected rk4 or exact)");
  }

  if (doc.contains("diagnostics")) {
    const json& d = doc.at("diagnostics");
    if (!d.is_array()) fail("diagnostics", "expected a list of names");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string name = as_string(d[i], index_path("diagnostics", i));
      if (!kKnownDiagnostics.count(name)) fail(index_path("diagnostics", i), "unknown diagnostic '" + name + "'");
      s.diagnostics.push_back(name);
    }
  }
  if (s.diagnostics.empty()) s.diagnostics = default_diagnostics(s);

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    if (!t.is_object()) fail("tolerances", "expected an object");
    reject_unknown_keys(t, "tolerances",
                        {"structure", "conservation", "hopf", "great_circle", "divergence", "larmor"});
    Tolerances& tol = s.tolerances;
    tol.structure = number_or(t, "structure", "tolerances", tol.structure);
    tol.conservation = number_or(t, "conservation", "tolerances", tol.conservation);
    tol.hopf = number_or(t, "hopf", "tolerances", tol.hopf);
    tol.great_circle = number_or(t, "great_circle", "tolerances", tol.great_circle);
    tol.divergence = number_or(t, "divergence", "tolerances", tol.divergence);
    tol.larmor = number_or(t, "larmor", "tolerances", tol.larmor);
    for (double v : {tol.structure, tol.conservation, tol.hopf, tol.great_circle, tol.divergence, tol.larmor}) {
      if (v < 0.0) fail("tolerances", "tolerances must be nonnegative");
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (!o.is_object()) fail("output", "expected an object");
    reject_unknown_keys(o, "output", {"directory", "trajectory", "summary", "report"});
    if (o.contains("directory")) s.output.directory = as_string(o.at("directory"), "output.directory");
    if (o.contains("trajectory")) s.output.trajectory = as_string(o.at("trajectory"), "output.trajectory");
    if (o.contains("summary")) s.output.summary = as_string(o.at("summary"), "output.summary");
    if (o.contains("report")) s.output.report = as_string(o.at("report"), "output.report");
  }
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) line += text[i] == '\n';
    throw ScenarioError("JSON syntax error at line " + std::to_string(line) + ": " + e.what(), {}, line);
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

GeneratorSet scenario_generator_set(const Scenario& s) {
  if (!is_oscillator(s.kind)) throw DomainError("scenario has no generator set");
  if (s.generator_choice == "quaternion") return builtin_generator_set(4);
  if (s.generator_choice == "symplectic_2d") return builtin_generator_set(2);
  return GeneratorSet(s.block_dim, s.generators);
}

CliffordOscillator scenario_oscillator(const Scenario& s) {
  GeneratorSet set = scenario_generator_set(s);
  if (s.nu_slope.empty()) {
    return CliffordOscillator(std::move(set), s.blocks,
                              [nu = s.nu](const Vector&) { return nu; }, s.tolerances.structure);
  }
  return CliffordOscillator::affine(std::move(set), s.nu, s.nu_slope);
}

HyperhamiltonianSystem scenario_hyperhamiltonian(const Scenario& s) {
  if (s.kind == SystemKind::pauli) return pauli_system((*s.field)(s.t0));
  if (s.kind != SystemKind::flat_hyperhamiltonian) {
    throw DomainError("scenario kind has no hyperhamiltonian chart");
  }
  std::array<ScalarField, 3> h;
  for (int a = 0; a < 3; ++a) {
    h[a] = ScalarField::quadratic(s.hamiltonians[a].q, s.hamiltonians[a].b, s.hamiltonians[a].c);
  }
  return {HyperkahlerChart::constant(s.metric, s.structures), HamiltonianTriple(std::move(h))};
}

Trajectory simulate(const Scenario& s) {
  switch (s.kind) {
    case SystemKind::clifford_oscillator:
    case SystemKind::quaternionic_oscillator: {
      const CliffordOscillator sys = scenario_oscillator(s);
      if (s.integrator == IntegratorKind::exact) {
        const BlockFlow flow(sys, BlockState(s.blocks, s.block_dim, s.initial_state));
        Trajectory traj;
        for (double t : strided_sample_times(s.t0, s.t1, s.dt, s.stride)) {
          traj.append(t, flow.state_at(t - s.t0).data());
        }
        return traj;
      }
      const int blocks = s.blocks;
      const int m = s.block_dim;
      return integrate_rk4(
          autonomous([sys, blocks, m](const Vector& x) {
            return oscillator_field(sys, BlockState(blocks, m, x));
          }),
          s.initial_state, s.t0, s.t1, s.dt, s.stride);
    }
    case SystemKind::flat_hyperhamiltonian: {
      const HyperhamiltonianSystem sys = scenario_hyperhamiltonian(s);
      return integrate_rk4(autonomous([sys](const Vector& x) { return hyperham_field_at(sys, x); }),
                           s.initial_state, s.t0, s.t1, s.dt, s.stride);
    }
    case SystemKind::pauli:
      return evolve_pauli_r4(*s.field, Vector4(s.initial_state), s.t0, s.t1, s.dt,
                             s.integrator == IntegratorKind::exact ? PauliMethod::exact
                                                                   : PauliMethod::rk4,
                             s.stride);
  }
  throw DomainError("unknown scenario kind");
}

std::vector<std::string> default_diagnostics(const Scenario& s) {
  switch (s.kind) {
    case SystemKind::clifford_oscillator:
      return {"radii", "norm", "great_circle", "divergence"};
    case SystemKind::quaternionic_oscillator:
      return {"radii", "norm", "hopf", "great_circle", "divergence"};
    case SystemKind::flat_hyperhamiltonian:
      return {"component_hamiltonians", "divergence"};
    case SystemKind::pauli:
      return {"norm", "hopf", "great_circle", "larmor", "bloch"};
  }
  return {};
}

void attach_diagnostic_columns(const Scenario& s, Trajectory& traj) {
  for (const std::string& d : s.diagnostics) {
    if (d == "radii") {
      const int m = s.block_dim;
      for (int k = 0; k < s.blocks; ++k) {
        traj.add_diagnostic({"rho" + std::to_string(k + 1), [m, k](const Vector& x) {
                               return x.segment(k * m, m).squaredNorm();
                             }});
      }
    } else if (d == "norm") {
      traj.add_diagnostic({"norm", [](const Vector& x) { return x.squaredNorm(); }});
    } else if (d == "bloch" && s.kind == SystemKind::pauli) {
      add_bloch_columns(traj);
    }
  }
}

std::string to_string(DiagnosticResult::Status status) {
  switch (status) {
    case DiagnosticResult::Status::pass: return "pass";
    case DiagnosticResult::Status::fail: return "fail";
    case DiagnosticResult::Status::not_applicable: return "n/a";
  }
  return "unknown";
}

const DiagnosticResult& DiagnosisReport::result(const std::string& name) const {
  for (const auto& r : results) {
    if (r.name == name) return r;
  }
  throw DomainError("no diagnostic result named '" + name + "'");
}

std::string DiagnosisReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  out << "diagnostics\n";
  for (const auto& r : results) {
    out << "  " << r.name << ": " << to_string(r.status);
    if (r.status != DiagnosticResult::Status::not_applicable) {
      out << " (value " << r.value << ", threshold " << r.threshold << ")";
    }
    if (!r.note.empty()) out << " - " << r.note;
    out << "\n";
  }
  out << "result: " << (passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

json DiagnosisReport::to_json() const {
  json list = json::array();
  for (const auto& r : results) {
    json item = {{"name", r.name}, {"status", to_string(r.status)}};
    if (r.status != DiagnosticResult::Status::not_applicable) {
      item["value"] = r.value;
      item["threshold"] = r.threshold;
    }
    if (!r.note.empty()) item["note"] = r.note;
    list.push_back(std::move(item));
  }
  return {{"passed", passed}, {"results", std::move(list)}};
}

namespace {

struct OrbitGenerator {
  int block = 0;
  Matrix generator;
};

/// Fixed per-block orbit generators A_k, or an explanation when the
/// scenario has none.
std::vector<OrbitGenerator> orbit_generators(const Scenario& s, const Vector& x0, std::string& why) {
  std::vector<OrbitGenerator> out;
  if (is_oscillator(s.kind)) {
    const CliffordOscillator sys = scenario_oscillator(s);
    const BlockFlow flow(sys, BlockState(s.blocks, s.block_dim, x0));
    for (int k = 0; k < s.blocks; ++k) {
      const auto& d = flow.decompositions()[k];
      if (!d.degenerate) out.push_back({k, d.generator});
    }
    if (out.empty()) why = "all blocks have zero frequency";
  } else if (s.kind == SystemKind::pauli) {
    if (!s.field->is_constant()) {
      why = "time-dependent generator";
    } else {
      const Vector3 b = s.field->constant_value();
      if (b.norm() == 0.0) why = "zero field";
      else out.push_back({0, Matrix(pauli_generator(b) / b.norm())});
    }
  } else {
    why = "no fixed orbit generator for a general hyperhamiltonian field";
  }
  return out;
}

DiagnosticResult make_result(std::string name, double value, double threshold, std::string note = {}) {
  DiagnosticResult r;
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.status = value <= threshold ? DiagnosticResult::Status::pass : DiagnosticResult::Status::fail;
  r.note = std::move(note);
  return r;
}

DiagnosticResult not_applicable(std::string name, std::string note) {
  DiagnosticResult r;
  r.name = std::move(name);
  r.status = DiagnosticResult::Status::not_applicable;
  r.note = std::move(note);
  return r;
}

void add_conservation(DiagnosisReport& report, const Trajectory& traj,
                      const std::vector<Quantity>& qs, double tol, const std::string& note = {}) {
  const ConservationReport c = conservation_report(traj, qs, tol);
  for (const auto& e : c.entries) report.results.push_back(make_result(e.name + " drift", e.drift, e.threshold, note));
}

}  // namespace

DiagnosisReport diagnose(const Scenario& s, const Trajectory& traj) {
  if (traj.empty()) throw DomainError("cannot diagnose an empty trajectory");
  if (traj.dim() != s.state_dim()) {
    throw DomainError("trajectory has " + std::to_string(traj.dim()) +
                      " state columns; the scenario system is " + std::to_string(s.state_dim()) +
                      "-dimensional");
  }
  DiagnosisReport report;
  const Vector& x0 = traj.states.front();
  const Tolerances& tol = s.tolerances;

  for (const std::string& d : s.diagnostics) {
    if (d == "radii") {
      std::vector<Quantity> qs;
      const int m = s.block_dim;
      for (int k = 0; k < s.blocks; ++k) {
        qs.push_back({"rho" + std::to_string(k + 1),
                      [m, k](const Vector& x) { return x.segment(k * m, m).squaredNorm(); }});
      }
      add_conservation(report, traj, qs, tol.conservation);
    } else if (d == "norm") {
      add_conservation(report, traj, {{"norm", [](const Vector& x) { return x.squaredNorm(); }}},
                       tol.conservation);
    } else if (d == "hopf") {
      std::string why;
      const bool quaternion_blocks = (is_oscillator(s.kind) && s.generator_choice == "quaternion") ||
                                     s.kind == SystemKind::pauli;
      if (!quaternion_blocks) {
        report.results.push_back(not_applicable(
            "hopf", s.kind == SystemKind::flat_hyperhamiltonian
                        ? "no fixed orbit generator for a general hyperhamiltonian field"
                        : "generator set is not the standard quaternion triple"));
        continue;
      }
      const auto gens = orbit_generators(s, x0, why);
      if (gens.empty()) {
        report.results.push_back(not_applicable("hopf", why));
        continue;
      }
      const QuaternionTriple commutant = s.kind == SystemKind::pauli
                                             ? standard_quaternion_triple()
                                             : static_cast<QuaternionTriple>(commutant_triple());
      for (const auto& g : gens) {
        const Matrix4 a = g.generator;
        const Vector4 xi0 = x0.segment(4 * g.block, 4);
        const Vector3 mu0 = hopf_map(xi0, a, commutant, kDefaultTolerance);
        double drift = 0.0;
        for (const Vector& x : traj.states) {
          drift = std::max(drift, (hopf_map(Vector4(x.segment(4 * g.block, 4)), a, commutant,
                                            kDefaultTolerance) - mu0).norm());
        }
        report.results.push_back(
            make_result("hopf" + std::to_string(g.block + 1) + " drift", drift, tol.hopf));
      }
    } else if (d == "great_circle") {
      std::string why;
      const auto gens = orbit_generators(s, x0, why);
      if (gens.empty()) {
        report.results.push_back(not_applicable("great_circle", why));
        continue;
      }
      const int m = s.block_dim;
      for (const auto& g : gens) {
        std::vector<Vector> samples;
        samples.reserve(traj.size());
        for (const Vector& x : traj.states) samples.push_back(x.segment(g.block * m, m));
        if (samples.front().norm() == 0.0) {
          report.results.push_back(not_applicable(
              "great_circle" + std::to_string(g.block + 1), "block starts at the origin"));
          continue;
        }
        report.results.push_back(make_result("great_circle" + std::to_string(g.block + 1),
                                             great_circle_residual(samples, g.generator),
                                             tol.great_circle));
      }
    } else if (d == "component_hamiltonians") {
      if (s.kind == SystemKind::pauli && !s.field->is_constant()) {
        report.results.push_back(not_applicable("component_hamiltonians", "time-dependent hamiltonians"));
        continue;
      }
      if (is_oscillator(s.kind)) {
        report.results.push_back(not_applicable("component_hamiltonians",
                                                "oscillator scenarios carry coefficients, not hamiltonians"));
        continue;
      }
      const HyperhamiltonianSystem sys = scenario_hyperhamiltonian(s);
      for (int a = 0; a < 3; ++a) {
        const Trajectory flow = integrate_rk4(
            autonomous([sys, a](const Vector& x) { return component_field_at(sys, x, a); }), x0,
            s.t0, s.t1, s.dt, s.stride);
        const auto& h = sys.hamiltonians[a];
        add_conservation(report, flow,
                         {{"h" + std::to_string(a + 1), [h](const Vector& x) { return h.value(x); }}},
                         tol.conservation, "along the X" + std::to_string(a + 1) + " flow");
      }
    } else if (d == "divergence") {
      StateField field;
      if (is_oscillator(s.kind)) {
        const CliffordOscillator sys = scenario_oscillator(s);
        const int blocks = s.blocks, m = s.block_dim;
        field = [sys, blocks, m](const Vector& x) { return oscillator_field(sys, BlockState(blocks, m, x)); };
      } else if (s.kind == SystemKind::flat_hyperhamiltonian) {
        const HyperhamiltonianSystem sys = scenario_hyperhamiltonian(s);
        field = [sys](const Vector& x) { return hyperham_field_at(sys, x); };
      }
      double worst = 0.0;
      for (std::size_t i = 0; i < traj.size(); ++i) {
        if (s.kind == SystemKind::pauli) {
          const Matrix4 a = pauli_generator((*s.field)(traj.times[i]));
          field = [a](const Vector& x) { return Vector(a * x); };
        }
        worst = std::max(worst, std::abs(divergence_residual(field, traj.states[i])));
      }
      report.results.push_back(make_result("divergence", worst, tol.divergence));
    } else if (d == "bloch") {
      if (s.kind != SystemKind::pauli) {
        report.results.push_back(not_applicable("bloch", "only defined for pauli scenarios"));
        continue;
      }
      double worst = 0.0;
      for (const Vector& x : traj.states) {
        worst = std::max(worst, std::abs(bloch_vector(Vector4(x)).norm() - x.squaredNorm()));
      }
      report.results.push_back(make_result("bloch length", worst, tol.conservation,
                                           "|n| versus |xi|^2"));
    } else if (d == "larmor") {
      if (s.kind != SystemKind::pauli) {
        report.results.push_back(not_applicable("larmor", "only defined for pauli scenarios"));
        continue;
      }
      if (!s.field->is_constant() || s.field->constant_value().norm() == 0.0) {
        report.results.push_back(not_applicable("larmor", "needs a constant nonzero field"));
        continue;
      }
      const Vector3 b = s.field->constant_value();
      std::vector<Vector3> bloch;
      for (const Vector& x : traj.states) bloch.push_back(bloch_vector(Vector4(x)));
      const Vector3 n0 = bloch.front();
      if ((n0 - n0.dot(b.normalized()) * b.normalized()).norm() < 1e-6 * (1.0 + n0.norm())) {
        report.results.push_back(not_applicable("larmor", "initial spin is aligned with the field"));
        continue;
      }
      const double expected = 2.0 * b.norm();
      const double measured = measure_precession_rate(traj.times, bloch, b);
      report.results.push_back(make_result("larmor rate", std::abs(measured - expected) / expected,
                                           tol.larmor,
                                           "measured " + format_double(measured) + ", expected " +
                                               format_double(expected)));
    }
  }
  for (const auto& r : report.results) {
    if (r.status == DiagnosticResult::Status::fail) report.passed = false;
  }
  return report;
}

namespace {

std::filesystem::path output_path(const Scenario& s, const std::string& file) {
  return std::filesystem::path(s.output.directory) / file;
}

void ensure_directory(const Scenario& s) {
  std::error_code ec;
  std::filesystem::create_directories(s.output.directory, ec);
  if (ec) throw IoError("cannot create output directory '" + s.output.directory + "': " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_report_file(const Scenario& s, const std::string& text) {
  if (s.output.report.empty()) return;
  ensure_directory(s);
  write_text(output_path(s, s.output.report), text);
}

}  // namespace

CommandResult cmd_validate(const Scenario& s) {
  CommandResult result;
  std::ostringstream text;
  bool ok = true;
  const double tol = s.tolerances.structure;
  text << "scenario: " << (s.name.empty() ? "(unnamed)" : s.name) << " [" << to_string(s.kind) << "]\n";
  json details;

  if (is_oscillator(s.kind)) {
    const ValidationReport r = validate_generator_set(scenario_generator_set(s), tol);
    text << r.to_text();
    ok = r.valid;
    details["generator_max_residual"] = r.max_residual();
    if (s.generator_choice == "quaternion") {
      const double q = quaternion_relation_residual(standard_quaternion_triple());
      text << "quaternion relation residual: " << format_double(q) << "\n";
      ok = ok && q <= tol;
    }
  } else {
    const HyperhamiltonianSystem sys = scenario_hyperhamiltonian(s);
    const StructureReport r = verify_structure_at(sys.chart, s.initial_state, tol);
    text << r.to_text();
    ok = r.passed;
    details["structure_max_residual"] = r.max_residual();
    if (r.passed) {
      for (int a = 0; a < 3; ++a) {
        const ClosednessReport c =
            verify_closedness(sys.chart, {s.initial_state}, a, 1e-5, s.tolerances.divergence);
        text << c.to_text();
        ok = ok && c.passed;
      }
    }
    if (s.kind == SystemKind::pauli) {
      const QuaternionTriple k = commutant_triple();
      const QuaternionTriple std_k = standard_quaternion_triple();
      double comm = 0.0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) comm = std::max(comm, max_abs(Matrix4(k[a] * std_k[b] - std_k[b] * k[a])));
      }
      text << "commutant check [Khat_a, K_b]: " << format_double(comm) << "\n";
      ok = ok && comm <= tol;
    }
  }
  text << "validation: " << (ok ? "PASS" : "FAIL") << "\n";
  result.report = text.str();
  result.exit_code = ok ? kExitPass : kExitValidationFailure;
  result.summary = {{"command", "validate"}, {"passed", ok}, {"details", details}, {"scenario", s.to_json()}};
  write_report_file(s, result.report);
  return result;
}

CommandResult cmd_simulate(const Scenario& s) {
  CommandResult result;
  const auto start = std::chrono::steady_clock::now();
  if (s.kind == SystemKind::pauli) {
    const double n = s.initial_state.norm();
    if (std::abs(n - 1.0) > 1e-8) {
      result.warnings.push_back("initial spinor norm is " + format_double(n) +
                                ", not 1; physical probabilities assume normalization");
    }
    if (!s.field->covers(s.t0, s.t1)) {
      result.warnings.push_back("time span exceeds the field table; values are clamped at the ends");
    }
  }
  Trajectory traj = simulate(s);
  attach_diagnostic_columns(s, traj);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ensure_directory(s);
  write_csv(traj, output_path(s, s.output.trajectory).string());

  std::vector<Quantity> qs = {{"norm", [](const Vector& x) { return x.squaredNorm(); }}};
  for (int k = 0; k < s.blocks; ++k) {
    const int m = s.block_dim;
    qs.push_back({"rho" + std::to_string(k + 1), [m, k](const Vector& x) { return x.segment(k * m, m).squaredNorm(); }});
  }
  json drifts = json::object();
  try {
    const ConservationReport cons = conservation_report(traj, qs, s.tolerances.conservation);
    for (const auto& e : cons.entries) drifts[e.name] = e.drift;
  } catch (const EvaluationError&) {
    // Overflowed before the integrator gave up; the drift is meaningless.
    for (const auto& q : qs) drifts[q.name] = nullptr;
  }

  result.summary = {{"command", "simulate"},
                    {"scenario", s.to_json()},
                    {"samples", traj.size()},
                    {"final_time", traj.times.back()},
                    {"final_state", vector_json(traj.states.back())},
                    {"conservation_drift", drifts},
                    {"aborted", traj.aborted},
                    {"warnings", result.warnings},
                    {"trajectory_csv", output_path(s, s.output.trajectory).string()},
                    {"wall_time_seconds", wall}};
  if (traj.aborted) result.summary["abort_reason"] = traj.abort_reason;
  write_text(output_path(s, s.output.summary), result.summary.dump(2) + "\n");

  std::ostringstream text;
  text << "simulated " << traj.size() << " samples of " << to_string(s.kind) << " with "
       << to_string(s.integrator) << " on [" << format_double(s.t0) << ", " << format_double(s.t1)
       << "]\n";
  text << "trajectory: " << output_path(s, s.output.trajectory).string() << "\n";
  text << "summary: " << output_path(s, s.output.summary).string() << "\n";
  if (traj.aborted) text << "integration aborted: " << traj.abort_reason << "\n";
  result.report = text.str();
  result.exit_code = traj.aborted ? kExitRuntimeError : kExitPass;
  return result;
}

CommandResult cmd_diagnose(const Scenario& s, const std::optional<std::string>& trajectory_csv) {
  CommandResult result;
  const Trajectory traj = trajectory_csv ? read_csv(*trajectory_csv) : simulate(s);
  if (traj.aborted) {
    result.exit_code = kExitRuntimeError;
    result.report = "integration aborted: " + traj.abort_reason + "\n";
    return result;
  }
  const DiagnosisReport report = diagnose(s, traj);
  result.report = report.to_text();
  result.exit_code = report.passed ? kExitPass : kExitValidationFailure;
  result.summary = {{"command", "diagnose"},
                    {"source", trajectory_csv ? *trajectory_csv : std::string("simulation")},
                    {"diagnosis", report.to_json()},
                    {"scenario", s.to_json()}};
  write_report_file(s, result.report);
  return result;
}

}  // namespace hyperham
