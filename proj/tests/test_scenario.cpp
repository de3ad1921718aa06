#include "hyperham/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace hyperham;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarioDir = HYPERHAM_SCENARIO_DIR;
const fs::path kDataDir = HYPERHAM_TEST_DATA_DIR;

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("hyperham_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json minimal_oscillator() {
  return json::parse(R"({
    "schema_version": 1,
    "system": {"kind": "quaternionic_oscillator", "nu": [1, 0, 0]},
    "initial_state": [1, 0, 0, 0],
    "time": {"t1": 10, "dt": 0.001}
  })");
}

std::string error_field(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("loading") {
  SUBCASE("minimal file gets defaults") {
    const Scenario s = parse_scenario(minimal_oscillator());
    CHECK(s.kind == SystemKind::quaternionic_oscillator);
    CHECK(s.generator_choice == "quaternion");
    CHECK(s.blocks == 1);
    CHECK(s.t0 == 0.0);
    CHECK(s.stride == 1);
    CHECK(s.integrator == IntegratorKind::rk4);
    CHECK(s.diagnostics == default_diagnostics(s));
    CHECK(s.output.trajectory == "trajectory.csv");
    CHECK(s.state_dim() == 4);
  }
  SUBCASE("shipped examples") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(kScenarioDir)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_scenario(entry.path().string()));
      ++count;
    }
    CHECK(count >= 5);
  }
  SUBCASE("errors name the offending field") {
    json d = minimal_oscillator();
    d["initial_state"] = {1, 0, 0};
    CHECK(error_field(d) == "initial_state");
    d = minimal_oscillator();
    d["time"]["dt"] = 0;
    CHECK(error_field(d) == "time.dt");
    d = minimal_oscillator();
    d["time"]["t1"] = -1;
    CHECK(error_field(d) == "time.t1");
    d = minimal_oscillator();
    d["system"]["kind"] = "lagrangian";
    CHECK(error_field(d) == "system.kind");
    d = minimal_oscillator();
    d["system"]["colour"] = "blue";
    CHECK(error_field(d) == "system.colour");
    d = minimal_oscillator();
    d["schema_version"] = 2;
    CHECK(error_field(d) == "schema_version");
    d = minimal_oscillator();
    d.erase("schema_version");
    CHECK(error_field(d) == "schema_version");
    d = minimal_oscillator();
    d["diagnostics"] = {"radii", "entropy"};
    CHECK(error_field(d) == "diagnostics[1]");
    d = minimal_oscillator();
    d["system"]["nu"] = {1, 0};
    CHECK(error_field(d).rfind("system.nu", 0) == 0);
    d = minimal_oscillator();
    d["initial_spinor"] = {{1, 0}, {0, 0}};
    CHECK(error_field(d) == "initial_spinor");
  }
  SUBCASE("exact integrator restrictions") {
    json d = json::parse(slurp(kScenarioDir / "pauli_rotating.json"));
    d["integrator"] = "exact";
    CHECK(error_field(d) == "integrator");
    d = json::parse(slurp(kScenarioDir / "flat_hyperhamiltonian.json"));
    d["integrator"] = "exact";
    CHECK(error_field(d) == "integrator");
  }
  SUBCASE("syntax errors carry a line") {
    try {
      parse_scenario_text("{\n  \"schema_version\": 1,\n  \"system\": {,\n}");
      FAIL("expected a parse error");
    } catch (const ScenarioError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("unreadable file") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
  }
}

TEST_CASE("effective parameters round trip") {
  for (const auto& entry : fs::directory_iterator(kScenarioDir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const Scenario s = load_scenario(entry.path().string());
    const json echoed = s.to_json();
    CHECK(parse_scenario(echoed).to_json() == echoed);
  }
}

TEST_CASE("validate") {
  SUBCASE("shipped examples pass") {
    for (const auto& entry : fs::directory_iterator(kScenarioDir)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK(cmd_validate(load_scenario(entry.path().string())).exit_code == kExitPass);
    }
  }
  SUBCASE("non-anticommuting user generators fail with a named residual") {
    const CommandResult r = cmd_validate(load_scenario((kDataDir / "invalid_generators.json").string()));
    CHECK(r.exit_code == kExitValidationFailure);
    CHECK(r.report.find("anticommutator {K1,K2}: 2.000e+00  FAIL") != std::string::npos);
  }
  SUBCASE("swapped structures fail the quaternion relation") {
    json d = json::parse(slurp(kScenarioDir / "flat_hyperhamiltonian.json"));
    const QuaternionTriple k = standard_quaternion_triple();
    auto mat = [](const Matrix4& m) {
      json rows = json::array();
      for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
      return rows;
    };
    d["system"]["structures"] = {mat(k[0]), mat(k[2]), mat(k[1])};
    const CommandResult r = cmd_validate(parse_scenario(d));
    CHECK(r.exit_code == kExitValidationFailure);
    CHECK(r.report.find("quaternion relation") != std::string::npos);
    CHECK(r.report.find("FAIL") != std::string::npos);
  }
}

TEST_CASE("simulate") {
  const fs::path dir = scratch_dir("simulate");
  SUBCASE("exact quaternionic run hits (0,-1,0,0) at pi/2") {
    json d = minimal_oscillator();
    d["integrator"] = "exact";
    d["time"] = {{"t1", 2.0}, {"dt", std::numbers::pi / 8}};
    Scenario s = parse_scenario(d);
    s.output.directory = dir.string();
    REQUIRE(cmd_simulate(s).exit_code == kExitPass);
    const Trajectory t = read_csv((dir / "trajectory.csv").string());
    REQUIRE(t.size() == 7);
    CHECK(t.times[4] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    CHECK((t.states[4] - Vector(Vector4(0, -1, 0, 0))).norm() <= 1e-15);
  }
  SUBCASE("pauli spin-up in B = z") {
    json d = json::parse(R"({
      "schema_version": 1,
      "system": {"kind": "pauli", "field": {"type": "constant", "B": [0, 0, 1]}},
      "initial_spinor": [[1, 0], [0, 0]],
      "time": {"t1": 10, "dt": 0.001, "stride": 100},
      "diagnostics": ["norm", "bloch"]
    })");
    Scenario s = parse_scenario(d);
    s.output.directory = dir.string();
    REQUIRE(cmd_simulate(s).exit_code == kExitPass);
    const std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.rfind("t,chi_p,zeta_p,chi_m,zeta_m,d_norm,n_x,n_y,n_z\n", 0) == 0);
    const Trajectory t = read_csv((dir / "trajectory.csv").string());
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      worst = std::max(worst, (t.states[i] - Vector(Vector4(std::cos(t.times[i]), std::sin(t.times[i]), 0, 0))).norm());
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("summary echoes the run") {
    Scenario s = load_scenario((kScenarioDir / "quaternionic_rk4.json").string());
    s.output.directory = dir.string();
    const CommandResult r = cmd_simulate(s);
    const json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["scenario"] == s.to_json());
    CHECK(summary["samples"] == 1001);
    CHECK(summary["final_time"] == 10.0);
    CHECK(summary["conservation_drift"]["rho1"].get<double>() <= 1e-9);
    CHECK(summary.contains("wall_time_seconds"));
    CHECK(parse_scenario(summary["scenario"]).to_json() == s.to_json());
    CHECK(r.summary["samples"] == summary["samples"]);
  }
  SUBCASE("repeated runs are byte-identical") {
    for (const char* name : {"quaternionic_rk4.json", "pauli_rotating.json", "flat_hyperhamiltonian.json"}) {
      Scenario s = load_scenario((kScenarioDir / name).string());
      s.output.directory = (dir / "a").string();
      cmd_simulate(s);
      s.output.directory = (dir / "b").string();
      cmd_simulate(s);
      CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
    }
  }
  SUBCASE("unnormalized spinor warns") {
    json d = json::parse(slurp(kScenarioDir / "pauli_constant.json"));
    d["initial_spinor"] = {{1, 0}, {1, 0}};
    Scenario s = parse_scenario(d);
    s.output.directory = dir.string();
    const CommandResult r = cmd_simulate(s);
    CHECK(r.exit_code == kExitPass);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("norm") != std::string::npos);
  }
  SUBCASE("divergent run aborts") {
    json d = json::parse(slurp(kScenarioDir / "quaternionic_rk4.json"));
    d["system"]["nu_slope"] = {{{1e6}, {0}, {0}}};
    d["time"] = {{"t1", 10}, {"dt", 1.0}};
    d["diagnostics"] = {"norm"};
    Scenario s = parse_scenario(d);
    s.output.directory = dir.string();
    // Huge frequency with a coarse step: RK4 blows up.
    const CommandResult r = cmd_simulate(s);
    CHECK(r.exit_code == kExitRuntimeError);
    CHECK(r.summary["aborted"] == true);
  }
  SUBCASE("unwritable output directory") {
    Scenario s = parse_scenario(minimal_oscillator());
    s.output.directory = "/proc/hyperham_cannot_write_here";
    CHECK_THROWS_AS(cmd_simulate(s), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("diagnose") {
  SUBCASE("exact oscillator drifts at round-off") {
    const Scenario s = load_scenario((kScenarioDir / "quaternionic_exact.json").string());
    const CommandResult r = cmd_diagnose(s);
    CHECK(r.exit_code == kExitPass);
    for (const json& d : r.summary["diagnosis"]["results"]) {
      if (d["name"].get<std::string>().find("drift") != std::string::npos) CHECK(d["value"].get<double>() <= 1e-12);
    }
  }
  SUBCASE("coarse RK4 step is rejected") {
    json d = minimal_oscillator();
    d["time"] = {{"t1", 100}, {"dt", 0.1}};
    const Scenario s = parse_scenario(d);
    const CommandResult r = cmd_diagnose(s);
    CHECK(r.exit_code != kExitPass);
    const DiagnosisReport rep = diagnose(s, simulate(s));
    CHECK(rep.result("norm drift").status == DiagnosticResult::Status::fail);
    CHECK(rep.result("norm drift").value > 1e-9);
  }
  SUBCASE("rotating field: norm passes, hopf not applicable") {
    const Scenario s = load_scenario((kScenarioDir / "pauli_rotating.json").string());
    const DiagnosisReport rep = diagnose(s, simulate(s));
    CHECK(rep.passed);
    CHECK(rep.result("norm drift").status == DiagnosticResult::Status::pass);
    CHECK(rep.result("hopf").status == DiagnosticResult::Status::not_applicable);
    CHECK(rep.result("hopf").note == "time-dependent generator");
  }
  SUBCASE("from a CSV file") {
    const fs::path dir = scratch_dir("diagnose");
    Scenario s = load_scenario((kScenarioDir / "pauli_constant.json").string());
    s.output.directory = dir.string();
    cmd_simulate(s);
    const std::string csv = (dir / "trajectory.csv").string();
    const CommandResult r = cmd_diagnose(s, csv);
    CHECK(r.exit_code == kExitPass);
    CHECK(r.summary["source"] == csv);
    // A CSV of the wrong dimension is refused.
    Scenario wide = load_scenario((kScenarioDir / "quaternionic_exact.json").string());
    CHECK_THROWS_AS(cmd_diagnose(wide, csv), DomainError);
    CHECK_THROWS_AS(cmd_diagnose(s, (dir / "missing.csv").string()), IoError);
    fs::remove_all(dir);
  }
  SUBCASE("planted jump in a CSV fails") {
    const fs::path dir = scratch_dir("planted");
    Scenario s = load_scenario((kScenarioDir / "quaternionic_exact.json").string());
    Trajectory t = simulate(s);
    t.states[50] *= 1.01;
    write_csv(t, (dir / "bad.csv").string());
    const CommandResult r = cmd_diagnose(s, (dir / "bad.csv").string());
    CHECK(r.exit_code == kExitValidationFailure);
    fs::remove_all(dir);
  }
  SUBCASE("tolerance override") {
    Scenario s = load_scenario((kScenarioDir / "quaternionic_rk4.json").string());
    s.override_tolerance(1e-20);
    CHECK(cmd_diagnose(s).exit_code == kExitValidationFailure);
  }
}
