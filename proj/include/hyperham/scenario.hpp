#pragma once

#include "hyperham/hyperkahler.hpp"
#include "hyperham/integrate.hpp"
#include "hyperham/oscillator.hpp"
#include "hyperham/pauli.hpp"
#include "hyperham/types.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hyperham {

inline constexpr int kScenarioSchemaVersion = 1;

/// Process exit codes used by the command-line tool.
enum ExitCode : int {
  kExitPass = 0,
  kExitValidationFailure = 1,
  kExitRuntimeError = 2,
  kExitIoError = 3,
};

/// Malformed or inconsistent scenario file. `field` names the offending
/// entry ("time.dt"); `line` is set for JSON syntax errors.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& message, std::string field = {}, int line = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class SystemKind { clifford_oscillator, quaternionic_oscillator, flat_hyperhamiltonian, pauli };
enum class IntegratorKind { rk4, exact };

std::string to_string(SystemKind kind);
std::string to_string(IntegratorKind kind);

struct QuadraticHamiltonian {
  Matrix q;
  Vector b;
  double c = 0.0;
};

struct Tolerances {
  double structure = 1e-10;     ///< generator / hyperkahler checks
  double conservation = 1e-9;   ///< relative drift of conserved quantities
  double hopf = 1e-9;           ///< Hopf-map drift
  double great_circle = 1e-8;   ///< distance from the orbit plane
  double divergence = 1e-8;     ///< flat-chart divergence
  double larmor = 1e-6;         ///< relative error of the precession rate
};

struct OutputPaths {
  std::string directory = ".";
  std::string trajectory = "trajectory.csv";
  std::string summary = "summary.json";
  std::string report;  ///< optional text report; empty disables it
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  SystemKind kind = SystemKind::quaternionic_oscillator;

  // Oscillator kinds.
  std::string generator_choice;  ///< "symplectic_2d", "quaternion" or "custom"
  int block_dim = 4;
  int blocks = 1;
  std::vector<Matrix> generators;
  Matrix nu;                   ///< blocks x p
  std::vector<Matrix> nu_slope;  ///< empty, or one p x blocks matrix per block

  // Flat hyperhamiltonian.
  std::string structure_choice;  ///< "standard" or "custom"
  Matrix metric;
  std::array<Matrix, 3> structures;
  std::array<QuadraticHamiltonian, 3> hamiltonians;

  // Pauli.
  std::optional<MagneticField> field;

  Vector initial_state;
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  std::size_t stride = 1;
  IntegratorKind integrator = IntegratorKind::rk4;
  std::vector<std::string> diagnostics;
  Tolerances tolerances;
  OutputPaths output;

  int state_dim() const;
  /// Effective parameters, defaults included; parse_scenario(to_json())
  /// reproduces the scenario.
  nlohmann::json to_json() const;
  /// Applies one tolerance to every check.
  void override_tolerance(double tol);
};

Scenario parse_scenario(const nlohmann::json& doc);
/// Parses JSON text; syntax errors carry a line number.
Scenario parse_scenario_text(const std::string& text);
/// Throws IoError if the file cannot be read.
Scenario load_scenario(const std::string& path);

/// Generator set named by the scenario (oscillator kinds only).
GeneratorSet scenario_generator_set(const Scenario& s);
/// Oscillator built from the scenario; throws DomainError if invalid.
CliffordOscillator scenario_oscillator(const Scenario& s);
/// Hyperhamiltonian system for flat_hyperhamiltonian and pauli kinds
/// (pauli uses the field at t0).
HyperhamiltonianSystem scenario_hyperhamiltonian(const Scenario& s);

/// Raw trajectory of the scenario, without diagnostic columns.
Trajectory simulate(const Scenario& s);

struct DiagnosticResult {
  std::string name;
  enum class Status { pass, fail, not_applicable } status = Status::pass;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

std::string to_string(DiagnosticResult::Status status);

struct DiagnosisReport {
  std::vector<DiagnosticResult> results;
  bool passed = true;

  const DiagnosticResult& result(const std::string& name) const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Diagnostics run when a scenario does not list any.
std::vector<std::string> default_diagnostics(const Scenario& s);

/// Evaluates the scenario's diagnostics on a trajectory of that scenario.
DiagnosisReport diagnose(const Scenario& s, const Trajectory& trajectory);

/// Appends the per-sample columns requested by the diagnostics list
/// (radii, norm, bloch).
void attach_diagnostic_columns(const Scenario& s, Trajectory& trajectory);

struct CommandResult {
  int exit_code = kExitPass;
  std::string report;
  std::vector<std::string> warnings;
  nlohmann::json summary;
};

/// Structure validation only.
CommandResult cmd_validate(const Scenario& s);
/// Writes the trajectory CSV and JSON run summary under the output directory.
CommandResult cmd_simulate(const Scenario& s);
/// Diagnoses a freshly simulated trajectory, or the CSV at `trajectory_csv`.
CommandResult cmd_diagnose(const Scenario& s, const std::optional<std::string>& trajectory_csv = {});

}  // namespace hyperham
