#pragma once

#include "hyperham/oscillator.hpp"
#include "hyperham/types.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hyperham {

/// dx/dt = f(t, x).
using Field = std::function<Vector(double t, const Vector& x)>;
/// Autonomous field x -> f(x).
using StateField = std::function<Vector(const Vector& x)>;

Field autonomous(StateField f);

struct Quantity {
  std::string name;
  std::function<double(const Vector&)> evaluate;
};

/// Time-stamped states plus named per-sample diagnostic columns.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  /// Column labels for the state; defaults to x1..xm when empty.
  std::vector<std::string> state_names;
  /// Full column labels (e.g. "d_rho1", "n_x") and values, one per sample.
  std::vector<std::string> diagnostic_names;
  std::vector<std::vector<double>> diagnostics;
  /// Set when integration stopped on a non-finite state.
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  Eigen::Index dim() const { return states.empty() ? 0 : states.front().size(); }

  void append(double t, Vector x);
  /// Evaluates q at every sample; the column is labelled "d_<name>".
  void add_diagnostic(const Quantity& q);
  /// Adds a column with an explicit label.
  void add_column(std::string label, std::vector<double> values);
  /// Throws DomainError on non-increasing times or ragged states.
  void check() const;
};

/// Classical fixed-step RK4 from t0 to t1; the last step is shortened to
/// land on t1. Records every `stride`-th step and always the final state.
/// A non-finite state stops the run with `aborted` set.
Trajectory integrate_rk4(const Field& field, const Vector& x0, double t0, double t1, double dt,
                         std::size_t stride = 1);

/// Samples the closed-form oscillator flow at t0 + i*dt_sample (and t1).
Trajectory integrate_exact_blocks(const CliffordOscillator& system, const BlockState& x0, double t0,
                                  double t1, double dt_sample);

/// Sample times t0, t0+dt, ... up to t1 inclusive, with t1 appended if
/// the grid does not land on it.
std::vector<double> sample_times(double t0, double t1, double dt);

/// Every `stride`-th entry of sample_times() plus the final time; the
/// sampling used by integrate_rk4.
std::vector<double> strided_sample_times(double t0, double t1, double dt, std::size_t stride);

struct ConservationEntry {
  std::string name;
  double initial = 0.0;
  double drift = 0.0;      ///< max_t |Q(x(t)) - Q(x(0))|
  double threshold = 0.0;  ///< tol * (1 + |Q(x(0))|)
  bool passed = false;
};

struct ConservationReport {
  double tolerance = 0.0;
  std::vector<ConservationEntry> entries;
  bool passed = false;

  const ConservationEntry& entry(const std::string& name) const;
  std::string to_text() const;
};

ConservationReport conservation_report(const Trajectory& trajectory,
                                       const std::vector<Quantity>& quantities, double tol);

/// Central-difference estimate of Sum_i d_i X^i at x, step fd_step*(1+|x_i|).
double divergence_residual(const StateField& field, const Vector& x, double fd_step = 1e-5);

/// Header `t,<state names>,<diagnostic labels>`, 17 significant digits,
/// locale independent.
void write_csv(const Trajectory& trajectory, std::ostream& out);
void write_csv(const Trajectory& trajectory, const std::string& path);

/// Parses the layout written by write_csv. Columns labelled "d_*" or
/// n_x/n_y/n_z become diagnostics; the rest are state components.
Trajectory read_csv(std::istream& in);
Trajectory read_csv(const std::string& path);

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

}  // namespace hyperham
