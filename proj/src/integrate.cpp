#include "hyperham/integrate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hyperham {

namespace {

bool is_diagnostic_label(const std::string& label) {
  return label.rfind("d_", 0) == 0 || label == "n_x" || label == "n_y" || label == "n_z";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("csv line " + std::to_string(line) + ": cannot parse number '" + text + "'");
  }
  return v;
}

}  // namespace

Field autonomous(StateField f) {
  return [f = std::move(f)](double, const Vector& x) { return f(x); };
}

void Trajectory::append(double t, Vector x) {
  times.push_back(t);
  states.push_back(std::move(x));
}

void Trajectory::add_diagnostic(const Quantity& q) {
  std::vector<double> values;
  values.reserve(states.size());
  for (const Vector& x : states) values.push_back(q.evaluate(x));
  add_column("d_" + q.name, std::move(values));
}

void Trajectory::add_column(std::string label, std::vector<double> values) {
  if (values.size() != states.size()) throw DimensionError("diagnostic column length != sample count");
  diagnostic_names.push_back(std::move(label));
  diagnostics.push_back(std::move(values));
}

void Trajectory::check() const {
  if (times.size() != states.size()) throw DimensionError("times and states differ in length");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("trajectory times are not strictly increasing");
    if (states[i].size() != states[0].size()) throw DimensionError("trajectory states are ragged");
  }
}

std::vector<double> sample_times(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (t1 < t0) throw DomainError("t1 must not precede t0");
  std::vector<double> out;
  const double span = t1 - t0;
  const double steps = span / dt;
  auto full = static_cast<std::size_t>(std::floor(steps + 1e-9));
  for (std::size_t i = 0; i <= full; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    out.push_back(std::min(t, t1));
  }
  // Land exactly on t1 whether the grid hits it or stops short.
  if (std::abs(out.back() - t1) <= 1e-9 * dt) {
    out.back() = t1;
  } else {
    out.push_back(t1);
  }
  return out;
}

std::vector<double> strided_sample_times(double t0, double t1, double dt, std::size_t stride) {
  if (stride == 0) throw DomainError("stride must be at least 1");
  const std::vector<double> grid = sample_times(t0, t1, dt);
  std::vector<double> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i % stride == 0 || i + 1 == grid.size()) out.push_back(grid[i]);
  }
  return out;
}

Trajectory integrate_rk4(const Field& field, const Vector& x0, double t0, double t1, double dt,
                         std::size_t stride) {
  if (!(dt > 0.0)) throw DomainError("rk4: dt must be positive");
  if (!(t1 > t0)) throw DomainError("rk4: t1 must exceed t0");
  if (stride == 0) throw DomainError("rk4: stride must be at least 1");
  const std::vector<double> grid = sample_times(t0, t1, dt);

  Trajectory traj;
  traj.append(t0, x0);
  Vector x = x0;
  const std::size_t steps = grid.size() - 1;
  auto abort = [&](std::size_t i, const std::string& reason) {
    traj.aborted = true;
    traj.abort_reason = reason + " at t = " + format_double(grid[i + 1]);
    if (traj.times.back() != grid[i]) traj.append(grid[i], x);
    return traj;
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = grid[i];
    const double h = grid[i + 1] - t;
    Vector next;
    try {
      const Vector k1 = field(t, x);
      const Vector k2 = field(t + 0.5 * h, x + 0.5 * h * k1);
      const Vector k3 = field(t + 0.5 * h, x + 0.5 * h * k2);
      const Vector k4 = field(t + h, x + h * k3);
      next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const EvaluationError& e) {
      return abort(i, std::string("field evaluation failed (") + e.what() + ")");
    }
    // The trajectory keeps the last finite state.
    if (!next.allFinite()) return abort(i, "non-finite state");
    x = std::move(next);
    if ((i + 1) % stride == 0 || i + 1 == steps) traj.append(grid[i + 1], x);
  }
  return traj;
}

Trajectory integrate_exact_blocks(const CliffordOscillator& system, const BlockState& x0, double t0,
                                  double t1, double dt_sample) {
  const BlockFlow flow(system, x0);
  Trajectory traj;
  if (t1 == t0) {
    traj.append(t0, x0.data());
    return traj;
  }
  for (double t : sample_times(t0, t1, dt_sample)) traj.append(t, flow.state_at(t - t0).data());
  return traj;
}

const ConservationEntry& ConservationReport::entry(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw DomainError("no conservation entry named '" + name + "'");
}

std::string ConservationReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  out << "conservation report, tol " << tolerance << " (relative to 1 + |initial|)\n";
  for (const auto& e : entries) {
    out << "  " << e.name << ": initial " << e.initial << ", drift " << e.drift << ", threshold "
        << e.threshold << (e.passed ? "  ok" : "  FAIL") << "\n";
  }
  out << "result: " << (passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

ConservationReport conservation_report(const Trajectory& trajectory,
                                       const std::vector<Quantity>& quantities, double tol) {
  if (trajectory.empty()) throw DomainError("conservation report needs a non-empty trajectory");
  ConservationReport report;
  report.tolerance = tol;
  report.passed = true;
  for (const Quantity& q : quantities) {
    ConservationEntry e;
    e.name = q.name;
    e.initial = q.evaluate(trajectory.states.front());
    if (!std::isfinite(e.initial)) throw EvaluationError("quantity '" + q.name + "' is not finite");
    for (const Vector& x : trajectory.states) {
      const double v = q.evaluate(x);
      if (!std::isfinite(v)) throw EvaluationError("quantity '" + q.name + "' is not finite");
      e.drift = std::max(e.drift, std::abs(v - e.initial));
    }
    e.threshold = tol * (1.0 + std::abs(e.initial));
    e.passed = e.drift <= e.threshold;
    report.passed = report.passed && e.passed;
    report.entries.push_back(std::move(e));
  }
  return report;
}

double divergence_residual(const StateField& field, const Vector& x, double fd_step) {
  if (!(fd_step > 0.0)) throw DomainError("fd_step must be positive");
  double div = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step * (1.0 + std::abs(x[i]));
    probe[i] = x[i] + h;
    const Vector up = field(probe);
    probe[i] = x[i] - h;
    const Vector down = field(probe);
    probe[i] = x[i];
    if (up.size() != x.size() || down.size() != x.size()) {
      throw DimensionError("field returned a vector of the wrong length");
    }
    div += (up[i] - down[i]) / (2.0 * h);
  }
  if (!std::isfinite(div)) throw EvaluationError("divergence is not finite");
  return div;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("failed to format number");
  return std::string(buf, ptr);
}

void write_csv(const Trajectory& trajectory, std::ostream& out) {
  trajectory.check();
  const Eigen::Index m = trajectory.dim();
  if (!trajectory.state_names.empty() &&
      static_cast<Eigen::Index>(trajectory.state_names.size()) != m) {
    throw DimensionError("state_names length != state dimension");
  }
  out << "t";
  for (Eigen::Index i = 0; i < m; ++i) {
    out << ',';
    if (trajectory.state_names.empty()) out << 'x' << i + 1;
    else out << trajectory.state_names[i];
  }
  for (const auto& label : trajectory.diagnostic_names) out << ',' << label;
  out << '\n';
  for (std::size_t s = 0; s < trajectory.size(); ++s) {
    out << format_double(trajectory.times[s]);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(trajectory.states[s][i]);
    for (const auto& column : trajectory.diagnostics) out << ',' << format_double(column[s]);
    out << '\n';
  }
}

void write_csv(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(trajectory, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Trajectory read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "t") throw DomainError("csv: first column must be 't'");

  Trajectory traj;
  std::vector<std::size_t> state_cols;
  std::vector<std::size_t> diag_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (is_diagnostic_label(header[c])) {
      diag_cols.push_back(c);
      traj.diagnostic_names.push_back(header[c]);
    } else {
      state_cols.push_back(c);
      traj.state_names.push_back(header[c]);
    }
  }
  if (state_cols.empty()) throw DomainError("csv: no state columns");
  traj.diagnostics.resize(diag_cols.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DomainError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns, found " +
                        std::to_string(cells.size()));
    }
    Vector x(static_cast<Eigen::Index>(state_cols.size()));
    for (std::size_t i = 0; i < state_cols.size(); ++i) {
      x[static_cast<Eigen::Index>(i)] = parse_double(cells[state_cols[i]], line_no);
    }
    traj.append(parse_double(cells[0], line_no), std::move(x));
    for (std::size_t d = 0; d < diag_cols.size(); ++d) {
      traj.diagnostics[d].push_back(parse_double(cells[diag_cols[d]], line_no));
    }
  }
  traj.check();
  return traj;
}

Trajectory read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

}  // namespace hyperham
