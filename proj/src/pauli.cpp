#include "hyperham/pauli.hpp"

#include "hyperham/quaternion_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hyperham {

MagneticField MagneticField::constant(const Vector3& b) {
  if (!b.allFinite()) throw DomainError("magnetic field must be finite");
  MagneticField f;
  f.kind_ = Kind::constant;
  f.constant_ = b;
  return f;
}

MagneticField MagneticField::rotating(double b, double rate, double bz) {
  if (!std::isfinite(b) || !std::isfinite(rate) || !std::isfinite(bz)) {
    throw DomainError("rotating field parameters must be finite");
  }
  MagneticField f;
  f.kind_ = Kind::rotating;
  f.transverse_ = b;
  f.rate_ = rate;
  f.axial_ = bz;
  return f;
}

MagneticField MagneticField::tabulated(std::vector<double> times, std::vector<Vector3> values) {
  if (times.empty() || times.size() != values.size()) {
    throw DimensionError("field table needs matching, non-empty times and values");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("field table times must increase strictly");
  }
  for (const auto& v : values) {
    if (!v.allFinite()) throw DomainError("field table values must be finite");
  }
  MagneticField f;
  f.kind_ = Kind::tabulated;
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

bool MagneticField::covers(double t0, double t1) const {
  if (kind_ != Kind::tabulated) return true;
  return t0 >= times_.front() && t1 <= times_.back();
}

Vector3 MagneticField::operator()(double t) const {
  Vector3 b;
  switch (kind_) {
    case Kind::constant:
      b = constant_;
      break;
    case Kind::rotating:
      b = {transverse_ * std::cos(rate_ * t), transverse_ * std::sin(rate_ * t), axial_};
      break;
    case Kind::tabulated: {
      if (t <= times_.front()) {
        b = values_.front();
      } else if (t >= times_.back()) {
        b = values_.back();
      } else {
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
        const std::size_t lo = hi - 1;
        const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
        b = (1.0 - s) * values_[lo] + s * values_[hi];
      }
      break;
    }
  }
  if (!b.allFinite()) throw EvaluationError("magnetic field is not finite");
  return b;
}

Spinor Spinor::normalized(Complex up, Complex down) {
  const double n = std::sqrt(std::norm(up) + std::norm(down));
  if (!(n > 0.0)) throw DomainError("cannot normalize the zero spinor");
  return {up / n, down / n};
}

Matrix2c pauli_operator(const Vector3& b) {
  const Complex i(0.0, 1.0);
  Matrix2c m;
  m << b.z(), b.x() - i * b.y(),
       b.x() + i * b.y(), -b.z();
  return m;
}

Matrix4 pauli_generator(const Vector3& b) {
  const double bx = b.x(), by = b.y(), bz = b.z();
  Matrix4 a;
  a << 0.0, -bz, by, -bx,
       bz, 0.0, bx, by,
       -by, -bx, 0.0, bz,
       bx, -by, -bz, 0.0;
  return a;
}

HamiltonianTriple pauli_hamiltonians(const Vector3& b) {
  // Coefficient order follows the generator: (B_y, B_x, B_z).
  const Vector3 coeff(b.y(), b.x(), b.z());
  std::array<ScalarField, 3> h;
  for (int a = 0; a < 3; ++a) {
    const double c = coeff[a];
    h[a] = ScalarField([c](const Vector& x) { return 0.5 * c * x.squaredNorm(); },
                       [c](const Vector& x) { return Vector(c * x); });
  }
  return HamiltonianTriple(std::move(h));
}

HyperkahlerChart pauli_chart() {
  const CommutantTriple k = commutant_triple();
  return HyperkahlerChart::constant(Matrix::Identity(4, 4), {k[0], k[1], k[2]});
}

HyperhamiltonianSystem pauli_system(const Vector3& b) {
  return {pauli_chart(), pauli_hamiltonians(b)};
}

Vector4 spinor_to_r4(const Spinor& psi) {
  return {psi.up.real(), psi.up.imag(), psi.down.real(), psi.down.imag()};
}

Spinor r4_to_spinor(const Vector4& xi) {
  return {Complex(xi[0], xi[1]), Complex(xi[2], xi[3])};
}

Vector3 bloch_vector(const Spinor& psi) {
  const Complex cross = std::conj(psi.up) * psi.down;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(psi.up) - std::norm(psi.down)};
}

Vector3 bloch_vector(const Vector4& xi) { return bloch_vector(r4_to_spinor(xi)); }

PauliMethod parse_pauli_method(const std::string& name) {
  if (name == "rk4") return PauliMethod::rk4;
  if (name == "exact") return PauliMethod::exact;
  throw DomainError("unknown integrator '" + name + "' (expected rk4 or exact)");
}

std::string to_string(PauliMethod method) {
  return method == PauliMethod::rk4 ? "rk4" : "exact";
}

std::vector<std::string> pauli_state_names() { return {"chi_p", "zeta_p", "chi_m", "zeta_m"}; }

Trajectory SpinorTrajectory::to_r4() const {
  Trajectory traj;
  traj.state_names = pauli_state_names();
  for (std::size_t i = 0; i < times.size(); ++i) traj.append(times[i], spinor_to_r4(states[i]));
  return traj;
}

namespace {

void check_grid(double t0, double t1, double dt, std::size_t stride) {
  if (!(dt > 0.0)) throw DomainError("pauli evolution: dt must be positive");
  if (!(t1 > t0)) throw DomainError("pauli evolution: t1 must exceed t0");
  if (stride == 0) throw DomainError("pauli evolution: stride must be at least 1");
}

}  // namespace

SpinorTrajectory evolve_pauli_c2(const MagneticField& field, const Spinor& psi0, double t0,
                                 double t1, double dt, PauliMethod method, std::size_t stride) {
  check_grid(t0, t1, dt, stride);
  SpinorTrajectory out;
  const Complex i(0.0, 1.0);
  if (method == PauliMethod::exact) {
    if (!field.is_constant()) throw DomainError("exact Pauli evolution requires a constant field");
    const Vector3 b = field(t0);
    const double w = b.norm();
    const Matrix2c m = pauli_operator(b);
    const Eigen::Vector2cd v0 = psi0.as_vector();
    for (double t : strided_sample_times(t0, t1, dt, stride)) {
      Eigen::Vector2cd v = v0;
      if (w > 0.0) {
        const double phase = w * (t - t0);
        v = std::cos(phase) * v0 + (i * std::sin(phase) / w) * (m * v0);
      }
      out.times.push_back(t);
      out.states.push_back({v[0], v[1]});
    }
    return out;
  }

  const std::vector<double> grid = sample_times(t0, t1, dt);
  auto rhs = [&](double t, const Eigen::Vector2cd& v) -> Eigen::Vector2cd {
    return i * (pauli_operator(field(t)) * v);
  };
  Eigen::Vector2cd v = psi0.as_vector();
  out.times.push_back(t0);
  out.states.push_back(psi0);
  const std::size_t steps = grid.size() - 1;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = grid[s];
    const double h = grid[s + 1] - t;
    const Eigen::Vector2cd k1 = rhs(t, v);
    const Eigen::Vector2cd k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
    const Eigen::Vector2cd k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
    const Eigen::Vector2cd k4 = rhs(t + h, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((s + 1) % stride == 0 || s + 1 == steps) {
      out.times.push_back(grid[s + 1]);
      out.states.push_back({v[0], v[1]});
    }
  }
  return out;
}

Trajectory evolve_pauli_r4(const MagneticField& field, const Vector4& xi0, double t0, double t1,
                           double dt, PauliMethod method, std::size_t stride) {
  check_grid(t0, t1, dt, stride);
  Trajectory traj;
  if (method == PauliMethod::exact) {
    if (!field.is_constant()) throw DomainError("exact Pauli evolution requires a constant field");
    const Vector3 b = field(t0);
    const double w = b.norm();
    const Matrix4 a = pauli_generator(b);
    for (double t : strided_sample_times(t0, t1, dt, stride)) {
      Vector4 xi = xi0;
      if (w > 0.0) {
        const double phase = w * (t - t0);
        xi = std::cos(phase) * xi0 + (std::sin(phase) / w) * (a * xi0);
      }
      traj.append(t, xi);
    }
  } else {
    Field rhs = [&field](double t, const Vector& x) {
      return Vector(pauli_generator(field(t)) * x);
    };
    traj = integrate_rk4(rhs, xi0, t0, t1, dt, stride);
  }
  traj.state_names = pauli_state_names();
  return traj;
}

void add_bloch_columns(Trajectory& trajectory) {
  if (trajectory.dim() != 4) throw DimensionError("Bloch columns need a 4-dimensional trajectory");
  std::array<std::vector<double>, 3> cols;
  for (const Vector& x : trajectory.states) {
    const Vector3 n = bloch_vector(Vector4(x));
    for (int a = 0; a < 3; ++a) cols[a].push_back(n[a]);
  }
  trajectory.add_column("n_x", std::move(cols[0]));
  trajectory.add_column("n_y", std::move(cols[1]));
  trajectory.add_column("n_z", std::move(cols[2]));
}

double measure_precession_rate(const std::vector<double>& times,
                               const std::vector<Vector3>& bloch, const Vector3& axis) {
  if (times.size() != bloch.size() || times.size() < 3) {
    throw DomainError("precession fit needs at least three matching samples");
  }
  const double len = axis.norm();
  if (!(len > 0.0)) throw DomainError("precession axis must be nonzero");
  const Vector3 u = axis / len;
  Vector3 e1 = u.unitOrthogonal();
  const Vector3 e2 = u.cross(e1);

  std::vector<double> angle(times.size());
  double prev = 0.0;
  double offset = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vector3 perp = bloch[i] - u.dot(bloch[i]) * u;
    if (perp.norm() < 1e-12) throw DomainError("Bloch vector is aligned with the axis; no precession");
    const double raw = std::atan2(e2.dot(perp), e1.dot(perp));
    if (i > 0) {
      double jump = raw + offset - prev;
      while (jump > std::numbers::pi) {
        offset -= 2.0 * std::numbers::pi;
        jump -= 2.0 * std::numbers::pi;
      }
      while (jump < -std::numbers::pi) {
        offset += 2.0 * std::numbers::pi;
        jump += 2.0 * std::numbers::pi;
      }
    }
    angle[i] = raw + offset;
    prev = angle[i];
  }
  // Least-squares slope of angle against time.
  const double n = static_cast<double>(times.size());
  double mt = 0.0, ma = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    mt += times[i];
    ma += angle[i];
  }
  mt /= n;
  ma /= n;
  double stt = 0.0, sta = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    stt += (times[i] - mt) * (times[i] - mt);
    sta += (times[i] - mt) * (angle[i] - ma);
  }
  return std::abs(sta / stt);
}

}  // namespace hyperham
