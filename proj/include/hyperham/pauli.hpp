#pragma once

#include "hyperham/hamiltonian.hpp"
#include "hyperham/hyperkahler.hpp"
#include "hyperham/integrate.hpp"
#include "hyperham/types.hpp"

#include <string>
#include <vector>

namespace hyperham {

/// Magnetic field B(t) in units where the coupling constant is 1.
class MagneticField {
 public:
  enum class Kind { constant, rotating, tabulated };

  static MagneticField constant(const Vector3& b);
  /// B(t) = (b cos(rate t), b sin(rate t), bz).
  static MagneticField rotating(double b, double rate, double bz);
  /// Piecewise-linear through (times[i], values[i]); clamped outside the table.
  static MagneticField tabulated(std::vector<double> times, std::vector<Vector3> values);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  /// True when [t0, t1] lies inside the table domain (always true for
  /// analytic kinds).
  bool covers(double t0, double t1) const;

  /// Throws EvaluationError if the result is non-finite.
  Vector3 operator()(double t) const;

  // Parameters, for reporting.
  const Vector3& constant_value() const { return constant_; }
  double transverse() const { return transverse_; }
  double rate() const { return rate_; }
  double axial() const { return axial_; }
  const std::vector<double>& table_times() const { return times_; }
  const std::vector<Vector3>& table_values() const { return values_; }

 private:
  Kind kind_ = Kind::constant;
  Vector3 constant_ = Vector3::Zero();
  double transverse_ = 0.0;
  double rate_ = 0.0;
  double axial_ = 0.0;
  std::vector<double> times_;
  std::vector<Vector3> values_;
};

/// Two-component spinor (psi_+, psi_-).
struct Spinor {
  Complex up{0.0, 0.0};
  Complex down{0.0, 0.0};

  /// Scales to unit norm; throws DomainError for the zero spinor.
  static Spinor normalized(Complex up, Complex down);
  double norm_squared() const { return std::norm(up) + std::norm(down); }
  Eigen::Vector2cd as_vector() const { return {up, down}; }
};

/// M = B . sigma.
Matrix2c pauli_operator(const Vector3& b);

/// Real form of i M on xi = (chi_+, zeta_+, chi_-, zeta_-):
/// A = B_y Khat_1 + B_x Khat_2 + B_z Khat_3.
Matrix4 pauli_generator(const Vector3& b);

/// h^1 = B_y |xi|^2 / 2, h^2 = B_x |xi|^2 / 2, h^3 = B_z |xi|^2 / 2.
HamiltonianTriple pauli_hamiltonians(const Vector3& b);

/// Flat chart on R^4 with Y_a = Khat_a.
HyperkahlerChart pauli_chart();

/// Chart and hamiltonians of the Pauli equation at a fixed field value.
HyperhamiltonianSystem pauli_system(const Vector3& b);

Vector4 spinor_to_r4(const Spinor& psi);
Spinor r4_to_spinor(const Vector4& xi);

/// n_a = psi^dagger sigma_a psi.
Vector3 bloch_vector(const Spinor& psi);
Vector3 bloch_vector(const Vector4& xi);

enum class PauliMethod { rk4, exact };

PauliMethod parse_pauli_method(const std::string& name);
std::string to_string(PauliMethod method);

struct SpinorTrajectory {
  std::vector<double> times;
  std::vector<Spinor> states;

  /// Real form with columns chi_p, zeta_p, chi_m, zeta_m.
  Trajectory to_r4() const;
};

/// dPsi/dt = i M(t) Psi. rk4 uses complex RK4 at step dt; exact uses
/// exp(i t M) = cos(|B| t) I + i sin(|B| t) M/|B| and requires a constant field.
SpinorTrajectory evolve_pauli_c2(const MagneticField& field, const Spinor& psi0, double t0,
                                 double t1, double dt, PauliMethod method = PauliMethod::rk4,
                                 std::size_t stride = 1);

/// dxi/dt = A(t) xi. exact uses cos/sin of |B| t and requires a constant field.
Trajectory evolve_pauli_r4(const MagneticField& field, const Vector4& xi0, double t0, double t1,
                           double dt, PauliMethod method = PauliMethod::rk4,
                           std::size_t stride = 1);

/// Column labels chi_p, zeta_p, chi_m, zeta_m.
std::vector<std::string> pauli_state_names();

/// Appends n_x, n_y, n_z columns.
void add_bloch_columns(Trajectory& trajectory);

/// Angular rate of the Bloch vector's component transverse to `axis`,
/// from a least-squares fit of its unwrapped azimuth against time.
double measure_precession_rate(const std::vector<double>& times,
                               const std::vector<Vector3>& bloch, const Vector3& axis);

}  // namespace hyperham
