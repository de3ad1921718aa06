#pragma once

#include "hyperham/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace hyperham {

/// The 2x2 symplectic unit J = [[0, -1], [1, 0]], i.e. multiplication by i
/// on z = p + i q.
///
/// With blocks ordered xi = (p, q), dxi/dt = omega * J * xi gives
/// dp/dt = -omega * q and dq/dt = omega * p. J^2 = -I and J^T = -J.
Matrix2 standard_symplectic_2d();

/// Ordered family of m x m real matrices meant to realize a Clifford
/// algebra: K^T = -K and {K_a, K_b} = -2 delta_ab I. Construction only
/// checks shapes; use validate_generator_set() for the algebra.
class GeneratorSet {
 public:
  GeneratorSet(int dim, std::vector<Matrix> generators);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(generators_.size()); }
  const Matrix& operator[](int alpha) const { return generators_.at(alpha); }
  const std::vector<Matrix>& generators() const { return generators_; }

  /// Sum_a c_a K_a.
  Matrix combine(const Eigen::Ref<const Vector>& coefficients) const;

 private:
  int dim_;
  std::vector<Matrix> generators_;
};

/// Three 4x4 matrices obeying K_a K_b = eps_abc K_c - delta_ab I.
struct QuaternionTriple {
  std::array<Matrix4, 3> k;

  const Matrix4& operator[](int alpha) const { return k.at(alpha); }
  GeneratorSet as_generator_set() const;
  /// Sum_a n_a K_a.
  Matrix4 combine(const Vector3& n) const;
};

/// The second su(2) factor of so(4): a quaternion triple commuting with
/// every matrix of the standard triple.
struct CommutantTriple : QuaternionTriple {};

/// Antisymmetric coefficient matrix W of omega = 1/2 W_ij dx^i ^ dx^j.
class TwoForm {
 public:
  explicit TwoForm(Matrix coefficients);

  int dim() const { return static_cast<int>(w_.rows()); }
  const Matrix& coefficients() const { return w_; }
  /// Coefficient of dx^i ^ dx^j (0-based, i < j) in the reduced sum.
  double term(int i, int j) const { return w_(i, j); }
  /// "dx1^dx2 + dx3^dx4" style rendering of the nonzero i<j terms.
  std::string to_string() const;

 private:
  Matrix w_;
};

struct PairResidual {
  int alpha = 0;
  int beta = 0;
  double residual = 0.0;
};

struct ValidationReport {
  int dim = 0;
  double tolerance = 0.0;
  /// max|K_a^T + K_a| per generator.
  std::vector<double> antisymmetry;
  /// max|{K_a, K_b} + 2 delta_ab I| for every a <= b.
  std::vector<PairResidual> anticommutators;
  /// p <= m - 1.
  bool count_ok = true;
  bool valid = false;

  double max_residual() const;
  std::string to_text() const;
};

/// The matrices K_1, K_2, K_3 acting on R^4 as quaternionic units.
QuaternionTriple standard_quaternion_triple();

/// Matrices Khat_1, Khat_2, Khat_3 such that the Pauli generator reads
/// B_y Khat_1 + B_x Khat_2 + B_z Khat_3.
CommutantTriple commutant_triple();

/// Built-in generator sets: {J} for m = 2, the standard triple for m = 4.
GeneratorSet builtin_generator_set(int dim);

ValidationReport validate_generator_set(const GeneratorSet& set,
                                        double tol = kDefaultTolerance);

/// Max over (a, b) of |K_a K_b - eps_abc K_c + delta_ab I|.
double quaternion_relation_residual(const QuaternionTriple& triple);

/// omega with W = K. Throws DomainError if K is not antisymmetric within tol.
TwoForm kahler_two_form(const Matrix& k, double tol = kDefaultTolerance);

/// c with omega ^ omega = c dx1^dx2^dx3^dx4 (twice the Pfaffian).
double wedge_square_coefficient(const TwoForm& form);

/// K'_a = Sum_b R_ab K_b. Throws DomainError unless R is in SO(3).
QuaternionTriple rotate_triple(const Matrix3& r, const QuaternionTriple& triple,
                               double tol = kDefaultTolerance);

/// Conserved quadratic map mu_a(xi) = xi^T (C_a A) xi, with C the
/// commutant triple. |mu(xi)| = |xi|^2 and mu is constant along exp(t A).
/// Throws DomainError if A^2 != -I within tol.
Vector3 hopf_map(const Vector4& xi, const Matrix4& a, double tol = kDefaultTolerance);

/// Same map with an explicit commuting triple (e.g. the standard triple
/// when A is built from the commutant).
Vector3 hopf_map(const Vector4& xi, const Matrix4& a, const QuaternionTriple& commutant,
                 double tol = kDefaultTolerance);

}  // namespace hyperham
