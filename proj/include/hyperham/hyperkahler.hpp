#pragma once

#include "hyperham/hamiltonian.hpp"
#include "hyperham/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace hyperham {

using MatrixFunction = std::function<Matrix(const Vector&)>;

/// A single coordinate chart carrying a metric g(x) and three complex
/// structures Y_a(x), evaluated pointwise. Providers must be pure.
class HyperkahlerChart {
 public:
  HyperkahlerChart(int dim, MatrixFunction metric, std::array<MatrixFunction, 3> structures);

  /// g = I, Y_a = K_a acting on each of n blocks of R^4.
  static HyperkahlerChart flat(int blocks = 1);
  /// Constant g and Y_a.
  static HyperkahlerChart constant(Matrix metric, std::array<Matrix, 3> structures);

  int dim() const { return dim_; }
  Matrix metric(const Vector& x) const;
  Matrix structure(int alpha, const Vector& x) const;

  /// Y'_a = Sum_b M_ab Y_b (M unchecked).
  HyperkahlerChart mixed(const Matrix3& m) const;

 private:
  Matrix checked(const Matrix& m, const char* what) const;

  int dim_;
  MatrixFunction metric_;
  std::array<MatrixFunction, 3> structures_;
};

/// Chart plus hamiltonian triple.
struct HyperhamiltonianSystem {
  HyperkahlerChart chart;
  HamiltonianTriple hamiltonians;
};

/// W_a = g Y_a. Throws DomainError if W_a is not antisymmetric within tol.
Matrix kahler_form_at(const HyperkahlerChart& chart, const Vector& x, int alpha,
                      double tol = kDefaultTolerance);

/// K_a = -g^{-1} Y_a^T, equal to (W_a^T)^{-1}. Throws SingularMatrixError
/// when the reciprocal condition estimate of g drops below 1e-12.
Matrix poisson_tensor_at(const HyperkahlerChart& chart, const Vector& x, int alpha);

struct StructureReport {
  double tolerance = 0.0;
  std::array<double, 3> complex_square{};  ///< |Y_a^2 + I|
  double quaternion_relation = 0.0;        ///< max_{a!=b} |Y_a Y_b - eps_abc Y_c|
  std::array<double, 3> kahler_antisymmetry{};  ///< |W_a + W_a^T|
  double poisson_relation = 0.0;  ///< max |K_a g K_b - eps_abc K_c + delta_ab g^{-1}|
  std::string error;              ///< non-empty if evaluation failed
  bool passed = false;

  double max_residual() const;
  std::string to_text() const;
};

StructureReport verify_structure_at(const HyperkahlerChart& chart, const Vector& x,
                                    double tol = kDefaultTolerance);

struct ClosednessReport {
  int alpha = 0;
  double fd_step = 0.0;
  double tolerance = 0.0;
  std::vector<double> point_residuals;  ///< max |(dW)_ijk| per point
  double max_residual = 0.0;
  std::array<int, 3> worst_indices{};  ///< 0-based (i, j, k), i < j < k
  bool passed = false;

  std::string to_text() const;
};

/// Estimates (dW)_ijk = d_i W_jk + d_j W_ki + d_k W_ij by central differences
/// with step fd_step * (1 + |x_i|) at every point.
ClosednessReport verify_closedness(const HyperkahlerChart& chart, const std::vector<Vector>& points,
                                   int alpha, double fd_step = 1e-5, double tol = 1e-8);

/// X_a = K_a grad h^a (no sum).
Vector component_field_at(const HyperhamiltonianSystem& system, const Vector& x, int alpha);

/// X = Sum_a X_a.
Vector hyperham_field_at(const HyperhamiltonianSystem& system, const Vector& x);

/// Rotates the structures and the hamiltonians by the same matrix M.
HyperhamiltonianSystem mixed_system(const HyperhamiltonianSystem& system, const Matrix3& m);

/// Max over points of |X'(x) - X(x)| for the system rotated by R.
/// Throws DomainError unless R is in SO(3).
double rotation_equivariance_residual(const HyperhamiltonianSystem& system, const Matrix3& r,
                                      const std::vector<Vector>& points,
                                      double tol = kDefaultTolerance);

}  // namespace hyperham
