#pragma once

#include "hyperham/types.hpp"

#include <array>
#include <functional>

namespace hyperham {

using ScalarFunction = std::function<double(const Vector&)>;
using GradientFunction = std::function<Vector(const Vector&)>;

/// Central-difference gradient with per-coordinate step rel_step * (1 + |x_i|).
Vector finite_difference_gradient(const ScalarFunction& f, const Vector& x,
                                  double rel_step = 1e-5);

/// A scalar function together with its gradient. When no analytic gradient
/// is supplied, central differences are used.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(ScalarFunction value, GradientFunction gradient = {});

  double value(const Vector& x) const;
  /// Throws EvaluationError on non-finite entries.
  Vector gradient(const Vector& x) const;
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  static ScalarField zero();
  /// h = 1/2 x^T Q x + b.x + c.
  static ScalarField quadratic(Matrix q, Vector b, double c);

 private:
  ScalarFunction value_;
  GradientFunction gradient_;
};

/// Ordered triple (h^1, h^2, h^3).
class HamiltonianTriple {
 public:
  HamiltonianTriple() : h_{ScalarField::zero(), ScalarField::zero(), ScalarField::zero()} {}
  explicit HamiltonianTriple(std::array<ScalarField, 3> h) : h_(std::move(h)) {}

  const ScalarField& operator[](int alpha) const { return h_.at(alpha); }
  double value(int alpha, const Vector& x) const { return h_.at(alpha).value(x); }
  Vector gradient(int alpha, const Vector& x) const { return h_.at(alpha).gradient(x); }

  /// h'^a = Sum_b M_ab h^b. M is not checked.
  HamiltonianTriple mixed(const Matrix3& m) const;

 private:
  std::array<ScalarField, 3> h_;
};

/// Function of the block radii rho_k = |xi_k|^2 and its partial
/// derivatives, lifted to R^{n m} with grad_xi_k h = 2 (dh/drho_k) xi_k.
ScalarField radial_scalar(int block_dim, std::function<double(const Vector& radii)> value,
                          std::function<Vector(const Vector& radii)> derivative);

/// Block radii rho_k of a flat vector split into blocks of size block_dim.
Vector block_radii(const Vector& x, int block_dim);

}  // namespace hyperham
