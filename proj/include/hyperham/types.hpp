#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace hyperham {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Matrix2 = Eigen::Matrix2d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;

/// Default tolerance for checks on constant matrices.
inline constexpr double kDefaultTolerance = 1e-10;

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A user-supplied provider returned a non-finite value or failed.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A linear solve hit a (numerically) singular matrix.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Max absolute entry; the norm used for every residual in the library.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

/// Levi-Civita symbol on indices 0..2.
constexpr int levi_civita(int a, int b, int c) {
  return (a - b) * (b - c) * (c - a) / 2;
}

/// Checks that `r` is a rotation (orthogonal, det +1) to within `tol`.
bool is_rotation(const Matrix3& r, double tol = kDefaultTolerance);

/// Throws DomainError unless `r` is a rotation.
void require_rotation(const Matrix3& r, double tol = kDefaultTolerance);

}  // namespace hyperham
