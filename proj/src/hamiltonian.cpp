#include "hyperham/hamiltonian.hpp"

#include <cmath>

namespace hyperham {

Vector finite_difference_gradient(const ScalarFunction& f, const Vector& x, double rel_step) {
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

ScalarField::ScalarField(ScalarFunction value, GradientFunction gradient)
    : value_(std::move(value)), gradient_(std::move(gradient)) {
  if (!value_) throw DomainError("scalar field requires a value function");
}

double ScalarField::value(const Vector& x) const {
  if (!value_) return 0.0;
  const double v = value_(x);
  if (!std::isfinite(v)) throw EvaluationError("hamiltonian value is not finite");
  return v;
}

Vector ScalarField::gradient(const Vector& x) const {
  Vector g;
  if (gradient_) {
    g = gradient_(x);
  } else if (value_) {
    g = finite_difference_gradient(value_, x);
  } else {
    g = Vector::Zero(x.size());
  }
  if (g.size() != x.size()) throw DimensionError("gradient provider returned wrong length");
  if (!g.allFinite()) throw EvaluationError("gradient provider returned non-finite values");
  return g;
}

ScalarField ScalarField::zero() {
  return ScalarField([](const Vector&) { return 0.0; },
                     [](const Vector& x) { return Vector(Vector::Zero(x.size())); });
}

ScalarField ScalarField::quadratic(Matrix q, Vector b, double c) {
  if (q.rows() != q.cols() || b.size() != q.rows()) {
    throw DimensionError("quadratic hamiltonian: Q must be square and match b");
  }
  Matrix sym = 0.5 * (q + q.transpose());
  auto value = [sym, b, c](const Vector& x) {
    if (x.size() != b.size()) throw DimensionError("quadratic hamiltonian: state length mismatch");
    return 0.5 * x.dot(sym * x) + b.dot(x) + c;
  };
  auto gradient = [sym, b](const Vector& x) {
    if (x.size() != b.size()) throw DimensionError("quadratic hamiltonian: state length mismatch");
    return Vector(sym * x + b);
  };
  return ScalarField(value, gradient);
}

HamiltonianTriple HamiltonianTriple::mixed(const Matrix3& m) const {
  std::array<ScalarField, 3> out;
  for (int a = 0; a < 3; ++a) {
    const Vector3 row = m.row(a).transpose();
    const auto h = h_;
    out[a] = ScalarField(
        [h, row](const Vector& x) {
          double v = 0.0;
          for (int b = 0; b < 3; ++b) {
            if (row[b] != 0.0) v += row[b] * h[b].value(x);
          }
          return v;
        },
        [h, row](const Vector& x) {
          Vector g = Vector::Zero(x.size());
          for (int b = 0; b < 3; ++b) {
            if (row[b] != 0.0) g += row[b] * h[b].gradient(x);
          }
          return g;
        });
  }
  return HamiltonianTriple(std::move(out));
}

Vector block_radii(const Vector& x, int block_dim) {
  if (block_dim <= 0 || x.size() % block_dim != 0) {
    throw DimensionError("state length is not a multiple of the block dimension");
  }
  const Eigen::Index n = x.size() / block_dim;
  Vector radii(n);
  for (Eigen::Index k = 0; k < n; ++k) radii[k] = x.segment(k * block_dim, block_dim).squaredNorm();
  return radii;
}

ScalarField radial_scalar(int block_dim, std::function<double(const Vector&)> value,
                          std::function<Vector(const Vector&)> derivative) {
  auto v = [block_dim, value](const Vector& x) { return value(block_radii(x, block_dim)); };
  auto g = [block_dim, derivative](const Vector& x) {
    const Vector radii = block_radii(x, block_dim);
    const Vector d = derivative(radii);
    if (d.size() != radii.size()) throw DimensionError("radial derivative has wrong length");
    Vector grad(x.size());
    for (Eigen::Index k = 0; k < radii.size(); ++k) {
      grad.segment(k * block_dim, block_dim) = 2.0 * d[k] * x.segment(k * block_dim, block_dim);
    }
    return grad;
  };
  return ScalarField(v, g);
}

}  // namespace hyperham
