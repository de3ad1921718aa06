#include "hyperham/hyperkahler.hpp"

#include "hyperham/quaternion_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hyperham {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

Matrix block_diagonal(const Matrix4& block, int blocks) {
  Matrix out = Matrix::Zero(4 * blocks, 4 * blocks);
  for (int k = 0; k < blocks; ++k) out.block<4, 4>(4 * k, 4 * k) = block;
  return out;
}

Eigen::PartialPivLU<Matrix> factor_metric(const Matrix& g) {
  Eigen::PartialPivLU<Matrix> lu(g);
  const double rcond = lu.rcond();
  if (!(rcond >= kMinReciprocalCondition)) {
    throw SingularMatrixError("metric is singular (reciprocal condition " + std::to_string(rcond) +
                              ")");
  }
  return lu;
}

}  // namespace

HyperkahlerChart::HyperkahlerChart(int dim, MatrixFunction metric,
                                   std::array<MatrixFunction, 3> structures)
    : dim_(dim), metric_(std::move(metric)), structures_(std::move(structures)) {
  if (dim <= 0 || dim % 4 != 0) throw DimensionError("chart dimension must be a positive multiple of 4");
  if (!metric_) throw DomainError("chart needs a metric provider");
  for (const auto& y : structures_) {
    if (!y) throw DomainError("chart needs three complex-structure providers");
  }
}

HyperkahlerChart HyperkahlerChart::flat(int blocks) {
  if (blocks <= 0) throw DimensionError("flat chart needs at least one block");
  const QuaternionTriple t = standard_quaternion_triple();
  return constant(Matrix::Identity(4 * blocks, 4 * blocks),
                  {block_diagonal(t[0], blocks), block_diagonal(t[1], blocks),
                   block_diagonal(t[2], blocks)});
}

HyperkahlerChart HyperkahlerChart::constant(Matrix metric, std::array<Matrix, 3> structures) {
  const int dim = static_cast<int>(metric.rows());
  if (metric.cols() != dim) throw DimensionError("metric must be square");
  for (const Matrix& y : structures) {
    if (y.rows() != dim || y.cols() != dim) throw DimensionError("structure shape != metric shape");
  }
  return HyperkahlerChart(dim, [metric](const Vector&) { return metric; },
                          {[y = structures[0]](const Vector&) { return y; },
                           [y = structures[1]](const Vector&) { return y; },
                           [y = structures[2]](const Vector&) { return y; }});
}

Matrix HyperkahlerChart::checked(const Matrix& m, const char* what) const {
  if (m.rows() != dim_ || m.cols() != dim_) {
    throw DimensionError(std::string(what) + " provider returned the wrong shape");
  }
  if (!m.allFinite()) throw EvaluationError(std::string(what) + " provider returned non-finite values");
  return m;
}

Matrix HyperkahlerChart::metric(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("point dimension != chart dimension");
  return checked(metric_(x), "metric");
}

Matrix HyperkahlerChart::structure(int alpha, const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("point dimension != chart dimension");
  return checked(structures_.at(alpha)(x), "complex structure");
}

HyperkahlerChart HyperkahlerChart::mixed(const Matrix3& m) const {
  std::array<MatrixFunction, 3> ys;
  for (int a = 0; a < 3; ++a) {
    ys[a] = [ys0 = structures_, row = Vector3(m.row(a).transpose())](const Vector& x) {
      Matrix out = row[0] * ys0[0](x);
      out += row[1] * ys0[1](x);
      out += row[2] * ys0[2](x);
      return out;
    };
  }
  return HyperkahlerChart(dim_, metric_, std::move(ys));
}

Matrix kahler_form_at(const HyperkahlerChart& chart, const Vector& x, int alpha, double tol) {
  Matrix w = chart.metric(x) * chart.structure(alpha, x);
  if (max_abs(Matrix(w + w.transpose())) > tol) {
    throw DomainError("Kahler form g*Y" + std::to_string(alpha + 1) +
                      " is not antisymmetric: metric and complex structure are incompatible");
  }
  return w;
}

Matrix poisson_tensor_at(const HyperkahlerChart& chart, const Vector& x, int alpha) {
  const auto lu = factor_metric(chart.metric(x));
  return -lu.solve(chart.structure(alpha, x).transpose());
}

double StructureReport::max_residual() const {
  double worst = std::max(quaternion_relation, poisson_relation);
  for (double v : complex_square) worst = std::max(worst, v);
  for (double v : kahler_antisymmetry) worst = std::max(worst, v);
  return worst;
}

std::string StructureReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  auto mark = [this](double v) { return v <= tolerance ? "  ok" : "  FAIL"; };
  out << "hyperkahler structure check, tol " << tolerance << "\n";
  for (int a = 0; a < 3; ++a) {
    out << "  Y" << a + 1 << "^2 + I: " << complex_square[a] << mark(complex_square[a]) << "\n";
  }
  out << "  quaternion relation Y_a Y_b - eps Y_c: " << quaternion_relation
      << mark(quaternion_relation) << "\n";
  for (int a = 0; a < 3; ++a) {
    out << "  Kahler form W" << a + 1 << " antisymmetry: " << kahler_antisymmetry[a]
        << mark(kahler_antisymmetry[a]) << "\n";
  }
  out << "  Poisson relation K_a g K_b: " << poisson_relation << mark(poisson_relation) << "\n";
  if (!error.empty()) out << "  error: " << error << "\n";
  out << "result: " << (passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

StructureReport verify_structure_at(const HyperkahlerChart& chart, const Vector& x, double tol) {
  StructureReport report;
  report.tolerance = tol;
  constexpr double inf = std::numeric_limits<double>::infinity();
  try {
    const Matrix g = chart.metric(x);
    const Eigen::Index n = g.rows();
    const Matrix identity = Matrix::Identity(n, n);
    std::array<Matrix, 3> y;
    for (int a = 0; a < 3; ++a) y[a] = chart.structure(a, x);

    for (int a = 0; a < 3; ++a) {
      report.complex_square[a] = max_abs(Matrix(y[a] * y[a] + identity));
      const Matrix w = g * y[a];
      report.kahler_antisymmetry[a] = max_abs(Matrix(w + w.transpose()));
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        Matrix r = y[a] * y[b];
        for (int c = 0; c < 3; ++c) r -= levi_civita(a, b, c) * y[c];
        report.quaternion_relation = std::max(report.quaternion_relation, max_abs(r));
      }
    }

    report.poisson_relation = inf;
    const auto lu = factor_metric(g);
    const Matrix eta = lu.inverse();
    std::array<Matrix, 3> k;
    for (int a = 0; a < 3; ++a) k[a] = -lu.solve(y[a].transpose());
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        Matrix r = k[a] * g * k[b];
        for (int c = 0; c < 3; ++c) r -= levi_civita(a, b, c) * k[c];
        if (a == b) r += eta;
        worst = std::max(worst, max_abs(r));
      }
    }
    report.poisson_relation = worst;
  } catch (const Error& e) {
    report.error = e.what();
  }
  const double worst = report.max_residual();
  report.passed = report.error.empty() && std::isfinite(worst) && worst <= tol;
  return report;
}

std::string ClosednessReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  out << "closedness of omega" << alpha + 1 << " at " << point_residuals.size()
      << " point(s), fd_step " << fd_step << ", tol " << tolerance << "\n";
  out << "  max |dW_ijk|: " << max_residual;
  if (max_residual > 0.0) {
    out << " at (" << worst_indices[0] + 1 << "," << worst_indices[1] + 1 << "," << worst_indices[2] + 1 << ")";
  }
  out << "\n";
  out << "result: " << (passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

ClosednessReport verify_closedness(const HyperkahlerChart& chart, const std::vector<Vector>& points,
                                   int alpha, double fd_step, double tol) {
  if (!(fd_step > 0.0)) throw DomainError("fd_step must be positive");
  if (alpha < 0 || alpha > 2) throw DomainError("alpha must be 0, 1 or 2");
  ClosednessReport report;
  report.alpha = alpha;
  report.fd_step = fd_step;
  report.tolerance = tol;
  const int n = chart.dim();
  auto w_at = [&](const Vector& p) { return Matrix(chart.metric(p) * chart.structure(alpha, p)); };

  for (const Vector& x : points) {
    if (x.size() != n) throw DimensionError("closedness point has wrong dimension");
    // dw[i] = d_i W at x.
    std::vector<Matrix> dw(n);
    Vector probe = x;
    for (int i = 0; i < n; ++i) {
      const double h = fd_step * (1.0 + std::abs(x[i]));
      probe[i] = x[i] + h;
      const Matrix up = w_at(probe);
      probe[i] = x[i] - h;
      const Matrix down = w_at(probe);
      probe[i] = x[i];
      dw[i] = (up - down) / (2.0 * h);
    }
    double point_worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          const double v = std::abs(dw[i](j, k) + dw[j](k, i) + dw[k](i, j));
          if (v > point_worst) point_worst = v;
          if (v > report.max_residual) {
            report.max_residual = v;
            report.worst_indices = {i, j, k};
          }
        }
      }
    }
    report.point_residuals.push_back(point_worst);
  }
  report.passed = report.max_residual <= tol;
  return report;
}

Vector component_field_at(const HyperhamiltonianSystem& system, const Vector& x, int alpha) {
  return poisson_tensor_at(system.chart, x, alpha) * system.hamiltonians.gradient(alpha, x);
}

Vector hyperham_field_at(const HyperhamiltonianSystem& system, const Vector& x) {
  const auto lu = factor_metric(system.chart.metric(x));
  Vector out = Vector::Zero(x.size());
  for (int a = 0; a < 3; ++a) {
    const Vector grad = system.hamiltonians.gradient(a, x);
    // K_a grad = -g^{-1} Y_a^T grad.
    out -= lu.solve(system.chart.structure(a, x).transpose() * grad);
  }
  return out;
}

HyperhamiltonianSystem mixed_system(const HyperhamiltonianSystem& system, const Matrix3& m) {
  return {system.chart.mixed(m), system.hamiltonians.mixed(m)};
}

double rotation_equivariance_residual(const HyperhamiltonianSystem& system, const Matrix3& r,
                                      const std::vector<Vector>& points, double tol) {
  require_rotation(r, tol);
  const HyperhamiltonianSystem rotated = mixed_system(system, r);
  double worst = 0.0;
  for (const Vector& x : points) {
    worst = std::max(worst, (hyperham_field_at(rotated, x) - hyperham_field_at(system, x)).norm());
  }
  return worst;
}

}  // namespace hyperham
