#include "hyperham/quaternion_core.hpp"

#include <cmath>
#include <sstream>

namespace hyperham {

bool is_rotation(const Matrix3& r, double tol) {
  if (!r.allFinite()) return false;
  const double orth = max_abs(Matrix3(r.transpose() * r - Matrix3::Identity()));
  return orth <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

void require_rotation(const Matrix3& r, double tol) {
  if (!is_rotation(r, tol)) {
    throw DomainError("matrix is not a rotation in SO(3) within tolerance");
  }
}

Matrix2 standard_symplectic_2d() {
  Matrix2 j;
  j << 0.0, -1.0,
       1.0, 0.0;
  return j;
}

GeneratorSet::GeneratorSet(int dim, std::vector<Matrix> generators)
    : dim_(dim), generators_(std::move(generators)) {
  if (dim <= 0) throw DimensionError("generator set dimension must be positive");
  for (std::size_t a = 0; a < generators_.size(); ++a) {
    const Matrix& k = generators_[a];
    if (k.rows() != dim || k.cols() != dim) {
      std::ostringstream msg;
      msg << "generator " << a + 1 << " is " << k.rows() << "x" << k.cols()
          << ", expected " << dim << "x" << dim;
      throw DimensionError(msg.str());
    }
  }
}

Matrix GeneratorSet::combine(const Eigen::Ref<const Vector>& coefficients) const {
  if (coefficients.size() != size()) {
    throw DimensionError("coefficient count does not match generator count");
  }
  Matrix out = Matrix::Zero(dim_, dim_);
  for (int a = 0; a < size(); ++a) out += coefficients[a] * generators_[a];
  return out;
}

GeneratorSet QuaternionTriple::as_generator_set() const {
  return GeneratorSet(4, {k[0], k[1], k[2]});
}

Matrix4 QuaternionTriple::combine(const Vector3& n) const {
  return n[0] * k[0] + n[1] * k[1] + n[2] * k[2];
}

TwoForm::TwoForm(Matrix coefficients) : w_(std::move(coefficients)) {
  if (w_.rows() != w_.cols()) throw DimensionError("two-form coefficients must be square");
}

std::string TwoForm::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < dim(); ++i) {
    for (int j = i + 1; j < dim(); ++j) {
      const double c = w_(i, j);
      if (c == 0.0) continue;
      if (!first) out << (c < 0 ? " - " : " + ");
      else if (c < 0) out << "-";
      if (std::abs(c) != 1.0) out << std::abs(c) << " ";
      out << "dx" << i + 1 << "^dx" << j + 1;
      first = false;
    }
  }
  return first ? "0" : out.str();
}

double ValidationReport::max_residual() const {
  double worst = 0.0;
  for (double r : antisymmetry) worst = std::max(worst, r);
  for (const auto& p : anticommutators) worst = std::max(worst, p.residual);
  return worst;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  out << "generator set: dim " << dim << ", " << antisymmetry.size() << " generators, tol "
      << tolerance << "\n";
  for (std::size_t a = 0; a < antisymmetry.size(); ++a) {
    out << "  antisymmetry K" << a + 1 << ": " << antisymmetry[a]
        << (antisymmetry[a] <= tolerance ? "  ok" : "  FAIL") << "\n";
  }
  for (const auto& p : anticommutators) {
    out << "  anticommutator {K" << p.alpha + 1 << ",K" << p.beta + 1 << "}: " << p.residual
        << (p.residual <= tolerance ? "  ok" : "  FAIL") << "\n";
  }
  if (!count_ok) out << "  generator count exceeds dim - 1  FAIL\n";
  out << "result: " << (valid ? "PASS" : "FAIL") << "\n";
  return out.str();
}

QuaternionTriple standard_quaternion_triple() {
  QuaternionTriple t;
  t.k[0] << 0, 1, 0, 0,
           -1, 0, 0, 0,
            0, 0, 0, 1,
            0, 0, -1, 0;
  t.k[1] << 0, 0, 0, 1,
            0, 0, 1, 0,
            0, -1, 0, 0,
           -1, 0, 0, 0;
  t.k[2] << 0, 0, 1, 0,
            0, 0, 0, -1,
           -1, 0, 0, 0,
            0, 1, 0, 0;
  return t;
}

CommutantTriple commutant_triple() {
  // Columns of the Pauli generator read off at B = (0,1,0), (1,0,0), (0,0,1).
  CommutantTriple t;
  t.k[0] << 0, 0, 1, 0,
            0, 0, 0, 1,
           -1, 0, 0, 0,
            0, -1, 0, 0;
  t.k[1] << 0, 0, 0, -1,
            0, 0, 1, 0,
            0, -1, 0, 0,
            1, 0, 0, 0;
  t.k[2] << 0, -1, 0, 0,
            1, 0, 0, 0,
            0, 0, 0, 1,
            0, 0, -1, 0;
  return t;
}

GeneratorSet builtin_generator_set(int dim) {
  switch (dim) {
    case 2:
      return GeneratorSet(2, {Matrix(standard_symplectic_2d())});
    case 4:
      return standard_quaternion_triple().as_generator_set();
    default:
      throw DomainError("no built-in generator set for dimension " + std::to_string(dim) +
                        " (built-ins exist for 2 and 4)");
  }
}

ValidationReport validate_generator_set(const GeneratorSet& set, double tol) {
  ValidationReport report;
  report.dim = set.dim();
  report.tolerance = tol;
  const int p = set.size();
  const Matrix identity = Matrix::Identity(set.dim(), set.dim());
  for (int a = 0; a < p; ++a) {
    report.antisymmetry.push_back(max_abs(Matrix(set[a].transpose() + set[a])));
  }
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      Matrix anti = set[a] * set[b] + set[b] * set[a];
      if (a == b) anti += 2.0 * identity;
      report.anticommutators.push_back({a, b, max_abs(anti)});
    }
  }
  report.count_ok = p <= set.dim() - 1;
  report.valid = report.count_ok && report.max_residual() <= tol;
  return report;
}

double quaternion_relation_residual(const QuaternionTriple& triple) {
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Matrix4 r = triple[a] * triple[b];
      for (int c = 0; c < 3; ++c) r -= levi_civita(a, b, c) * triple[c];
      if (a == b) r += Matrix4::Identity();
      worst = std::max(worst, max_abs(r));
    }
  }
  return worst;
}

TwoForm kahler_two_form(const Matrix& k, double tol) {
  if (k.rows() != k.cols()) throw DimensionError("two-form source matrix must be square");
  if (max_abs(Matrix(k.transpose() + k)) > tol) {
    throw DomainError("matrix is not antisymmetric; it does not define a two-form");
  }
  return TwoForm(k);
}

double wedge_square_coefficient(const TwoForm& form) {
  if (form.dim() != 4) throw DimensionError("wedge square coefficient requires a 4-dimensional form");
  const Matrix& w = form.coefficients();
  return 2.0 * (w(0, 1) * w(2, 3) - w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2));
}

QuaternionTriple rotate_triple(const Matrix3& r, const QuaternionTriple& triple, double tol) {
  require_rotation(r, tol);
  QuaternionTriple out;
  for (int a = 0; a < 3; ++a) {
    out.k[a] = r(a, 0) * triple[0] + r(a, 1) * triple[1] + r(a, 2) * triple[2];
  }
  return out;
}

Vector3 hopf_map(const Vector4& xi, const Matrix4& a, const QuaternionTriple& commutant,
                 double tol) {
  if (max_abs(Matrix4(a * a + Matrix4::Identity())) > tol) {
    throw DomainError("hopf_map: generator does not square to -I");
  }
  Vector3 mu;
  for (int alpha = 0; alpha < 3; ++alpha) {
    mu[alpha] = xi.dot(commutant[alpha] * (a * xi));
  }
  return mu;
}

Vector3 hopf_map(const Vector4& xi, const Matrix4& a, double tol) {
  static const CommutantTriple commutant = commutant_triple();
  return hopf_map(xi, a, commutant, tol);
}

}  // namespace hyperham
