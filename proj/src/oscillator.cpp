#include "hyperham/oscillator.hpp"

#include <cmath>

namespace hyperham {

BlockState::BlockState(int blocks, int block_dim, Vector data)
    : blocks_(blocks), block_dim_(block_dim), data_(std::move(data)) {
  if (blocks <= 0 || block_dim <= 0) throw DimensionError("block counts must be positive");
  if (data_.size() != static_cast<Eigen::Index>(blocks) * block_dim) {
    throw DimensionError("state length " + std::to_string(data_.size()) + " != " +
                         std::to_string(blocks) + " blocks x " + std::to_string(block_dim));
  }
}

BlockState::BlockState(int block_dim, const Vector& data)
    : BlockState(block_dim > 0 ? static_cast<int>(data.size() / block_dim) : 0, block_dim, data) {}

CliffordOscillator::CliffordOscillator(GeneratorSet generators, int blocks,
                                       CoefficientFunction nu, double tol)
    : generators_(std::move(generators)), blocks_(blocks), nu_(std::move(nu)) {
  if (blocks_ <= 0) throw DimensionError("oscillator needs at least one block");
  if (!nu_) throw DomainError("oscillator needs a coefficient provider");
  const ValidationReport report = validate_generator_set(generators_, tol);
  if (!report.valid) {
    throw DomainError("generator set is not a valid Clifford set:\n" + report.to_text());
  }
}

CliffordOscillator CliffordOscillator::constant(GeneratorSet generators, const Matrix& nu) {
  const int blocks = static_cast<int>(nu.rows());
  if (nu.cols() != generators.size()) {
    throw DimensionError("coefficient matrix must have one column per generator");
  }
  return CliffordOscillator(std::move(generators), blocks, [nu](const Vector&) { return nu; });
}

CliffordOscillator CliffordOscillator::affine(GeneratorSet generators, const Matrix& offset,
                                              std::vector<Matrix> slopes) {
  const Eigen::Index n = offset.rows();
  const Eigen::Index p = generators.size();
  if (offset.cols() != p) throw DimensionError("coefficient offset must be n x p");
  if (static_cast<Eigen::Index>(slopes.size()) != n) {
    throw DimensionError("affine coefficients need one slope matrix per block");
  }
  for (const Matrix& s : slopes) {
    if (s.rows() != p || s.cols() != n) throw DimensionError("slope matrices must be p x n");
  }
  auto nu = [offset, slopes](const Vector& radii) {
    Matrix out = offset;
    for (Eigen::Index k = 0; k < out.rows(); ++k) {
      out.row(k) += (slopes[k] * radii).transpose();
    }
    return out;
  };
  return CliffordOscillator(std::move(generators), static_cast<int>(n), nu);
}

Matrix CliffordOscillator::coefficients(const Vector& radii) const {
  Matrix nu = nu_(radii);
  if (nu.rows() != blocks_ || nu.cols() != generators_.size()) {
    throw DimensionError("coefficient provider returned the wrong shape");
  }
  if (!nu.allFinite()) throw EvaluationError("coefficient provider returned non-finite values");
  return nu;
}

FrequencyDecomposition frequency_decomposition(const Vector& nu_row, const GeneratorSet& set) {
  if (nu_row.size() != set.size()) throw DimensionError("coefficient row length != generator count");
  if (!nu_row.allFinite()) throw DomainError("coefficients must be finite");
  FrequencyDecomposition d;
  d.omega = nu_row.norm();
  if (d.omega == 0.0) {
    d.generator = Matrix::Zero(set.dim(), set.dim());
    d.degenerate = true;
    return d;
  }
  d.generator = set.combine(nu_row / d.omega);
  return d;
}

BlockFlow::BlockFlow(const CliffordOscillator& system, BlockState initial)
    : initial_(std::move(initial)) {
  if (initial_.block_dim() != system.block_dim() || initial_.blocks() != system.blocks()) {
    throw DimensionError("initial state does not match the oscillator's block layout");
  }
  const Matrix nu = system.coefficients(initial_.radii());
  decomps_.reserve(system.blocks());
  for (int k = 0; k < system.blocks(); ++k) {
    decomps_.push_back(frequency_decomposition(nu.row(k).transpose(), system.generators()));
  }
}

BlockState BlockFlow::state_at(double t) const {
  BlockState out = initial_;
  for (int k = 0; k < out.blocks(); ++k) {
    const FrequencyDecomposition& d = decomps_[k];
    if (d.degenerate) continue;
    const Vector xi0 = initial_.block(k);
    const double phase = d.omega * t;
    out.block(k) = std::cos(phase) * xi0 + std::sin(phase) * (d.generator * xi0);
  }
  return out;
}

BlockState exact_flow(const CliffordOscillator& system, const BlockState& initial, double t) {
  return BlockFlow(system, initial).state_at(t);
}

Vector oscillator_field(const CliffordOscillator& system, const BlockState& state) {
  if (state.block_dim() != system.block_dim() || state.blocks() != system.blocks()) {
    throw DimensionError("state does not match the oscillator's block layout");
  }
  const Matrix nu = system.coefficients(state.radii());
  Vector out(state.data().size());
  for (int k = 0; k < state.blocks(); ++k) {
    const Matrix gen = system.generators().combine(nu.row(k).transpose());
    out.segment(k * state.block_dim(), state.block_dim()) = gen * state.block(k);
  }
  return out;
}

Vector gradient_form_field(const GeneratorSet& set, const HamiltonianTriple& h,
                           const BlockState& state) {
  if (set.size() != 3) throw DimensionError("gradient form needs exactly three generators");
  if (state.block_dim() != set.dim()) throw DimensionError("block dimension != generator dimension");
  Vector out = Vector::Zero(state.data().size());
  const int m = state.block_dim();
  for (int a = 0; a < 3; ++a) {
    const Vector grad = h.gradient(a, state.data());
    for (int k = 0; k < state.blocks(); ++k) {
      out.segment(k * m, m) += set[a] * grad.segment(k * m, m);
    }
  }
  return out;
}

double great_circle_residual(const std::vector<Vector>& samples, const Matrix& generator) {
  if (samples.empty()) throw DomainError("great circle residual needs at least one sample");
  const Vector& x0 = samples.front();
  if (generator.rows() != x0.size() || generator.cols() != x0.size()) {
    throw DimensionError("generator does not match sample dimension");
  }
  const double r0 = x0.norm();
  const Vector ax0 = generator * x0;
  if (r0 == 0.0 || ax0.norm() <= 1e-14 * r0) {
    throw DomainError("great circle plane is degenerate (zero state or zero frequency)");
  }
  // Gram-Schmidt; A antisymmetric makes A xi(0) orthogonal to xi(0) already.
  const Vector e1 = x0 / r0;
  Vector e2 = ax0 - e1.dot(ax0) * e1;
  e2.normalize();
  double worst = 0.0;
  for (const Vector& x : samples) {
    if (x.size() != x0.size()) throw DimensionError("samples have inconsistent dimension");
    const Vector off = x - e1.dot(x) * e1 - e2.dot(x) * e2;
    worst = std::max(worst, off.norm());
  }
  return worst;
}

}  // namespace hyperham
