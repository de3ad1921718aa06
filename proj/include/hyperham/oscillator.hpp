#pragma once

#include "hyperham/hamiltonian.hpp"
#include "hyperham/quaternion_core.hpp"
#include "hyperham/types.hpp"

#include <functional>
#include <vector>

namespace hyperham {

/// A point of R^{n m} viewed as n blocks xi_k in R^m.
class BlockState {
 public:
  BlockState(int blocks, int block_dim, Vector data);
  /// Block count inferred from the data length.
  BlockState(int block_dim, const Vector& data);

  int blocks() const { return blocks_; }
  int block_dim() const { return block_dim_; }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  auto block(int k) const { return data_.segment(k * block_dim_, block_dim_); }
  auto block(int k) { return data_.segment(k * block_dim_, block_dim_); }

  /// rho_k = |xi_k|^2.
  Vector radii() const { return block_radii(data_, block_dim_); }

 private:
  int blocks_;
  int block_dim_;
  Vector data_;
};

/// Coefficients nu_{k a}(rho_1, ..., rho_n), returned as an n x p matrix.
using CoefficientFunction = std::function<Matrix(const Vector& radii)>;

/// Clifford oscillator dxi_k/dt = Sum_a nu_{k a}(rho) K_a xi_k with a
/// generator set shared by all blocks.
class CliffordOscillator {
 public:
  /// Throws DomainError if the generator set fails validation at tol.
  CliffordOscillator(GeneratorSet generators, int blocks, CoefficientFunction nu,
                     double tol = kDefaultTolerance);

  /// Constant coefficients (n x p).
  static CliffordOscillator constant(GeneratorSet generators, const Matrix& nu);
  /// nu_k = offset.row(k) + slopes[k] * rho with slopes[k] of shape p x n.
  static CliffordOscillator affine(GeneratorSet generators, const Matrix& offset,
                                   std::vector<Matrix> slopes);

  const GeneratorSet& generators() const { return generators_; }
  int blocks() const { return blocks_; }
  int block_dim() const { return generators_.dim(); }
  int state_dim() const { return blocks_ * generators_.dim(); }

  /// nu evaluated at the given radii; throws EvaluationError if non-finite.
  Matrix coefficients(const Vector& radii) const;

 private:
  GeneratorSet generators_;
  int blocks_;
  CoefficientFunction nu_;
};

/// omega = |nu|, A = nu/omega . K. A zero row gives omega = 0, A = 0 and
/// `degenerate` set; the corresponding flow is the identity.
struct FrequencyDecomposition {
  double omega = 0.0;
  Matrix generator;
  bool degenerate = false;
};

FrequencyDecomposition frequency_decomposition(const Vector& nu_row, const GeneratorSet& set);

/// Closed-form flow of one oscillator orbit. Frequencies are evaluated once
/// at the initial radii, which the flow conserves; state_at() recomputes
/// cos/sin from scratch for each time, so long horizons do not accumulate.
class BlockFlow {
 public:
  BlockFlow(const CliffordOscillator& system, BlockState initial);

  BlockState state_at(double t) const;
  const std::vector<FrequencyDecomposition>& decompositions() const { return decomps_; }
  const BlockState& initial() const { return initial_; }

 private:
  BlockState initial_;
  std::vector<FrequencyDecomposition> decomps_;
};

/// xi_k(t) = [cos(omega_k t) I + sin(omega_k t) A_k] xi_k(0).
BlockState exact_flow(const CliffordOscillator& system, const BlockState& initial, double t);

/// Right-hand side Sum_a nu_{k a}(rho) K_a xi_k, block by block.
Vector oscillator_field(const CliffordOscillator& system, const BlockState& state);

/// Sum_a K_a grad h^a with K_a acting block-diagonally. For radial h the
/// result matches oscillator_field with nu_{k a} = 2 dh^a/drho_k.
Vector gradient_form_field(const GeneratorSet& set, const HamiltonianTriple& h,
                           const BlockState& state);

/// Max distance of samples from the plane span{xi(0), A xi(0)}.
/// Throws DomainError if the plane is degenerate (A xi(0) = 0 or xi(0) = 0).
double great_circle_residual(const std::vector<Vector>& samples, const Matrix& generator);

}  // namespace hyperham
