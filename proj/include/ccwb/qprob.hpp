#ifndef CCWB_QPROB_HPP
#define CCWB_QPROB_HPP

// Finite-dimensional quantum probability: self-adjoint operators, projections,
// density-matrix states, *-subalgebras of M_d, the projection lattice and
// commutants.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ccwb/error.hpp"
#include "ccwb/linalg.hpp"
#include "ccwb/tolerances.hpp"

namespace ccwb {

class HermitianOperator {
 public:
  // Throws InvariantError("tol_herm") if `m` is not self-adjoint.
  explicit HermitianOperator(Matrix m, const Tolerances& tol = {});

  const Matrix& matrix() const noexcept { return m_; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

class Projection {
 public:
  // Validates P = P^dagger = P^2 and the {0,1} spectrum within tol_proj.
  explicit Projection(Matrix m, const Tolerances& tol = {});

  // For matrices produced by a spectral construction that is a projection by
  // design; only hermitizes.
  static Projection trusted(Matrix m, int rank);
  static Projection zero(int dim);
  static Projection identity(int dim);
  // Projection onto the span of the (orthonormal) columns.
  static Projection onto_columns(const Matrix& columns);

  const Matrix& matrix() const noexcept { return m_; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  int rank() const noexcept { return rank_; }
  bool is_zero() const noexcept { return rank_ == 0; }
  Projection complement() const;
  // Orthonormal basis of the range.
  Matrix range_basis() const;

 private:
  Projection(Matrix m, int rank, bool) : m_(std::move(m)), rank_(rank) {}
  Matrix m_;
  int rank_ = 0;
};

class DensityState {
 public:
  // Validates self-adjointness, unit trace and positivity (tol_state).
  explicit DensityState(Matrix rho, const Tolerances& tol = {});

  const Matrix& rho() const noexcept { return rho_; }
  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  double min_eigenvalue() const noexcept { return min_eig_; }
  bool faithful() const noexcept { return faithful_; }

  // Real part of tr(rho X).
  double eval(const Matrix& x) const;

 private:
  Matrix rho_;
  double min_eig_ = 0.0;
  bool faithful_ = false;
};

// A unital *-subalgebra of M_dim. Two representations:
//  - generated: explicit trace-orthonormal basis from word closure;
//  - factor: frame * (M_S (x) 1) * frame^dagger for a set S of tensor factors
//    and an optional unitary frame. The basis is materialized on request only.
class MatrixAlgebra {
 public:
  static MatrixAlgebra generated(int dim, std::vector<Matrix> generators, const Tolerances& tol = {});
  static MatrixAlgebra factor(TensorSplit split, std::vector<int> acting,
                              std::optional<Matrix> frame = std::nullopt);
  static MatrixAlgebra scalars(int dim);
  static MatrixAlgebra full(int dim);
  static MatrixAlgebra diagonal(int dim);
  // Span of an already trace-orthonormal basis that is known to be a
  // unital *-algebra (e.g. a commutation kernel).
  static MatrixAlgebra from_basis(int dim, std::vector<Matrix> basis);

  int dim() const noexcept { return dim_; }
  bool is_factor() const noexcept { return split_.has_value(); }
  const std::optional<TensorSplit>& split() const noexcept { return split_; }
  const std::vector<int>& acting() const noexcept { return acting_; }
  const std::optional<Matrix>& frame() const noexcept { return frame_; }
  // Generators used for commutation tests. Built on request for factors.
  std::vector<Matrix> generators() const;

  // Real dimension of the algebra as a vector space.
  int basis_size() const;
  // Trace-orthonormal basis. For factor algebras this is built on each call.
  std::vector<Matrix> basis() const;
  // Self-adjoint spanning set (Hermitian and anti-Hermitian parts of the basis).
  std::vector<Matrix> hermitian_basis() const;

  // Trace-orthogonal projection onto the algebra.
  Matrix expectation(const Matrix& x) const;
  bool contains(const Matrix& x, double tol) const;

  // Map an operator written in the factor's local space (dim = prod of acting
  // dims) into the full space. Factor algebras only.
  Matrix lift(const Matrix& local) const;

 private:
  MatrixAlgebra() = default;
  int dim_ = 0;
  std::vector<Matrix> generators_;
  std::vector<Matrix> basis_;  // generated algebras only
  std::optional<TensorSplit> split_;
  std::vector<int> acting_;
  std::optional<Matrix> frame_;
};

bool commute(const Matrix& a, const Matrix& b, double tol);
// True when every generator of n1 commutes with every generator of n2.
bool algebras_commute(const MatrixAlgebra& n1, const MatrixAlgebra& n2, double tol);
// Every basis element of each algebra lies in the other.
bool same_span(const MatrixAlgebra& a, const MatrixAlgebra& b, double tol);

Projection lattice_meet(const Projection& a, const Projection& b, const Tolerances& tol = {});
Projection lattice_join(const Projection& a, const Projection& b, const Tolerances& tol = {});
// A <= B in the lattice order: BA = A.
bool lattice_leq(const Projection& a, const Projection& b, double tol);

double state_eval(const DensityState& phi, const HermitianOperator& x, const Tolerances& tol = {});
double state_eval(const DensityState& phi, const Projection& p);

// phi(A ^ B) - phi(A) phi(B) for commuting A, B (meet evaluated as AB).
double correlation(const DensityState& phi, const Projection& a, const Projection& b,
                   const Tolerances& tol = {});

bool is_product_state(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                      const Tolerances& tol = {});

enum class IndependenceMode { Exact, Sampled };

struct IndependenceVerdict {
  enum class Status { Independent, NoCounterexample, Counterexample };
  Status status = Status::NoCounterexample;
  int samples = 0;
  std::optional<std::pair<Projection, Projection>> counterexample;
};

IndependenceVerdict logical_independence_check(const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                                               IndependenceMode mode, int samples,
                                               std::uint64_t seed, const Tolerances& tol = {});

MatrixAlgebra commutant(const MatrixAlgebra& n, const Tolerances& tol = {});

HermitianOperator conditional_expectation(const HermitianOperator& m, const MatrixAlgebra& n,
                                          const Tolerances& tol = {});

// Nonzero random projection in the algebra (identity when the algebra has no
// nontrivial projection reachable by the sampler).
Projection random_projection_in(const MatrixAlgebra& n, Rng& rng);

// A commuting pair of factor algebras with the same frame and disjoint
// supports, reduced to the Hilbert space of their joint support.
struct ReducedPair {
  DensityState state;  // reduced state on the joint support, in the shared frame
  MatrixAlgebra n1;
  MatrixAlgebra n2;
  std::vector<int> support;  // joint support factors in the original split
};

// Returns nullopt when the pair does not have that structure.
std::optional<ReducedPair> reduce_factor_pair(const DensityState& phi, const MatrixAlgebra& n1,
                                              const MatrixAlgebra& n2);
// Lift an operator on the reduced space back into the original space.
Matrix lift_reduced(const Matrix& x, const MatrixAlgebra& original_n1, const std::vector<int>& support);

}  // namespace ccwb

#endif  // CCWB_QPROB_HPP
