#ifndef CCWB_LINALG_HPP
#define CCWB_LINALG_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ccwb {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Eigen-decomposition of a Hermitian matrix with eigenvalues in descending
// order. Ties keep the solver's original index order, and every eigenvector
// is rotated so that its largest-magnitude entry is real and positive.
struct Eigh {
  RealVector values;
  Matrix vectors;
};

Eigh eigh(const Matrix& h);

Matrix hermitian_part(const Matrix& m);
Matrix kron(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
double operator_norm(const Matrix& m);

// Trace inner product <a, b> = tr(a^dagger b).
cplx trace_inner(const Matrix& a, const Matrix& b);

// Projection onto the eigenspaces of `h` whose eigenvalues lie in [lo, hi].
Matrix spectral_projection(const Matrix& h, double lo, double hi);

// sign(h) on the spectrum; eigenvalues within 1e-12 (relative) of zero map to +1.
Matrix sign_of(const Matrix& h);

// Ordered factor dimensions of a tensor-product Hilbert space. Factor 0 is the
// most significant index (Kronecker convention).
struct TensorSplit {
  std::vector<int> dims;

  int total_dim() const;
  int dim_of(std::span<const int> factors) const;
  std::vector<int> complement(std::span<const int> factors) const;
  bool operator==(const TensorSplit&) const = default;
};

// Embed an operator on `factors` (ascending) as local (x) identity.
Matrix embed(const Matrix& local, const TensorSplit& split, std::span<const int> factors);

// Partial trace over every factor not listed in `factors` (ascending).
Matrix reduce(const Matrix& x, const TensorSplit& split, std::span<const int> factors);

// Seed derivation for deterministic per-task streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

Matrix ginibre(int rows, int cols, Rng& rng);
Matrix haar_unitary(int dim, Rng& rng);
Vector haar_vector(int dim, Rng& rng);
// Hilbert-Schmidt random density matrix; full rank with probability one.
Matrix random_density(int dim, Rng& rng);
// Projection onto the span of the first `rank` columns of a Haar unitary.
Matrix random_projection(int dim, int rank, Rng& rng);

// The 2-qubit singlet (|01> - |10>)/sqrt(2) as a density matrix.
Matrix singlet_density();
Matrix pauli(int index);  // 0 = identity, 1 = x, 2 = y, 3 = z

}  // namespace ccwb

#endif  // CCWB_LINALG_HPP
