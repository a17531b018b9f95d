#include "ccwb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ccwb {

Eigh eigh(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: solver failed");
  const RealVector& vals = solver.eigenvalues();
  const Matrix& vecs = solver.eigenvectors();
  const auto n = vals.size();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });

  Eigh out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = vals(order[static_cast<std::size_t>(k)]);
    Vector col = vecs.col(order[static_cast<std::size_t>(k)]);
    Eigen::Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    const cplx phase = col(pivot) / std::abs(col(pivot));
    out.vectors.col(k) = col * std::conj(phase);
  }
  return out;
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

cplx trace_inner(const Matrix& a, const Matrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

Matrix spectral_projection(const Matrix& h, double lo, double hi) {
  const Eigh e = eigh(h);
  Matrix p = Matrix::Zero(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    if (e.values(k) >= lo && e.values(k) <= hi) p += e.vectors.col(k) * e.vectors.col(k).adjoint();
  }
  return p;
}

Matrix sign_of(const Matrix& h) {
  const Eigh e = eigh(h);
  const double floor = 1e-12 * std::max(1.0, e.values.size() > 0 ? e.values.cwiseAbs().maxCoeff() : 0.0);
  RealVector s(e.values.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = e.values(k) < -floor ? -1.0 : 1.0;
  return e.vectors * s.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

int TensorSplit::total_dim() const {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

int TensorSplit::dim_of(std::span<const int> factors) const {
  int d = 1;
  for (int f : factors) d *= dims.at(static_cast<std::size_t>(f));
  return d;
}

std::vector<int> TensorSplit::complement(std::span<const int> factors) const {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(dims.size()); ++f) {
    if (std::find(factors.begin(), factors.end(), f) == factors.end()) out.push_back(f);
  }
  return out;
}

namespace {

// Splits a full index into (index over `kept`, index over the rest), both in
// ascending-factor Kronecker order.
struct IndexMap {
  std::vector<int> kept_index;
  std::vector<int> rest_index;
  int kept_dim = 1;
  int rest_dim = 1;
};

IndexMap build_index_map(const TensorSplit& split, std::span<const int> factors) {
  const int n = static_cast<int>(split.dims.size());
  std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
  for (int f : factors) {
    if (f < 0 || f >= n) throw std::out_of_range("tensor factor index out of range");
    is_kept[static_cast<std::size_t>(f)] = true;
  }
  IndexMap map;
  const int total = split.total_dim();
  map.kept_index.resize(static_cast<std::size_t>(total));
  map.rest_index.resize(static_cast<std::size_t>(total));
  for (int f = 0; f < n; ++f) {
    if (is_kept[static_cast<std::size_t>(f)]) map.kept_dim *= split.dims[static_cast<std::size_t>(f)];
    else map.rest_dim *= split.dims[static_cast<std::size_t>(f)];
  }
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    for (int f = n - 1; f >= 0; --f) {
      digits[static_cast<std::size_t>(f)] = rem % split.dims[static_cast<std::size_t>(f)];
      rem /= split.dims[static_cast<std::size_t>(f)];
    }
    int kept = 0;
    int rest = 0;
    for (int f = 0; f < n; ++f) {
      const int d = split.dims[static_cast<std::size_t>(f)];
      if (is_kept[static_cast<std::size_t>(f)]) kept = kept * d + digits[static_cast<std::size_t>(f)];
      else rest = rest * d + digits[static_cast<std::size_t>(f)];
    }
    map.kept_index[static_cast<std::size_t>(idx)] = kept;
    map.rest_index[static_cast<std::size_t>(idx)] = rest;
  }
  return map;
}

}  // namespace

Matrix embed(const Matrix& local, const TensorSplit& split, std::span<const int> factors) {
  const IndexMap map = build_index_map(split, factors);
  if (local.rows() != map.kept_dim || local.cols() != map.kept_dim)
    throw std::invalid_argument("embed: local operator has the wrong dimension");
  const int total = split.total_dim();
  Matrix out = Matrix::Zero(total, total);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j)
      if (map.rest_index[static_cast<std::size_t>(i)] == map.rest_index[static_cast<std::size_t>(j)])
        out(i, j) = local(map.kept_index[static_cast<std::size_t>(i)], map.kept_index[static_cast<std::size_t>(j)]);
  return out;
}

Matrix reduce(const Matrix& x, const TensorSplit& split, std::span<const int> factors) {
  const IndexMap map = build_index_map(split, factors);
  const int total = split.total_dim();
  if (x.rows() != total || x.cols() != total)
    throw std::invalid_argument("reduce: operator dimension does not match split");
  Matrix out = Matrix::Zero(map.kept_dim, map.kept_dim);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j)
      if (map.rest_index[static_cast<std::size_t>(i)] == map.rest_index[static_cast<std::size_t>(j)])
        out(map.kept_index[static_cast<std::size_t>(i)], map.kept_index[static_cast<std::size_t>(j)]) += x(i, j);
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

Matrix haar_unitary(int dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

Vector haar_vector(int dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_density(int dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return hermitian_part(rho);
}

Matrix random_projection(int dim, int rank, Rng& rng) {
  const Matrix u = haar_unitary(dim, rng);
  const Matrix cols = u.leftCols(rank);
  return hermitian_part(cols * cols.adjoint());
}

Matrix singlet_density() {
  Vector psi = Vector::Zero(4);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = -1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

Matrix pauli(int index) {
  Matrix p(2, 2);
  switch (index) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli index must be 0..3");
  }
  return p;
}

}  // namespace ccwb
