#include "ccwb/qprob.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ccwb {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << " must be a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvariantError("shape", os.str());
  }
}

void require_same_dim(int a, int b, const char* op) {
  if (a != b) {
    std::ostringstream os;
    os << op << ": dimension mismatch (" << a << " vs " << b << ")";
    throw PreconditionError(os.str());
  }
}

bool same_frame(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (!a && !b) return true;
  if (a && b) return a->rows() == b->rows() && max_abs(*a - *b) <= 1e-12;
  const Matrix& f = a ? *a : *b;
  return max_abs(f - Matrix::Identity(f.rows(), f.cols())) <= 1e-12;
}

bool disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return false;
  return true;
}

// Hermitian generating set of M_d: symmetric and antisymmetric off-diagonal
// units plus diagonal units.
std::vector<Matrix> local_hermitian_units(int d) {
  std::vector<Matrix> out;
  for (int a = 0; a < d; ++a) {
    Matrix e = Matrix::Zero(d, d);
    e(a, a) = 1.0;
    out.push_back(e);
    for (int b = a + 1; b < d; ++b) {
      Matrix s = Matrix::Zero(d, d);
      s(a, b) = 1.0;
      s(b, a) = 1.0;
      out.push_back(s);
      Matrix t = Matrix::Zero(d, d);
      t(a, b) = cplx(0, -1);
      t(b, a) = cplx(0, 1);
      out.push_back(t);
    }
  }
  return out;
}

// Gram-Schmidt step against an orthonormal list; returns the normalized
// residual when it is large relative to the candidate, else nullopt.
std::optional<Matrix> orthonormal_residual(const std::vector<Matrix>& basis, Matrix m, double rel_tol) {
  const double scale = m.norm();
  if (scale == 0.0) return std::nullopt;
  for (int pass = 0; pass < 2; ++pass)
    for (const Matrix& b : basis) m -= trace_inner(b, m) * b;
  const double n = m.norm();
  if (n <= rel_tol * scale) return std::nullopt;
  return Matrix(m / n);
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix m, const Tolerances& tol) {
  require_square(m, "Hermitian operator");
  const double dev = max_abs(m - m.adjoint());
  if (dev > tol.tol_herm) {
    std::ostringstream os;
    os << "operator is not self-adjoint (max |X - X^dagger| = " << dev << ")";
    throw InvariantError("tol_herm", os.str());
  }
  m_ = hermitian_part(m);
}

Projection::Projection(Matrix m, const Tolerances& tol) {
  require_square(m, "projection");
  const double herm_dev = max_abs(m - m.adjoint());
  if (herm_dev > tol.tol_proj)
    throw InvariantError("tol_proj", "projection is not self-adjoint");
  Matrix h = hermitian_part(m);
  const double idem_dev = max_abs(h * h - h);
  if (idem_dev > tol.tol_proj) {
    std::ostringstream os;
    os << "P^2 != P (max deviation " << idem_dev << ")";
    throw InvariantError("tol_proj", os.str());
  }
  const Eigh e = eigh(h);
  int rank = 0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    const double v = e.values(k);
    if (std::abs(v - 1.0) <= tol.tol_proj) ++rank;
    else if (std::abs(v) > tol.tol_proj)
      throw InvariantError("tol_proj", "projection spectrum is not contained in {0, 1}");
  }
  m_ = std::move(h);
  rank_ = rank;
}

Projection Projection::trusted(Matrix m, int rank) {
  return Projection(hermitian_part(m), rank, true);
}

Projection Projection::zero(int dim) { return Projection(Matrix::Zero(dim, dim), 0, true); }

Projection Projection::identity(int dim) { return Projection(Matrix::Identity(dim, dim), dim, true); }

Projection Projection::onto_columns(const Matrix& columns) {
  return trusted(columns * columns.adjoint(), static_cast<int>(columns.cols()));
}

Projection Projection::complement() const {
  return Projection(Matrix::Identity(dim(), dim()) - m_, dim() - rank_, true);
}

Matrix Projection::range_basis() const {
  const Eigh e = eigh(m_);
  return e.vectors.leftCols(rank_);
}

DensityState::DensityState(Matrix rho, const Tolerances& tol) {
  require_square(rho, "density matrix");
  if (max_abs(rho - rho.adjoint()) > tol.tol_herm)
    throw InvariantError("tol_herm", "density matrix is not self-adjoint");
  Matrix h = hermitian_part(rho);
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > tol.tol_state) {
    std::ostringstream os;
    os << "trace(rho) = " << tr << " != 1";
    throw InvariantError("tol_state", os.str());
  }
  const Eigh e = eigh(h);
  min_eig_ = e.values(e.values.size() - 1);
  if (min_eig_ < -tol.tol_state) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << min_eig_;
    throw InvariantError("tol_state", os.str());
  }
  faithful_ = min_eig_ > tol.faithful_eps;
  rho_ = std::move(h);
}

double DensityState::eval(const Matrix& x) const {
  return rho_.cwiseProduct(x.transpose()).sum().real();
}

// ---------------------------------------------------------------------------
// MatrixAlgebra

MatrixAlgebra MatrixAlgebra::generated(int dim, std::vector<Matrix> generators, const Tolerances& tol) {
  for (const Matrix& g : generators) {
    if (g.rows() != dim || g.cols() != dim)
      throw InvariantError("shape", "algebra generator has the wrong dimension");
  }
  std::vector<Matrix> letters;
  for (const Matrix& g : generators) {
    letters.push_back(g);
    if (max_abs(g - g.adjoint()) > tol.tol_herm) letters.push_back(g.adjoint());
  }

  std::vector<Matrix> basis;
  const std::size_t cap = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  auto try_add = [&](const Matrix& m) {
    if (basis.size() >= cap) return;
    if (auto r = orthonormal_residual(basis, m, tol.tol_alg)) basis.push_back(*r);
  };
  try_add(Matrix::Identity(dim, dim));
  for (const Matrix& l : letters) try_add(l);
  // Breadth-first word closure: right-multiply every new basis element by
  // every letter until the span stops growing.
  for (std::size_t i = 0; i < basis.size() && basis.size() < cap; ++i) {
    for (const Matrix& l : letters) try_add(basis[i] * l);
  }
  for (const Matrix& b : basis) {
    for (const Matrix& l : letters) {
      const Matrix w = b * l;
      Matrix r = w;
      for (const Matrix& c : basis) r -= trace_inner(c, w) * c;
      if (r.norm() > tol.tol_alg * std::max(1.0, w.norm()))
        throw InvariantError("tol_alg", "word closure failed to close under multiplication");
    }
  }

  MatrixAlgebra a;
  a.dim_ = dim;
  a.generators_ = std::move(generators);
  a.basis_ = std::move(basis);
  return a;
}

MatrixAlgebra MatrixAlgebra::from_basis(int dim, std::vector<Matrix> basis) {
  MatrixAlgebra a;
  a.dim_ = dim;
  a.generators_ = basis;
  a.basis_ = std::move(basis);
  return a;
}

MatrixAlgebra MatrixAlgebra::factor(TensorSplit split, std::vector<int> acting, std::optional<Matrix> frame) {
  std::sort(acting.begin(), acting.end());
  acting.erase(std::unique(acting.begin(), acting.end()), acting.end());
  const int n = static_cast<int>(split.dims.size());
  for (int f : acting)
    if (f < 0 || f >= n) throw InvariantError("structure", "acting factor index out of range");
  for (int d : split.dims)
    if (d < 1) throw InvariantError("structure", "factor dimensions must be positive");
  const int dim = split.total_dim();
  if (frame && (frame->rows() != dim || frame->cols() != dim))
    throw InvariantError("structure", "frame has the wrong dimension");
  MatrixAlgebra a;
  a.dim_ = dim;
  a.split_ = std::move(split);
  a.acting_ = std::move(acting);
  a.frame_ = std::move(frame);
  return a;
}

MatrixAlgebra MatrixAlgebra::scalars(int dim) { return factor(TensorSplit{{dim}}, {}); }

MatrixAlgebra MatrixAlgebra::full(int dim) { return factor(TensorSplit{{dim}}, {0}); }

MatrixAlgebra MatrixAlgebra::diagonal(int dim) {
  std::vector<Matrix> gens;
  for (int k = 0; k < dim; ++k) {
    Matrix e = Matrix::Zero(dim, dim);
    e(k, k) = 1.0;
    gens.push_back(e);
  }
  return generated(dim, std::move(gens));
}

std::vector<Matrix> MatrixAlgebra::generators() const {
  if (!is_factor()) return generators_;
  std::vector<Matrix> out;
  for (int f : acting_) {
    const int d = split_->dims[static_cast<std::size_t>(f)];
    const std::vector<int> single{f};
    for (const Matrix& u : local_hermitian_units(d)) {
      Matrix g = embed(u, *split_, single);
      if (frame_) g = (*frame_) * g * frame_->adjoint();
      out.push_back(std::move(g));
    }
  }
  return out;
}

int MatrixAlgebra::basis_size() const {
  if (!is_factor()) return static_cast<int>(basis_.size());
  const int d = split_->dim_of(acting_);
  return d * d;
}

std::vector<Matrix> MatrixAlgebra::basis() const {
  if (!is_factor()) return basis_;
  const int d = split_->dim_of(acting_);
  const double norm = std::sqrt(static_cast<double>(dim_ / d));
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(d * d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Matrix e = Matrix::Zero(d, d);
      e(a, b) = 1.0 / norm;
      out.push_back(lift(e));
    }
  return out;
}

std::vector<Matrix> MatrixAlgebra::hermitian_basis() const {
  std::vector<Matrix> out;
  for (const Matrix& b : basis()) {
    Matrix re = 0.5 * (b + b.adjoint());
    Matrix im = cplx(0, -0.5) * (b - b.adjoint());
    if (re.norm() > 1e-12) out.push_back(std::move(re));
    if (im.norm() > 1e-12) out.push_back(std::move(im));
  }
  return out;
}

Matrix MatrixAlgebra::expectation(const Matrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_) throw PreconditionError("expectation: dimension mismatch");
  if (!is_factor()) {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const Matrix& b : basis_) out += trace_inner(b, x) * b;
    return out;
  }
  const Matrix y = frame_ ? Matrix(frame_->adjoint() * x * (*frame_)) : x;
  const int d = split_->dim_of(acting_);
  const Matrix local = reduce(y, *split_, acting_) / static_cast<double>(dim_ / d);
  return lift(local);
}

bool MatrixAlgebra::contains(const Matrix& x, double tol) const {
  return (expectation(x) - x).norm() <= tol * std::max(1.0, x.norm());
}

Matrix MatrixAlgebra::lift(const Matrix& local) const {
  if (!is_factor()) throw PreconditionError("lift: algebra has no tensor structure");
  Matrix g = embed(local, *split_, acting_);
  if (frame_) g = (*frame_) * g * frame_->adjoint();
  return g;
}

// ---------------------------------------------------------------------------

bool commute(const Matrix& a, const Matrix& b, double tol) {
  return (a * b - b * a).norm() <= tol;
}

bool algebras_commute(const MatrixAlgebra& n1, const MatrixAlgebra& n2, double tol) {
  if (n1.dim() != n2.dim()) return false;
  if (n1.is_factor() && n2.is_factor() && *n1.split() == *n2.split() &&
      same_frame(n1.frame(), n2.frame()) && disjoint(n1.acting(), n2.acting()))
    return true;
  const auto g1 = n1.generators();
  const auto g2 = n2.generators();
  for (const Matrix& a : g1)
    for (const Matrix& b : g2)
      if (!commute(a, b, tol)) return false;
  return true;
}

bool same_span(const MatrixAlgebra& a, const MatrixAlgebra& b, double tol) {
  if (a.dim() != b.dim() || a.basis_size() != b.basis_size()) return false;
  for (const Matrix& x : a.basis())
    if (!b.contains(x, tol)) return false;
  for (const Matrix& x : b.basis())
    if (!a.contains(x, tol)) return false;
  return true;
}

Projection lattice_meet(const Projection& a, const Projection& b, const Tolerances& tol) {
  require_same_dim(a.dim(), b.dim(), "lattice_meet");
  const Eigh e = eigh(a.matrix() + b.matrix());
  int rank = 0;
  while (rank < e.values.size() && e.values(rank) >= 2.0 - tol.meet_tol) ++rank;
  const Matrix cols = e.vectors.leftCols(rank);
  return Projection::onto_columns(cols);
}

Projection lattice_join(const Projection& a, const Projection& b, const Tolerances& tol) {
  require_same_dim(a.dim(), b.dim(), "lattice_join");
  return lattice_meet(a.complement(), b.complement(), tol).complement();
}

bool lattice_leq(const Projection& a, const Projection& b, double tol) {
  if (a.dim() != b.dim()) return false;
  return max_abs(b.matrix() * a.matrix() - a.matrix()) <= tol;
}

double state_eval(const DensityState& phi, const HermitianOperator& x, const Tolerances& tol) {
  require_same_dim(phi.dim(), x.dim(), "state_eval");
  const cplx v = phi.rho().cwiseProduct(x.matrix().transpose()).sum();
  if (std::abs(v.imag()) > tol.tol_herm * std::max(1.0, x.matrix().norm()))
    throw InternalError("state_eval: expectation of a self-adjoint operator is not real");
  return v.real();
}

double state_eval(const DensityState& phi, const Projection& p) {
  require_same_dim(phi.dim(), p.dim(), "state_eval");
  return phi.eval(p.matrix());
}

double correlation(const DensityState& phi, const Projection& a, const Projection& b, const Tolerances& tol) {
  require_same_dim(phi.dim(), a.dim(), "correlation");
  require_same_dim(a.dim(), b.dim(), "correlation");
  if (!commute(a.matrix(), b.matrix(), tol.comm_tol))
    throw PreconditionError("correlation: A and B must commute");
  const double ab = phi.eval(a.matrix() * b.matrix());
  return ab - phi.eval(a.matrix()) * phi.eval(b.matrix());
}

std::optional<ReducedPair> reduce_factor_pair(const DensityState& phi, const MatrixAlgebra& n1,
                                              const MatrixAlgebra& n2) {
  if (!n1.is_factor() || !n2.is_factor()) return std::nullopt;
  if (!(*n1.split() == *n2.split()) || !same_frame(n1.frame(), n2.frame())) return std::nullopt;
  if (!disjoint(n1.acting(), n2.acting())) return std::nullopt;
  if (phi.dim() != n1.dim()) return std::nullopt;

  std::vector<int> support = n1.acting();
  support.insert(support.end(), n2.acting().begin(), n2.acting().end());
  std::sort(support.begin(), support.end());

  const TensorSplit& split = *n1.split();
  const Matrix* frame = n1.frame() ? &*n1.frame() : (n2.frame() ? &*n2.frame() : nullptr);
  const Matrix rho = frame ? Matrix(frame->adjoint() * phi.rho() * (*frame)) : phi.rho();
  Matrix reduced = reduce(rho, split, support);
  reduced = hermitian_part(reduced);

  TensorSplit sub;
  for (int f : support) sub.dims.push_back(split.dims[static_cast<std::size_t>(f)]);
  auto position = [&](const std::vector<int>& acting) {
    std::vector<int> out;
    for (int f : acting)
      out.push_back(static_cast<int>(std::find(support.begin(), support.end(), f) - support.begin()));
    return out;
  };
  Tolerances loose;
  loose.tol_state = 1e-8;
  return ReducedPair{DensityState(reduced, loose), MatrixAlgebra::factor(sub, position(n1.acting())),
                     MatrixAlgebra::factor(sub, position(n2.acting())), support};
}

Matrix lift_reduced(const Matrix& x, const MatrixAlgebra& original_n1, const std::vector<int>& support) {
  Matrix g = embed(x, *original_n1.split(), support);
  if (original_n1.frame()) g = (*original_n1.frame()) * g * original_n1.frame()->adjoint();
  return g;
}

bool is_product_state(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                      const Tolerances& tol) {
  require_same_dim(phi.dim(), n1.dim(), "is_product_state");
  require_same_dim(n1.dim(), n2.dim(), "is_product_state");
  if (auto reduced = reduce_factor_pair(phi, n1, n2)) {
    // Compare the joint marginal with the product of the two marginals.
    const TensorSplit& sub = *reduced->n1.split();
    const Matrix& joint = reduced->state.rho();
    const auto& s1 = reduced->n1.acting();
    const auto& s2 = reduced->n2.acting();
    const Matrix product = embed(reduce(joint, sub, s1), sub, s1) * embed(reduce(joint, sub, s2), sub, s2);
    return (joint - product).cwiseAbs().maxCoeff() <= tol.product_tol;
  }
  if (!algebras_commute(n1, n2, tol.comm_tol))
    throw PreconditionError("is_product_state: algebras do not commute");

  const auto b1 = n1.basis();
  const auto b2 = n2.basis();
  std::vector<cplx> phi2;
  phi2.reserve(b2.size());
  for (const Matrix& y : b2) phi2.push_back(phi.rho().cwiseProduct(y.transpose()).sum());
  for (const Matrix& x : b1) {
    const Matrix rx = phi.rho() * x;
    const cplx px = rx.trace();
    for (std::size_t j = 0; j < b2.size(); ++j) {
      const cplx pxy = rx.cwiseProduct(b2[j].transpose()).sum();
      if (std::abs(pxy - px * phi2[j]) > tol.product_tol) return false;
    }
  }
  return true;
}

Projection random_projection_in(const MatrixAlgebra& n, Rng& rng) {
  if (n.is_factor()) {
    const int d = n.split()->dim_of(n.acting());
    if (d == 1) return Projection::identity(n.dim());
    std::uniform_int_distribution<int> rank_dist(1, d - 1);
    const int rank = rank_dist(rng);
    const Matrix local = random_projection(d, rank, rng);
    return Projection::trusted(n.lift(local), rank * (n.dim() / d));
  }
  const Matrix h = hermitian_part(n.expectation(hermitian_part(ginibre(n.dim(), n.dim(), rng))));
  const Eigh e = eigh(h);
  // Group numerically equal eigenvalues; each group is a spectral projection.
  std::vector<std::pair<int, int>> groups;
  int start = 0;
  for (int k = 1; k <= e.values.size(); ++k) {
    if (k == e.values.size() || e.values(k - 1) - e.values(k) > 1e-8) {
      groups.emplace_back(start, k);
      start = k;
    }
  }
  if (groups.size() == 1) return Projection::identity(n.dim());
  const std::uint64_t count = groups.size();
  std::uniform_int_distribution<std::uint64_t> mask_dist(1, (std::uint64_t{1} << std::min<std::uint64_t>(count, 62)) - 2);
  const std::uint64_t mask = mask_dist(rng);
  Matrix cols(n.dim(), 0);
  for (std::size_t g = 0; g < groups.size() && g < 62; ++g) {
    if (!((mask >> g) & 1U)) continue;
    const auto [lo, hi] = groups[g];
    Matrix grown(n.dim(), cols.cols() + (hi - lo));
    grown << cols, e.vectors.middleCols(lo, hi - lo);
    cols = std::move(grown);
  }
  return Projection::onto_columns(cols);
}

IndependenceVerdict logical_independence_check(const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                                               IndependenceMode mode, int samples,
                                               std::uint64_t seed, const Tolerances& tol) {
  require_same_dim(n1.dim(), n2.dim(), "logical_independence_check");
  if (!algebras_commute(n1, n2, tol.comm_tol))
    throw PreconditionError("logical_independence_check: algebras do not commute");

  IndependenceVerdict verdict;
  if (mode == IndependenceMode::Exact) {
    const bool structured = n1.is_factor() && n2.is_factor() && *n1.split() == *n2.split() &&
                            same_frame(n1.frame(), n2.frame()) && disjoint(n1.acting(), n2.acting());
    if (!structured)
      throw PreconditionError(
          "exact logical independence needs full matrix algebras of disjoint tensor factors");
    verdict.status = IndependenceVerdict::Status::Independent;
    return verdict;
  }

  // Sampling happens in the joint-support space when the pair is a tensor
  // pair; meets are preserved by the lift.
  const auto reduced = reduce_factor_pair(DensityState(Matrix::Identity(n1.dim(), n1.dim()) / n1.dim()), n1, n2);
  const MatrixAlgebra& s1 = reduced ? reduced->n1 : n1;
  const MatrixAlgebra& s2 = reduced ? reduced->n2 : n2;

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Projection p = random_projection_in(s1, rng);
    const Projection q = random_projection_in(s2, rng);
    ++verdict.samples;
    if (lattice_meet(p, q, tol).is_zero()) {
      verdict.status = IndependenceVerdict::Status::Counterexample;
      if (reduced) {
        verdict.counterexample.emplace(
            Projection::trusted(lift_reduced(p.matrix(), n1, reduced->support), p.rank() * (n1.dim() / p.dim())),
            Projection::trusted(lift_reduced(q.matrix(), n1, reduced->support), q.rank() * (n1.dim() / q.dim())));
      } else {
        verdict.counterexample.emplace(p, q);
      }
      return verdict;
    }
  }
  verdict.status = IndependenceVerdict::Status::NoCounterexample;
  return verdict;
}

MatrixAlgebra commutant(const MatrixAlgebra& n, const Tolerances& tol) {
  if (n.is_factor()) {
    const std::vector<int> rest = n.split()->complement(n.acting());
    return MatrixAlgebra::factor(*n.split(), rest, n.frame());
  }
  const int d = n.dim();
  if (d > 32) throw PreconditionError("commutant: generic solver is limited to dimension 32");
  const Matrix id = Matrix::Identity(d, d);
  // X commutes with G  <=>  (G^T (x) 1 - 1 (x) G) vec(X) = 0 (column-major vec).
  Matrix normal = Matrix::Zero(d * d, d * d);
  for (const Matrix& g : n.generators()) {
    const Matrix k = kron(g.transpose(), id) - kron(id, g);
    normal += k.adjoint() * k;
  }
  const Eigh e = eigh(normal);
  const double scale = std::max(1.0, e.values.size() > 0 ? e.values(0) : 1.0);
  std::vector<Matrix> basis;
  for (Eigen::Index k = e.values.size() - 1; k >= 0; --k) {
    if (e.values(k) > tol.tol_alg * scale) break;
    const Vector v = e.vectors.col(k);
    basis.push_back(Eigen::Map<const Matrix>(v.data(), d, d));
  }
  return MatrixAlgebra::from_basis(d, std::move(basis));
}

HermitianOperator conditional_expectation(const HermitianOperator& m, const MatrixAlgebra& n,
                                          const Tolerances& tol) {
  require_same_dim(m.dim(), n.dim(), "conditional_expectation");
  return HermitianOperator(hermitian_part(n.expectation(m.matrix())), tol);
}

}  // namespace ccwb
