#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ccwb/qprob.hpp"
#include "test_support.hpp"

using namespace ccwb;
using Catch::Approx;

namespace {

Matrix diag(std::initializer_list<double> values) {
  RealVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v(k++) = x;
  return v.cast<cplx>().asDiagonal();
}

const Matrix p_up = diag({1, 0});
const Matrix p_down = diag({0, 1});

}  // namespace

TEST_CASE("lattice_meet on diagonal and rank-one inputs", "[qprob][meet]") {
  const Projection a(diag({1, 1, 0, 0}));
  const Projection b(diag({0, 1, 1, 0}));
  const Projection m = lattice_meet(a, b);
  CHECK(test::max_diff(m.matrix(), diag({0, 1, 0, 0})) < 1e-12);
  CHECK(m.rank() == 1);

  CHECK(test::max_diff(lattice_meet(a, a).matrix(), a.matrix()) < 1e-12);

  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK(lattice_meet(Projection(p_up), Projection(plus)).is_zero());
}

TEST_CASE("lattice_meet matches the (ABA)^n limit for non-commuting pairs", "[qprob][meet]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    // Share a 1-dimensional intersection so the oracle limit is nonzero.
    const Matrix u = haar_unitary(4, rng);
    Matrix cols_a(4, 2), cols_b(4, 2);
    const Vector common = u.col(0);
    cols_a << common, u.col(1);
    cols_b << common, (u.col(2) + u.col(1)) / std::sqrt(2.0);
    const Projection a = Projection::onto_columns(cols_a);
    Eigen::HouseholderQR<Matrix> qr(cols_b);
    const Matrix qb = qr.householderQ() * Matrix::Identity(4, 2);
    const Projection b = Projection::onto_columns(qb);

    const Matrix oracle = test::meet_power_oracle(a.matrix(), b.matrix());
    CHECK(test::max_diff(lattice_meet(a, b).matrix(), oracle) < 1e-8);
  }
}

TEST_CASE("lattice_join and De Morgan", "[qprob][join]") {
  const Projection up(p_up), down(p_down);
  CHECK(test::max_diff(lattice_join(up, down).matrix(), Matrix::Identity(2, 2)) < 1e-12);
  CHECK(test::max_diff(lattice_join(up, Projection::zero(2)).matrix(), up.matrix()) < 1e-12);

  const Projection a(diag({1, 1, 0, 0}));
  const Projection b(diag({0, 1, 1, 0}));
  const Matrix expected = a.matrix() + b.matrix() - a.matrix() * b.matrix();
  CHECK(test::max_diff(lattice_join(a, b).matrix(), expected) < 1e-12);

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const Projection p = Projection::trusted(random_projection(5, 1 + static_cast<int>(seed % 4), rng), 1 + static_cast<int>(seed % 4));
    const Projection q = Projection::trusted(random_projection(5, 1 + static_cast<int>((seed / 4) % 4), rng), 1 + static_cast<int>((seed / 4) % 4));
    const Matrix lhs = lattice_meet(p, q).matrix();
    const Matrix rhs = Matrix::Identity(5, 5) - lattice_join(p.complement(), q.complement()).matrix();
    CHECK(test::max_diff(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("commuting projections satisfy the lattice identities", "[qprob][property]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto [a, b] = test::random_commuting_pair(3, 3, rng);
    const Matrix ab = a.matrix() * b.matrix();
    CHECK(test::max_diff(lattice_meet(a, b).matrix(), ab) < 1e-9);
    const Matrix sum = lattice_join(a, b).matrix() + lattice_meet(a.complement(), b.complement()).matrix();
    CHECK(test::max_diff(sum, Matrix::Identity(9, 9)) < 1e-9);
  }
}

TEST_CASE("state_eval", "[qprob][state]") {
  const DensityState mixed(Matrix::Identity(4, 4) / 4.0);
  CHECK(state_eval(mixed, HermitianOperator(diag({1, 1, 0, 0}))) == Approx(0.5));
  CHECK(state_eval(mixed, HermitianOperator(Matrix::Identity(4, 4))) == Approx(1.0));
  CHECK(state_eval(mixed, HermitianOperator(Matrix::Zero(4, 4))) == 0.0);
  CHECK_THROWS_AS(state_eval(mixed, HermitianOperator(Matrix::Identity(2, 2))), PreconditionError);
}

TEST_CASE("type invariants reject malformed inputs", "[qprob][invariant]") {
  Matrix nonherm(2, 2);
  nonherm << 1, 1, 0, 1;
  try {
    HermitianOperator h(nonherm);
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    CHECK(e.invariant() == "tol_herm");
  }
  CHECK_THROWS_AS(Projection(diag({0.5, 1})), InvariantError);
  CHECK_THROWS_AS(DensityState(diag({0.5, 0.6})), InvariantError);
  CHECK_THROWS_AS(DensityState(diag({1.2, -0.2})), InvariantError);
  CHECK(DensityState(diag({0.5, 0.5})).faithful());
  CHECK_FALSE(DensityState(diag({1.0, 0.0})).faithful());
}

TEST_CASE("correlation of the singlet", "[qprob][correlation]") {
  const DensityState singlet(singlet_density());
  const Matrix id2 = Matrix::Identity(2, 2);
  const Projection a(kron(p_up, id2));
  const Projection b_up(kron(id2, p_up));
  const Projection b_down(kron(id2, p_down));
  CHECK(correlation(singlet, a, b_up) == Approx(-0.25).margin(1e-12));
  CHECK(correlation(singlet, a, b_down) == Approx(0.25).margin(1e-12));

  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(correlation(singlet, a, Projection(kron(plus, id2))), PreconditionError);

  Rng rng(3);
  const DensityState product(kron(random_density(2, rng), random_density(2, rng)));
  for (int k = 0; k < 10; ++k) {
    const Projection p(kron(random_projection(2, 1, rng), id2));
    const Projection q(kron(id2, random_projection(2, 1, rng)));
    CHECK(std::abs(correlation(product, p, q)) < 1e-12);
  }
}

TEST_CASE("correlated pairs: complement correlation and phi(A v B) < 1", "[qprob][property]") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const DensityState phi(random_density(9, rng));
    const auto [a, b] = test::random_commuting_pair(3, 3, rng);
    const double c = correlation(phi, a, b);
    if (c <= 1e-9) continue;
    ++checked;
    CHECK(state_eval(phi, lattice_join(a, b)) < 1.0);
    CHECK(correlation(phi, a.complement(), b.complement()) > 0.0);
  }
  CHECK(checked > 5);
}

TEST_CASE("faithful states give positive weight to nonzero projections", "[qprob][property]") {
  Rng rng(11);
  const DensityState phi(random_density(6, rng));
  REQUIRE(phi.faithful());
  for (int rank = 1; rank < 6; ++rank) {
    const Projection p = Projection::trusted(random_projection(6, rank, rng), rank);
    CHECK(state_eval(phi, p) > 0.0);
  }
}

TEST_CASE("is_product_state", "[qprob][product]") {
  const TensorSplit split{{2, 2}};
  const auto n1 = MatrixAlgebra::factor(split, {0});
  const auto n2 = MatrixAlgebra::factor(split, {1});
  Rng rng(5);
  const DensityState product(kron(random_density(2, rng), random_density(2, rng)));
  CHECK(is_product_state(product, n1, n2));
  CHECK_FALSE(is_product_state(DensityState(singlet_density()), n1, n2));
  CHECK(is_product_state(DensityState(singlet_density()), MatrixAlgebra::scalars(4), n2));

  // The generic sweep (no tensor fast path) agrees.
  const auto g1 = MatrixAlgebra::generated(4, {kron(pauli(1), pauli(0)), kron(pauli(3), pauli(0))});
  const auto g2 = MatrixAlgebra::generated(4, {kron(pauli(0), pauli(1)), kron(pauli(0), pauli(3))});
  CHECK(g1.basis_size() == 4);
  CHECK(is_product_state(product, g1, g2));
  CHECK_FALSE(is_product_state(DensityState(singlet_density()), g1, g2));
  CHECK_THROWS_AS(is_product_state(product, g1, g1), PreconditionError);
}

TEST_CASE("logical independence", "[qprob][independence]") {
  const TensorSplit split{{2, 2}};
  const auto n1 = MatrixAlgebra::factor(split, {0});
  const auto n2 = MatrixAlgebra::factor(split, {1});
  CHECK(logical_independence_check(n1, n2, IndependenceMode::Exact, 0, 0).status ==
        IndependenceVerdict::Status::Independent);

  const auto d = MatrixAlgebra::diagonal(2);
  const auto verdict = logical_independence_check(d, d, IndependenceMode::Sampled, 50, 1);
  REQUIRE(verdict.status == IndependenceVerdict::Status::Counterexample);
  const auto& [p, q] = *verdict.counterexample;
  CHECK(p.rank() == 1);
  CHECK(test::max_diff(p.matrix() + q.matrix(), Matrix::Identity(2, 2)) < 1e-12);
  CHECK_THROWS_AS(logical_independence_check(d, d, IndependenceMode::Exact, 0, 0), PreconditionError);

  const TensorSplit chain{{2, 2, 2, 2, 2}};
  const auto left = MatrixAlgebra::factor(chain, {0, 1});
  const auto right = MatrixAlgebra::factor(chain, {3, 4});
  CHECK(logical_independence_check(left, right, IndependenceMode::Sampled, 500, 9).status ==
        IndependenceVerdict::Status::NoCounterexample);
}

TEST_CASE("commutant", "[qprob][commutant]") {
  const TensorSplit split{{2, 2}};
  const auto n1 = MatrixAlgebra::factor(split, {0});
  CHECK(same_span(commutant(n1), MatrixAlgebra::factor(split, {1}), 1e-9));

  // Generic solver on the same algebra.
  const auto g1 = MatrixAlgebra::generated(4, {kron(pauli(1), pauli(0)), kron(pauli(3), pauli(0))});
  const auto g1c = commutant(g1);
  CHECK(g1c.basis_size() == 4);
  CHECK(same_span(g1c, MatrixAlgebra::factor(split, {1}), 1e-8));
  CHECK(same_span(commutant(g1c), g1, 1e-8));

  const auto full = MatrixAlgebra::generated(3, {test::random_hermitian(3, 4), test::random_hermitian(3, 5)});
  CHECK(full.basis_size() == 9);
  CHECK(commutant(full).basis_size() == 1);

  const auto d = MatrixAlgebra::diagonal(4);
  CHECK(same_span(commutant(d), d, 1e-8));
}

TEST_CASE("conditional_expectation", "[qprob][expectation]") {
  const TensorSplit split{{2, 2}};
  const auto n1 = MatrixAlgebra::factor(split, {0});
  const Matrix x = test::random_hermitian(2, 1);
  const Matrix y = test::random_hermitian(2, 2);
  const auto e = conditional_expectation(HermitianOperator(kron(x, y)), n1);
  const Matrix expected = kron(x * (y.trace() / 2.0), Matrix::Identity(2, 2));
  CHECK(test::max_diff(e.matrix(), expected) < 1e-12);

  const auto e1 = conditional_expectation(HermitianOperator(Matrix::Identity(4, 4)), n1);
  CHECK(test::max_diff(e1.matrix(), Matrix::Identity(4, 4)) < 1e-12);

  const auto g = MatrixAlgebra::generated(4, {kron(pauli(2), pauli(0)), kron(pauli(3), pauli(0))});
  const HermitianOperator m(test::random_hermitian(4, 7));
  const auto once = conditional_expectation(m, g);
  const auto twice = conditional_expectation(once, g);
  CHECK(test::max_diff(once.matrix(), twice.matrix()) < 1e-12);
  CHECK(test::max_diff(once.matrix(), conditional_expectation(m, n1).matrix()) < 1e-12);
}
