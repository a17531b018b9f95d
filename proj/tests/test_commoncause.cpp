#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ccwb/commoncause.hpp"
#include "test_support.hpp"

using namespace ccwb;
using Catch::Approx;

namespace {

Matrix diag(const std::vector<double>& values) {
  RealVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) v(static_cast<Eigen::Index>(k)) = values[k];
  return v.cast<cplx>().asDiagonal();
}

Matrix indicator(int n, Event e) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (e >> i) & 1U ? 1.0 : 0.0;
  return diag(v);
}

// Eight atoms: cause C = {1..4}, within each block A and B are independent.
// Order inside a block: AB, AB', A'B, A'B'.
struct FourBlock {
  ClassicalSpace space{{0.32, 0.08, 0.08, 0.02, 0.02, 0.08, 0.08, 0.32}};
  Event a = 0b00110011;
  Event b = 0b01010101;
  Event c = 0b00001111;
};

// Direct conditional-probability oracle over explicit atom sets.
struct SetOracle {
  std::vector<double> w;
  double p(const std::set<int>& s) const {
    double t = 0;
    for (int i : s) t += w[static_cast<std::size_t>(i)];
    return t;
  }
  static std::set<int> meet(const std::set<int>& x, const std::set<int>& y) {
    std::set<int> out;
    for (int i : x)
      if (y.count(i)) out.insert(i);
    return out;
  }
  std::set<int> comp(const std::set<int>& x) const {
    std::set<int> out;
    for (int i = 0; i < static_cast<int>(w.size()); ++i)
      if (!x.count(i)) out.insert(i);
    return out;
  }
  bool is_cause(const std::set<int>& a, const std::set<int>& b, const std::set<int>& c, double tol) const {
    const auto cp = comp(c);
    const double pc = p(c), pcp = p(cp);
    if (pc <= 0 || pcp <= 0) return false;
    const double ac = p(meet(a, c)) / pc, bc = p(meet(b, c)) / pc, abc = p(meet(meet(a, b), c)) / pc;
    const double acp = p(meet(a, cp)) / pcp, bcp = p(meet(b, cp)) / pcp, abcp = p(meet(meet(a, b), cp)) / pcp;
    return std::abs(abc - ac * bc) <= tol && std::abs(abcp - acp * bcp) <= tol && ac - acp > tol && bc - bcp > tol;
  }
};

std::set<int> to_set(Event e, int n) {
  std::set<int> s;
  for (int i = 0; i < n; ++i)
    if ((e >> i) & 1U) s.insert(i);
  return s;
}

// Seeded dimension-9 instance: A = P (x) 1, B = 1 (x) Q with rank-2 local
// projections, and a faithful state mixing a random density with weight on
// the meet so the pair is correlated.
struct NineDim {
  DensityState phi;
  Projection a, b;
};

NineDim nine_dim(std::uint64_t seed) {
  Rng rng(seed);
  const Matrix p = random_projection(3, 2, rng);
  const Matrix q = random_projection(3, 2, rng);
  const Matrix a = kron(p, Matrix::Identity(3, 3));
  const Matrix b = kron(Matrix::Identity(3, 3), q);
  const Matrix meet = a * b;
  const Matrix rho = 0.7 * random_density(9, rng) + 0.3 * meet / 4.0;
  return {DensityState(rho), Projection::trusted(a, 6), Projection::trusted(b, 6)};
}

// Weights of C and its complement in the four cells, computed by traces of
// commuting products; returns the two screening residuals and the margins.
std::array<double, 4> direct_conditions(const DensityState& phi, const Matrix& a, const Matrix& b, const Matrix& c) {
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix cp = id - c;
  auto ev = [&](const Matrix& x) { return (phi.rho() * x).trace().real(); };
  const double pc = ev(c), pcp = ev(cp);
  const double ac = ev(a * c) / pc, bc = ev(b * c) / pc, abc = ev(a * b * c) / pc;
  const double acp = ev(a * cp) / pcp, bcp = ev(b * cp) / pcp, abcp = ev(a * b * cp) / pcp;
  return {std::abs(abc - ac * bc), std::abs(abcp - acp * bcp), ac - acp, bc - bcp};
}

}  // namespace

TEST_CASE("ClassicalSpace validation", "[commoncause][classical]") {
  CHECK_THROWS_AS(ClassicalSpace({0.5, 0.6}), InvariantError);
  CHECK_THROWS_AS(ClassicalSpace({1.2, -0.2}), InvariantError);
  CHECK_THROWS_AS(ClassicalSpace({}), InvariantError);
  const ClassicalSpace s({0.25, 0.25, 0.5});
  CHECK(s.full() == 0b111);
  CHECK(s.event({1, 3}) == 0b101);
  CHECK(s.prob(0b101) == Approx(0.75));
  CHECK_THROWS_AS(s.prob(0b1000), PreconditionError);
  CHECK_THROWS_AS(s.event({4}), PreconditionError);
}

TEST_CASE("classical_verify_cc on the four-block example", "[commoncause][classical]") {
  const FourBlock ex;
  const auto& s = ex.space;
  CHECK(s.prob(ex.c) == Approx(0.5));
  CHECK(s.prob(ex.a & ex.c) / s.prob(ex.c) == Approx(0.8));
  CHECK(s.prob(ex.a & ex.b) - s.prob(ex.a) * s.prob(ex.b) == Approx(0.09));

  const auto cert = classical_verify_cc(s, ex.a, ex.b, ex.c);
  CHECK(cert.verified);
  CHECK(cert.residual_screen_c < 1e-15);
  CHECK(cert.residual_screen_cperp < 1e-15);
  CHECK(cert.margin_a == Approx(0.6));
  CHECK(cert.margin_b == Approx(0.6));
  CHECK(cert.is_genuine);
  CHECK_FALSE(cert.is_strong);

  // C = A is a (degenerate) cause of any positively correlated pair.
  const auto degenerate = classical_verify_cc(s, ex.a, ex.b, ex.a);
  CHECK(degenerate.verified);

  // A cause independent of both events has zero margins.
  const ClassicalSpace grid({0.1, 0.15, 0.15, 0.1, 0.1, 0.15, 0.15, 0.1});
  const auto flat = classical_verify_cc(grid, 0b00110011, 0b01010101, 0b00001111);
  CHECK(std::abs(flat.margin_a) < 1e-12);
  CHECK_FALSE(flat.verified);

  CHECK_THROWS_AS(classical_verify_cc(s, ex.a, ex.b, s.full()), PreconditionError);
  CHECK_THROWS_AS(classical_verify_cc(s, ex.a, ex.b, 0), PreconditionError);
}

TEST_CASE("classical_find_cc", "[commoncause][classical]") {
  const ClassicalSpace s({0.4, 0.1, 0.1, 0.4});
  const Event a = s.event({1, 2}), b = s.event({1, 3});
  CHECK(s.prob(a & b) == Approx(0.4));
  CHECK(classical_find_cc(s, a, b, true).empty());

  // Exhaustive set oracle agrees, trivial causes excluded by hand.
  const SetOracle oracle{s.weights()};
  int oracle_hits = 0;
  for (Event c = 1; c < s.full(); ++c) {
    if (c == a || c == b || c == (a & b) || c == (a | b)) continue;
    const Event n = s.full() & ~c;
    if (n == a || n == b || n == (a & b) || n == (a | b)) continue;
    if (oracle.is_cause(to_set(a, 4), to_set(b, 4), to_set(c, 4), 1e-9)) ++oracle_hits;
  }
  CHECK(oracle_hits == 0);

  // Without filtering, the degenerate causes appear.
  const auto all = classical_find_cc(s, a, b, false);
  std::set<Event> causes;
  for (const auto& cert : all) causes.insert(*cert.classical_cause);
  CHECK(causes.count(a) == 1);
  CHECK(causes.count(b) == 1);

  const FourBlock ex;
  const auto found = classical_find_cc(ex.space, ex.a, ex.b, true);
  bool designed = false;
  for (const auto& cert : found) designed |= *cert.classical_cause == ex.c;
  CHECK(designed);

  const ClassicalSpace uniform({0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(classical_find_cc(uniform, uniform.event({1, 2}), uniform.event({1, 3}), true), PreconditionError);
}

TEST_CASE("classical_find_cc matches the set oracle on random spaces", "[commoncause][property]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(6);
    double total = 0;
    for (double& x : w) total += (x = u(rng));
    for (double& x : w) x /= total;
    const ClassicalSpace s(w);
    std::uniform_int_distribution<Event> ev(1, s.full() - 1);
    Event a = 0, b = 0;
    for (int tries = 0; tries < 200; ++tries) {
      a = ev(rng);
      b = ev(rng);
      if (s.prob(a & b) - s.prob(a) * s.prob(b) > 1e-3) break;
    }
    if (s.prob(a & b) - s.prob(a) * s.prob(b) <= 1e-3) continue;
    std::set<Event> found;
    for (const auto& cert : classical_find_cc(s, a, b, false)) found.insert(*cert.classical_cause);
    const SetOracle oracle{w};
    std::set<Event> expected;
    for (Event c = 1; c < s.full(); ++c)
      if (oracle.is_cause(to_set(a, 6), to_set(b, 6), to_set(c, 6), 1e-9)) expected.insert(c);
    CHECK(found == expected);
  }
}

TEST_CASE("classical_closedness_audit", "[commoncause][classical]") {
  const auto two = classical_closedness_audit(ClassicalSpace({0.3, 0.7}));
  CHECK(two.correlated_pairs == 0);
  CHECK(two.closed());

  const ClassicalSpace s({0.4, 0.1, 0.1, 0.4});
  const auto report = classical_closedness_audit(s);
  CHECK_FALSE(report.closed());
  bool listed = false;
  for (const auto& [x, y] : report.uncovered)
    listed |= (x == s.event({1, 2}) && y == s.event({1, 3})) || (x == s.event({1, 3}) && y == s.event({1, 2}));
  CHECK(listed);
  CHECK(report.covered + static_cast<long long>(report.uncovered.size()) == report.correlated_pairs);

  const auto uniform = classical_closedness_audit(ClassicalSpace({0.25, 0.25, 0.25, 0.25}));
  CHECK(uniform.covered + static_cast<long long>(uniform.uncovered.size()) == uniform.correlated_pairs);

  std::vector<double> many(13, 1.0 / 13);
  CHECK_THROWS_AS(classical_closedness_audit(ClassicalSpace(many)), PreconditionError);
}

TEST_CASE("Reichenbach implication: screening plus margins force correlation", "[commoncause][property]") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 200; ++trial) {
    const double pc = u(rng);
    double ac = u(rng), acp = u(rng), bc = u(rng), bcp = u(rng);
    if (ac < acp) std::swap(ac, acp);
    if (bc < bcp) std::swap(bc, bcp);
    if (ac - acp < 1e-6 || bc - bcp < 1e-6) continue;
    std::vector<double> w{pc * ac * bc,           pc * ac * (1 - bc),           pc * (1 - ac) * bc,
                          pc * (1 - ac) * (1 - bc), (1 - pc) * acp * bcp,       (1 - pc) * acp * (1 - bcp),
                          (1 - pc) * (1 - acp) * bcp, (1 - pc) * (1 - acp) * (1 - bcp)};
    double total = 0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    const ClassicalSpace s(w);
    const Event a = 0b00110011, b = 0b01010101, c = 0b00001111;
    REQUIRE(classical_verify_cc(s, a, b, c).verified);
    CHECK(s.prob(a & b) - s.prob(a) * s.prob(b) > 0.0);
  }
}

TEST_CASE("classical and quantum verification agree on diagonal embeddings", "[commoncause][property]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    const int n = 5 + static_cast<int>(seed % 3);
    std::vector<double> w(static_cast<std::size_t>(n));
    double total = 0;
    for (double& x : w) total += (x = u(rng));
    for (double& x : w) x /= total;
    const ClassicalSpace s(w);
    std::uniform_int_distribution<Event> ev(1, s.full() - 1);
    const Event a = ev(rng), b = ev(rng), c = ev(rng);
    const auto classical = classical_verify_cc(s, a, b, c);
    const auto quantum = quantum_verify_cc(DensityState(diag(w)), Projection(indicator(n, a)),
                                           Projection(indicator(n, b)), Projection(indicator(n, c)));
    CHECK(quantum.residual_screen_c == Approx(classical.residual_screen_c).margin(1e-12));
    CHECK(quantum.residual_screen_cperp == Approx(classical.residual_screen_cperp).margin(1e-12));
    CHECK(quantum.margin_a == Approx(classical.margin_a).margin(1e-12));
    CHECK(quantum.margin_b == Approx(classical.margin_b).margin(1e-12));
    CHECK(quantum.verified == classical.verified);
    CHECK(quantum.is_strong == classical.is_strong);
    CHECK(quantum.is_genuine == classical.is_genuine);
  }
}

TEST_CASE("quantum_verify_cc preconditions", "[commoncause][quantum]") {
  const FourBlock ex;
  const DensityState phi(diag(ex.space.weights()));
  const Projection a(indicator(8, ex.a)), b(indicator(8, ex.b)), c(indicator(8, ex.c));
  const auto cert = quantum_verify_cc(phi, a, b, c);
  CHECK(cert.verified);
  CHECK(cert.margin_a == Approx(0.6));

  Rng rng(2);
  const Projection tilted = Projection::trusted(random_projection(8, 3, rng), 3);
  CHECK_THROWS_AS(quantum_verify_cc(phi, a, b, tilted), PreconditionError);
  CHECK_THROWS_AS(quantum_verify_cc(phi, a, b, Projection::identity(8)), PreconditionError);
}

TEST_CASE("reichenbach_r", "[commoncause][r]") {
  const RValue first = reichenbach_r(0.5, 0.5, 0.4, 0.6);
  CHECK(first.r == Approx(0.375));
  CHECK(first.r < first.phi_ab);
  CHECK(reichenbach_r(0.6, 0.7, 0.5, 0.8).r == Approx(0.4));
  CHECK_THROWS_AS(reichenbach_r(0.5, 0.4, 0.2, 0.7), PreconditionError);
  CHECK_THROWS_AS(reichenbach_r(0.5, 0.5, 0.5, 1.0), InternalError);
}

TEST_CASE("r bounds on correlated tensor pairs", "[commoncause][property]") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    Rng rng(seed);
    const DensityState phi(random_density(9, rng));
    const auto [a, b] = test::random_commuting_pair(3, 3, rng);
    if (correlation(phi, a, b) <= 1e-6) continue;
    ++checked;
    const RValue r = reichenbach_r(phi, a, b);
    CHECK(r.r > 0.0);
    CHECK(r.r < r.phi_ab);
    CHECK(r.phi_avb < 1.0);
  }
  CHECK(checked > 10);
}

TEST_CASE("synthesize_subprojection examples", "[commoncause][synth]") {
  const DensityState phi(diag({0.4, 0.3, 0.2, 0.1}));
  const Projection p(diag({1, 1, 1, 0}));

  const Projection half = synthesize_subprojection(phi, p, 0.5, true);
  CHECK(test::max_diff(half.matrix(), diag({0, 1, 1, 0})) < 1e-12);

  const Projection rotated = synthesize_subprojection(phi, p, 0.65, true);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 1;
  const double s = std::sqrt(0.5);
  Vector v = Vector::Zero(4);
  v(1) = s;
  v(2) = s;
  expected += v * v.adjoint();
  CHECK(test::max_diff(rotated.matrix(), expected) < 1e-12);
  CHECK(phi.eval(rotated.matrix()) == Approx(0.65).margin(1e-12));

  CHECK_THROWS_AS(synthesize_subprojection(phi, p, 0.75, true), InfeasibleError);
  // Rank 3 only reaches 0.9, so 0.75 sits in a gap even without strictness.
  CHECK_THROWS_AS(synthesize_subprojection(phi, p, 0.75, false), InfeasibleError);
  CHECK_NOTHROW(synthesize_subprojection(phi, p, 0.6, false));
  CHECK_THROWS_AS(synthesize_subprojection(phi, Projection(diag({1, 0, 0, 0})), 0.2, true), InfeasibleError);
  CHECK_THROWS_AS(synthesize_subprojection(phi, p, 0.9, true), PreconditionError);
  CHECK_THROWS_AS(synthesize_subprojection(phi, p, 0.0, true), PreconditionError);
  CHECK_THROWS_AS(synthesize_subprojection(DensityState(diag({0.5, 0.5, 0, 0})), p, 0.2, true), PreconditionError);
}

TEST_CASE("synthesize_subprojection output is a subprojection with the target weight", "[commoncause][property]") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const int dim = 6;
    const DensityState phi(random_density(dim, rng));
    const int rank = 2 + static_cast<int>(seed % 4);
    const Projection p = Projection::trusted(random_projection(dim, rank, rng), rank);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const double r = frac(rng) * phi.eval(p.matrix());
    try {
      const Projection c = synthesize_subprojection(phi, p, r, true);
      const Matrix& m = c.matrix();
      CHECK(test::max_diff(m, m.adjoint()) < 1e-9);
      CHECK(test::max_diff(m * m, m) < 1e-9);
      CHECK(test::max_diff(m * p.matrix(), m) < 1e-9);
      CHECK(test::max_diff(p.matrix() * m, m) < 1e-9);
      CHECK(c.rank() > 0);
      CHECK(c.rank() < p.rank());
      CHECK(std::abs(phi.eval(m) - r) <= 1e-10);
    } catch (const InfeasibleError&) {
      // Covered by the feasibility test below.
    }
  }
}

TEST_CASE("synthesize_subprojection feasibility matches subset enumeration", "[commoncause][property]") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const int dim = 3 + static_cast<int>(seed % 10);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> w(static_cast<std::size_t>(dim));
    double total = 0;
    for (double& x : w) total += (x = u(rng));
    for (double& x : w) x /= total;
    std::vector<double> mask(static_cast<std::size_t>(dim), 0.0);
    std::vector<int> support;
    for (int i = 0; i < dim; ++i)
      if (u(rng) < 0.7 || i == 0) {
        mask[static_cast<std::size_t>(i)] = 1.0;
        support.push_back(i);
      }
    if (support.size() < 2) continue;
    const DensityState phi(diag(w));
    const Projection p(diag(mask));
    double weight = 0;
    for (int i : support) weight += w[static_cast<std::size_t>(i)];
    const bool strict = seed % 2 == 0;

    // Oracle: per subset size, the range of achievable subset sums.
    const std::size_t m = support.size();
    std::vector<double> lo(m + 1, 1e9), hi(m + 1, -1e9);
    for (std::uint64_t sub = 1; sub < (std::uint64_t{1} << m); ++sub) {
      const auto k = static_cast<std::size_t>(std::popcount(sub));
      double sum = 0;
      for (std::size_t j = 0; j < m; ++j)
        if ((sub >> j) & 1U) sum += w[static_cast<std::size_t>(support[j])];
      lo[k] = std::min(lo[k], sum);
      hi[k] = std::max(hi[k], sum);
    }
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9, 0.97}) {
      const double r = frac * weight;
      bool feasible = false;
      for (std::size_t k = 1; k <= (strict ? m - 1 : m); ++k) feasible |= lo[k] <= r && r <= hi[k];
      bool succeeded = true;
      try {
        const Projection c = synthesize_subprojection(phi, p, r, strict);
        CHECK(std::abs(phi.eval(c.matrix()) - r) <= 1e-10);
      } catch (const InfeasibleError&) {
        succeeded = false;
      }
      CHECK(succeeded == feasible);
    }
  }
}

TEST_CASE("find_strong_cc on a seeded dimension-9 instance", "[commoncause][strong]") {
  const NineDim inst = nine_dim(4);
  REQUIRE(inst.phi.faithful());
  REQUIRE(lattice_meet(inst.a, inst.b).rank() == 4);
  REQUIRE(correlation(inst.phi, inst.a, inst.b) > 0.0);

  const auto cert = find_strong_cc(inst.phi, inst.a, inst.b);
  CHECK(cert.verified);
  CHECK(cert.is_strong);
  CHECK_FALSE(cert.is_genuine);
  CHECK(cert.residual_screen_c <= 1e-9);
  CHECK(cert.residual_screen_cperp <= 1e-9);

  const auto direct = direct_conditions(inst.phi, inst.a.matrix(), inst.b.matrix(), cert.cause->matrix());
  CHECK(direct[0] <= 1e-9);
  CHECK(direct[1] <= 1e-9);
  CHECK(direct[2] > 0.0);
  CHECK(direct[3] > 0.0);
  CHECK(inst.phi.eval(cert.cause->matrix()) == Approx(reichenbach_r(inst.phi, inst.a, inst.b).r).margin(1e-10));
}

TEST_CASE("find_strong_cc: rank-one meet is infeasible, uncorrelated is an error", "[commoncause][strong]") {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const Matrix rho = 0.9 * bell * bell.adjoint() + 0.1 * Matrix::Identity(4, 4) / 4.0;
  const DensityState phi(rho);
  const Matrix up = diag({1, 0});
  const Projection a(kron(up, Matrix::Identity(2, 2)));
  const Projection b(kron(Matrix::Identity(2, 2), up));
  REQUIRE(correlation(phi, a, b) > 0.0);
  CHECK_THROWS_AS(find_strong_cc(phi, a, b), InfeasibleError);

  const DensityState mixed(Matrix::Identity(4, 4) / 4.0);
  CHECK_THROWS_AS(find_strong_cc(mixed, a, b), PreconditionError);

  const auto multiple = find_multiple_strong_cc(phi, a, b, 3, 1);
  CHECK(multiple.causes.empty());
  CHECK(multiple.infeasible);
}

TEST_CASE("soundness: every weight-r strict subprojection of the meet is a cause", "[commoncause][property]") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const NineDim inst = nine_dim(seed);
    if (correlation(inst.phi, inst.a, inst.b) <= 1e-6) continue;
    const RValue r = reichenbach_r(inst.phi, inst.a, inst.b);
    const Projection meet = lattice_meet(inst.a, inst.b);
    Projection c = Projection::zero(9);
    try {
      c = synthesize_subprojection(inst.phi, meet, r.r, true);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++checked;
    const auto direct = direct_conditions(inst.phi, inst.a.matrix(), inst.b.matrix(), c.matrix());
    CHECK(direct[0] <= 1e-9);
    CHECK(direct[1] <= 1e-9);
    CHECK(direct[2] > 1e-9);
    CHECK(direct[3] > 1e-9);
  }
  CHECK(checked > 10);
}

TEST_CASE("find_multiple_strong_cc", "[commoncause][strong]") {
  const NineDim inst = nine_dim(4);
  const auto three = find_multiple_strong_cc(inst.phi, inst.a, inst.b, 3, 7);
  REQUIRE(three.causes.size() == 3);
  CHECK_FALSE(three.shortfall);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(three.causes[i].verified);
    CHECK(three.causes[i].is_strong);
    for (std::size_t j = 0; j < i; ++j)
      CHECK(operator_norm(three.causes[i].cause->matrix() - three.causes[j].cause->matrix()) > 1e-6);
  }

  const auto one = find_multiple_strong_cc(inst.phi, inst.a, inst.b, 1, 7);
  REQUIRE(one.causes.size() == 1);
  CHECK(test::max_diff(one.causes[0].cause->matrix(), find_strong_cc(inst.phi, inst.a, inst.b).cause->matrix()) < 1e-12);
}

TEST_CASE("commutant of the algebra generated by a commuting pair", "[commoncause][commutant]") {
  const NineDim inst = nine_dim(4);
  const auto alg = MatrixAlgebra::generated(9, {inst.a.matrix(), inst.b.matrix()});
  CHECK(alg.basis_size() == 4);
  // Cells have ranks 4, 2, 2, 1.
  CHECK(commutant(alg).basis_size() == 16 + 4 + 4 + 1);
}

TEST_CASE("search_genuine_cc", "[commoncause][genuine]") {
  // The four-block example with each atom split unevenly in two.
  const FourBlock ex;
  std::vector<double> w;
  Event a = 0, b = 0;
  for (int i = 0; i < 8; ++i) {
    const double x = ex.space.weights()[static_cast<std::size_t>(i)];
    w.push_back(0.65 * x);
    w.push_back(0.35 * x);
    if ((ex.a >> i) & 1U) a |= Event{3} << (2 * i);
    if ((ex.b >> i) & 1U) b |= Event{3} << (2 * i);
  }
  Rng rng(8);
  const Matrix u = haar_unitary(16, rng);
  auto rotate = [&](const Matrix& m) { return Matrix(u * m * u.adjoint()); };
  const DensityState phi(rotate(diag(w)));
  const Projection pa(rotate(indicator(16, a))), pb(rotate(indicator(16, b)));

  const auto cert = search_genuine_cc(phi, pa, pb, 50, 3);
  REQUIRE(cert.has_value());
  CHECK(cert->verified);
  CHECK(cert->is_genuine);
  const auto direct = direct_conditions(phi, pa.matrix(), pb.matrix(), cert->cause->matrix());
  CHECK(direct[0] <= 1e-9);
  CHECK(direct[1] <= 1e-9);

  CHECK_FALSE(search_genuine_cc(phi, pa, pb, 0, 3).has_value());

  const NineDim inst = nine_dim(4);
  CHECK_FALSE(find_strong_cc(inst.phi, inst.a, inst.b).is_genuine);
}
