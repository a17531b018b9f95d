#include "ccwb/commoncause.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

namespace ccwb {

namespace {

// Probabilities of the eight events a cause conditions on.
struct CauseWeights {
  double c, cperp;
  double abc, ac, bc;
  double abcp, acp, bcp;
};

CommonCauseCertificate evaluate(const CauseWeights& w, const Tolerances& tol) {
  CommonCauseCertificate cert;
  cert.weight = w.c;
  auto& v = cert.conditions;
  v.ab_given_c = w.abc / w.c;
  v.a_given_c = w.ac / w.c;
  v.b_given_c = w.bc / w.c;
  v.ab_given_cperp = w.abcp / w.cperp;
  v.a_given_cperp = w.acp / w.cperp;
  v.b_given_cperp = w.bcp / w.cperp;
  cert.residual_screen_c = std::abs(v.ab_given_c - v.a_given_c * v.b_given_c);
  cert.residual_screen_cperp = std::abs(v.ab_given_cperp - v.a_given_cperp * v.b_given_cperp);
  cert.margin_a = v.a_given_c - v.a_given_cperp;
  cert.margin_b = v.b_given_c - v.b_given_cperp;
  cert.verified = cert.residual_screen_c <= tol.cc_tol && cert.residual_screen_cperp <= tol.cc_tol &&
                  cert.margin_a > tol.cc_tol && cert.margin_b > tol.cc_tol;
  return cert;
}

// Eigen-decomposition of the state compressed to the range of a projection,
// with eigenvectors expressed in the full space.
struct Compression {
  Matrix vectors;
  RealVector mu;
  int size() const { return static_cast<int>(mu.size()); }
  double top(int k) const { return mu.head(k).sum(); }
  double bottom(int k) const { return mu.tail(k).sum(); }
};

Compression compress(const DensityState& phi, const Projection& p) {
  if (p.is_zero()) return {Matrix(p.dim(), 0), RealVector(0)};
  const Matrix q = p.range_basis();
  const Eigh e = eigh(hermitian_part(q.adjoint() * phi.rho() * q));
  return {q * e.vectors, e.values};
}

bool rank_feasible(const Compression& comp, int k, double r, double slack) {
  return comp.bottom(k) - slack <= r && r <= comp.top(k) + slack;
}

// Columns of the chosen eigenvectors, with `from` turned toward `to` so that
// the total weight becomes `target`. The rotation keeps the cross term zero
// because the compressed state is diagonal in this basis.
Matrix rotated_columns(const Compression& comp, const std::vector<int>& chosen, int from, int to,
                       double value, double target, double phase) {
  const double mu_i = comp.mu(from), mu_j = comp.mu(to);
  const double base = value - mu_i;
  double cos2 = std::clamp((target - base - mu_j) / (mu_i - mu_j), 0.0, 1.0);
  // Snap rounding noise at the endpoints; its square root would tilt the vector.
  if (cos2 < 1e-13) cos2 = 0.0;
  if (cos2 > 1.0 - 1e-13) cos2 = 1.0;
  const cplx tilt = std::polar(std::sqrt(1.0 - cos2), phase);
  Matrix cols(comp.vectors.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t s = 0; s < chosen.size(); ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    if (chosen[s] == from)
      cols.col(col) = std::sqrt(cos2) * comp.vectors.col(from) + tilt * comp.vectors.col(to);
    else
      cols.col(col) = comp.vectors.col(chosen[s]);
  }
  return cols;
}

Matrix chosen_columns(const Compression& comp, const std::vector<int>& chosen) {
  Matrix cols(comp.vectors.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t s = 0; s < chosen.size(); ++s) cols.col(static_cast<Eigen::Index>(s)) = comp.vectors.col(chosen[s]);
  return cols;
}

// Deterministic descent from the top-k set: the last selected index that can
// move down by one does so, until the weight crosses the target.
Matrix descend_to(const Compression& comp, int k, double target) {
  const int m = comp.size();
  std::vector<char> in(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < k; ++i) in[static_cast<std::size_t>(i)] = 1;
  double value = comp.top(k);
  auto chosen = [&] {
    std::vector<int> out;
    for (int i = 0; i < m; ++i)
      if (in[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
  };
  while (value > target) {
    int i = -1;
    for (int s = m - 2; s >= 0; --s) {
      if (in[static_cast<std::size_t>(s)] && !in[static_cast<std::size_t>(s + 1)]) {
        i = s;
        break;
      }
    }
    if (i < 0) break;
    const double next = value - comp.mu(i) + comp.mu(i + 1);
    if (next <= target) return rotated_columns(comp, chosen(), i, i + 1, value, target, 0.0);
    in[static_cast<std::size_t>(i)] = 0;
    in[static_cast<std::size_t>(i + 1)] = 1;
    value = next;
  }
  return chosen_columns(comp, chosen());
}

// Random monotone walk from a random k-subset toward the target, finishing
// with a rotation carrying a random relative phase.
std::optional<Matrix> wander_to(const Compression& comp, int k, double target, Rng& rng) {
  const int m = comp.size();
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> chosen(order.begin(), order.begin() + k);
  std::vector<int> rest(order.begin() + k, order.end());
  double value = 0;
  for (int i : chosen) value += comp.mu(i);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));

  for (int step = 0; step < 4 * m * m + 4; ++step) {
    if (value == target) return chosen_columns(comp, chosen);
    const bool down = value > target;
    std::vector<std::pair<std::size_t, std::size_t>> moves;
    for (std::size_t s = 0; s < chosen.size(); ++s)
      for (std::size_t t = 0; t < rest.size(); ++t) {
        const double delta = comp.mu(rest[t]) - comp.mu(chosen[s]);
        if (down ? delta < -1e-14 : delta > 1e-14) moves.emplace_back(s, t);
      }
    if (moves.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
    const auto [s, t] = moves[pick(rng)];
    const double next = value - comp.mu(chosen[s]) + comp.mu(rest[t]);
    if (down ? next <= target : next >= target)
      return rotated_columns(comp, chosen, chosen[s], rest[t], value, target, angle(rng));
    std::swap(chosen[s], rest[t]);
    value = next;
  }
  return std::nullopt;
}

void require_commuting(const Projection& a, const Projection& b, const Tolerances& tol, const char* what) {
  if (a.dim() != b.dim()) throw PreconditionError(std::string(what) + ": dimension mismatch");
  if (!commute(a.matrix(), b.matrix(), tol.comm_tol))
    throw PreconditionError(std::string(what) + ": projections do not commute");
}

std::vector<double> all_event_probs(const ClassicalSpace& space) {
  const std::size_t n = static_cast<std::size_t>(space.size());
  std::vector<double> probs(std::size_t{1} << n, 0.0);
  for (std::size_t e = 1; e < probs.size(); ++e) {
    const int low = std::countr_zero(e);
    probs[e] = probs[e & (e - 1)] + space.weights()[static_cast<std::size_t>(low)];
  }
  return probs;
}

CauseWeights classical_weights(const std::vector<double>& p, Event full, Event a, Event b, Event c) {
  const Event cp = full & ~c;
  return {p[c], p[cp], p[a & b & c], p[a & c], p[b & c], p[a & b & cp], p[a & cp], p[b & cp]};
}

bool trivial_cause(Event full, Event a, Event b, Event c) {
  for (Event t : {a, b, a & b, a | b})
    if (c == t || c == (full & ~t)) return true;
  return false;
}

}  // namespace

ClassicalSpace::ClassicalSpace(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty() || weights_.size() > 64)
    throw InvariantError("atoms", "classical space needs between 1 and 64 atoms");
  double sum = 0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InvariantError("atoms", "atom weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvariantError("atoms", "atom weights must sum to 1");
}

Event ClassicalSpace::full() const noexcept {
  return weights_.size() == 64 ? ~Event{0} : (Event{1} << weights_.size()) - 1;
}

double ClassicalSpace::prob(Event e) const {
  if (e & ~full()) throw PreconditionError("event refers to atoms outside the space");
  double p = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if ((e >> i) & 1U) p += weights_[i];
  return p;
}

Event ClassicalSpace::event(const std::vector<int>& atoms) const {
  Event e = 0;
  for (int a : atoms) {
    if (a < 1 || a > size()) throw PreconditionError("atom label " + std::to_string(a) + " out of range");
    e |= Event{1} << (a - 1);
  }
  return e;
}

CommonCauseCertificate classical_verify_cc(const ClassicalSpace& space, Event a, Event b, Event c,
                                           const Tolerances& tol) {
  const Event cp = space.complement(c);
  const CauseWeights w{space.prob(c),     space.prob(cp),    space.prob(a & b & c), space.prob(a & c),
                       space.prob(b & c), space.prob(a & b & cp), space.prob(a & cp), space.prob(b & cp)};
  if (space.prob(a) <= 0 || space.prob(b) <= 0 || w.c <= 0 || w.cperp <= 0)
    throw PreconditionError("classical_verify_cc: conditioning on an event of probability zero");
  CommonCauseCertificate cert = evaluate(w, tol);
  cert.classical_cause = c;
  cert.is_strong = (c & ~(a & b)) == 0;
  cert.is_genuine = (c & ~a) != 0 && (c & ~b) != 0;
  return cert;
}

std::vector<CommonCauseCertificate> classical_find_cc(const ClassicalSpace& space, Event a, Event b,
                                                      bool exclude_trivial, const Tolerances& tol) {
  if (space.size() > 24) throw PreconditionError("classical_find_cc: at most 24 atoms can be enumerated");
  if (space.prob(a & b) - space.prob(a) * space.prob(b) <= tol.cc_tol)
    throw PreconditionError("classical_find_cc: events are not positively correlated");
  const Event full = space.full();
  const auto probs = all_event_probs(space);
  std::vector<CommonCauseCertificate> found;
  for (Event c = 1; c < full; ++c) {
    if (probs[c] <= 0 || probs[full & ~c] <= 0) continue;
    if (exclude_trivial && trivial_cause(full, a, b, c)) continue;
    if (!evaluate(classical_weights(probs, full, a, b, c), tol).verified) continue;
    found.push_back(classical_verify_cc(space, a, b, c, tol));
  }
  return found;
}

ClosednessReport classical_closedness_audit(const ClassicalSpace& space, int audit_cap, const Tolerances& tol) {
  if (space.size() > audit_cap)
    throw PreconditionError("classical_closedness_audit: " + std::to_string(space.size()) +
                            " atoms exceed the audit cap of " + std::to_string(audit_cap));
  ClosednessReport report;
  report.atoms = space.size();
  const Event full = space.full();
  const auto probs = all_event_probs(space);
  for (Event a = 1; a < full; ++a) {
    for (Event b = a + 1; b < full; ++b) {
      const Event na = full & ~a, nb = full & ~b;
      if (probs[a & b] <= 0 || probs[a & nb] <= 0 || probs[na & b] <= 0 || probs[na & nb] <= 0) continue;
      if (probs[a & b] - probs[a] * probs[b] <= tol.cc_tol) continue;
      ++report.correlated_pairs;
      bool covered = false;
      for (Event c = 1; c < full && !covered; ++c) {
        if (probs[c] <= 0 || probs[full & ~c] <= 0 || trivial_cause(full, a, b, c)) continue;
        covered = evaluate(classical_weights(probs, full, a, b, c), tol).verified;
      }
      if (covered)
        ++report.covered;
      else
        report.uncovered.emplace_back(a, b);
    }
  }
  return report;
}

CommonCauseCertificate quantum_verify_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                         const Projection& c, const Tolerances& tol) {
  if (phi.dim() != a.dim()) throw PreconditionError("quantum_verify_cc: state and projections differ in dimension");
  require_commuting(a, b, tol, "quantum_verify_cc");
  require_commuting(a, c, tol, "quantum_verify_cc");
  require_commuting(b, c, tol, "quantum_verify_cc");
  const Projection cp = c.complement();
  const Projection ab = lattice_meet(a, b, tol);
  const CauseWeights w{state_eval(phi, c),
                       state_eval(phi, cp),
                       state_eval(phi, lattice_meet(ab, c, tol)),
                       state_eval(phi, lattice_meet(a, c, tol)),
                       state_eval(phi, lattice_meet(b, c, tol)),
                       state_eval(phi, lattice_meet(ab, cp, tol)),
                       state_eval(phi, lattice_meet(a, cp, tol)),
                       state_eval(phi, lattice_meet(b, cp, tol))};
  if (w.c <= tol.cc_tol || w.cperp <= tol.cc_tol)
    throw PreconditionError("quantum_verify_cc: cause or its complement has zero weight");
  CommonCauseCertificate cert = evaluate(w, tol);
  cert.cause = c;
  cert.is_strong = lattice_leq(c, ab, tol.meet_tol);
  cert.is_genuine = !lattice_leq(c, a, tol.meet_tol) && !lattice_leq(c, b, tol.meet_tol);
  return cert;
}

RValue reichenbach_r(double phi_a, double phi_b, double phi_ab, double phi_avb, const Tolerances& tol) {
  const double corr = phi_ab - phi_a * phi_b;
  if (corr <= tol.cc_tol) throw PreconditionError("reichenbach_r: events are not positively correlated");
  if (1.0 - phi_avb <= tol.cc_tol)
    throw InternalError("reichenbach_r: correlated pair with phi(A v B) = 1; numerical inconsistency");
  RValue out{corr / (1.0 - phi_avb), phi_ab, phi_a, phi_b, phi_avb};
  if (!(out.r > 0.0 && out.r < phi_ab))
    throw InternalError("reichenbach_r: r outside (0, phi(A ^ B)); numerical inconsistency");
  return out;
}

RValue reichenbach_r(const DensityState& phi, const Projection& a, const Projection& b, const Tolerances& tol) {
  require_commuting(a, b, tol, "reichenbach_r");
  return reichenbach_r(state_eval(phi, a), state_eval(phi, b), state_eval(phi, lattice_meet(a, b, tol)),
                       state_eval(phi, lattice_join(a, b, tol)), tol);
}

Projection synthesize_subprojection(const DensityState& phi, const Projection& p, double r, bool strict,
                                    const Tolerances& tol) {
  if (phi.dim() != p.dim()) throw PreconditionError("synthesize_subprojection: dimension mismatch");
  if (!phi.faithful()) throw PreconditionError("synthesize_subprojection: state is not faithful");
  const double total = state_eval(phi, p);
  if (!(r > 0.0 && r < total))
    throw PreconditionError("synthesize_subprojection: target weight must lie strictly between 0 and phi(P)");

  const Compression comp = compress(phi, p);
  const int max_rank = strict ? comp.size() - 1 : comp.size();
  int rank = 0;
  for (int k = 1; k <= max_rank; ++k) {
    if (rank_feasible(comp, k, r, tol.synth_tol)) {
      rank = k;
      break;
    }
  }
  if (rank == 0)
    throw InfeasibleError("synthesize_subprojection: no subprojection" + std::string(strict ? " strictly" : "") +
                          " below P has weight " + std::to_string(r));

  const Projection c = Projection::onto_columns(descend_to(comp, rank, r));
  if (std::abs(state_eval(phi, c) - r) > tol.synth_tol)
    throw InternalError("synthesize_subprojection: rotation missed the target weight");
  return c;
}

CommonCauseCertificate find_strong_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                      const Tolerances& tol) {
  if (!phi.faithful()) throw PreconditionError("find_strong_cc: state is not faithful");
  const RValue r = reichenbach_r(phi, a, b, tol);
  if (!(r.phi_ab < std::min(r.phi_a, r.phi_b) - tol.cc_tol))
    throw PreconditionError("find_strong_cc: phi(A ^ B) must be below both phi(A) and phi(B)");
  const Projection meet = lattice_meet(a, b, tol);
  const Projection c = synthesize_subprojection(phi, meet, r.r, true, tol);
  CommonCauseCertificate cert = quantum_verify_cc(phi, a, b, c, tol);
  if (!cert.verified || !cert.is_strong)
    throw InternalError("find_strong_cc: synthesized cause failed verification");
  return cert;
}

MultipleCauses find_multiple_strong_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                       int count, std::uint64_t seed, const Tolerances& tol) {
  MultipleCauses out;
  if (count <= 0) return out;
  try {
    out.causes.push_back(find_strong_cc(phi, a, b, tol));
  } catch (const InfeasibleError&) {
    out.infeasible = true;
    out.shortfall = true;
    return out;
  }

  const RValue r = reichenbach_r(phi, a, b, tol);
  const Compression comp = compress(phi, lattice_meet(a, b, tol));
  std::vector<int> ranks;
  for (int k = 1; k < comp.size(); ++k)
    if (rank_feasible(comp, k, r.r, tol.synth_tol)) ranks.push_back(k);

  Rng rng(derive_seed(seed, 0));
  std::uniform_int_distribution<std::size_t> pick_rank(0, ranks.size() - 1);
  const int budget = 50 * count;
  for (int attempt = 0; attempt < budget && static_cast<int>(out.causes.size()) < count; ++attempt) {
    const auto cols = wander_to(comp, ranks[pick_rank(rng)], r.r, rng);
    if (!cols) continue;
    const Projection c = Projection::onto_columns(*cols);
    const bool fresh = std::all_of(out.causes.begin(), out.causes.end(), [&](const CommonCauseCertificate& prev) {
      return operator_norm(c.matrix() - prev.cause->matrix()) > 1e-6;
    });
    if (!fresh) continue;
    CommonCauseCertificate cert = quantum_verify_cc(phi, a, b, c, tol);
    if (cert.verified && cert.is_strong) out.causes.push_back(std::move(cert));
  }
  out.shortfall = static_cast<int>(out.causes.size()) < count;
  return out;
}

std::optional<CommonCauseCertificate> search_genuine_cc(const DensityState& phi, const Projection& a,
                                                        const Projection& b, int budget, std::uint64_t seed,
                                                        const Tolerances& tol) {
  if (!phi.faithful()) throw PreconditionError("search_genuine_cc: state is not faithful");
  require_commuting(a, b, tol, "search_genuine_cc");
  if (correlation(phi, a, b, tol) <= tol.cc_tol)
    throw PreconditionError("search_genuine_cc: events are not positively correlated");
  if (budget <= 0) return std::nullopt;

  // The commutant of {A, B} is the direct sum of full matrix algebras on the
  // four cells AB, AB', A'B, A'B'. Every quantity in the cause conditions
  // depends only on the weight c[x] that C puts in each cell.
  const Projection ap = a.complement(), bp = b.complement();
  const std::array<Projection, 4> cells{lattice_meet(a, b, tol), lattice_meet(a, bp, tol),
                                        lattice_meet(ap, b, tol), lattice_meet(ap, bp, tol)};
  std::array<Compression, 4> comps;
  std::array<double, 4> w{};
  for (std::size_t x = 0; x < 4; ++x) {
    comps[x] = compress(phi, cells[x]);
    w[x] = comps[x].mu.sum();
  }
  enum { AB = 0, ABp = 1, ApB = 2, ApBp = 3 };

  auto residuals = [&](const Eigen::Vector4d& c) {
    const Eigen::Vector4d d = Eigen::Vector4d(w[0], w[1], w[2], w[3]) - c;
    return Eigen::Vector2d(c[AB] * c[ApBp] - c[ABp] * c[ApB], d[AB] * d[ApBp] - d[ABp] * d[ApB]);
  };
  auto jacobian = [&](const Eigen::Vector4d& c) {
    const Eigen::Vector4d d = Eigen::Vector4d(w[0], w[1], w[2], w[3]) - c;
    Eigen::Matrix<double, 2, 4> j;
    j << c[ApBp], -c[ApB], -c[ABp], c[AB], -d[ApBp], d[ApB], d[ABp], -d[AB];
    return j;
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int restart = 0; restart < budget; ++restart) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
    std::array<int, 4> rank{};
    Eigen::Vector4d lo, hi, c;
    for (std::size_t x = 0; x < 4; ++x) {
      std::uniform_int_distribution<int> pick(0, comps[x].size());
      rank[x] = pick(rng);
      lo[static_cast<Eigen::Index>(x)] = comps[x].bottom(rank[x]);
      hi[static_cast<Eigen::Index>(x)] = comps[x].top(rank[x]);
      c[static_cast<Eigen::Index>(x)] = lo[static_cast<Eigen::Index>(x)] +
                                        unit(rng) * (hi[static_cast<Eigen::Index>(x)] - lo[static_cast<Eigen::Index>(x)]);
    }
    const int total_rank = rank[0] + rank[1] + rank[2] + rank[3];
    int cells_rank = 0;
    for (const auto& comp : comps) cells_rank += comp.size();
    if (total_rank == 0 || total_rank == cells_rank) continue;
    if (rank[ApB] + rank[ApBp] == 0 || rank[ABp] + rank[ApBp] == 0) continue;

    // Gauss-Newton on the two screening residuals inside the box.
    for (int it = 0; it < 200; ++it) {
      const Eigen::Vector2d f = residuals(c);
      if (f.norm() < 1e-15) break;
      Eigen::Matrix<double, 2, 4> j = jacobian(c);
      for (Eigen::Index x = 0; x < 4; ++x)
        if (hi[x] - lo[x] <= 0) j.col(x).setZero();
      const Eigen::Vector4d step = -j.completeOrthogonalDecomposition().solve(f);
      if (!step.allFinite() || step.norm() < 1e-18) break;
      c = (c + step).cwiseMax(lo).cwiseMin(hi);
    }
    if (residuals(c).norm() > 1e-12) continue;

    Matrix cols(phi.dim(), 0);
    for (std::size_t x = 0; x < 4; ++x) {
      if (rank[x] == 0) continue;
      const Matrix part = descend_to(comps[x], rank[x], c[static_cast<Eigen::Index>(x)]);
      Matrix grown(phi.dim(), cols.cols() + part.cols());
      grown << cols, part;
      cols = std::move(grown);
    }
    const Projection cause = Projection::onto_columns(cols);
    CommonCauseCertificate cert = quantum_verify_cc(phi, a, b, cause, tol);
    if (cert.verified && cert.is_genuine) return cert;
  }
  return std::nullopt;
}

}  // namespace ccwb
