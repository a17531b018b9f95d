#include "ccwb/toynet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ccwb/bell.hpp"

namespace ccwb::toynet {

namespace {

TensorSplit qubit_chain(int n) { return TensorSplit{std::vector<int>(static_cast<std::size_t>(n), 2)}; }

using StridedMap = Eigen::Map<Matrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

// Index r = (hi * block + s) * low + lo, with s running over the gate's sites
// (site 0 is the most significant bit).
struct GateLayout {
  Eigen::Index block, low, chunk;
  GateLayout(const Gate& g, int n_sites)
      : block(Eigen::Index{1} << g.span),
        low(Eigen::Index{1} << (n_sites - g.first_site - g.span)),
        chunk(block * low) {}
};

// x <- G x.
void apply_left(Matrix& x, const Gate& g, int n_sites) {
  const GateLayout l(g, n_sites);
  Matrix mixed(l.block, x.cols());
  for (Eigen::Index base = 0; base < x.rows(); base += l.chunk)
    for (Eigen::Index lo = 0; lo < l.low; ++lo) {
      StridedMap rows(x.data() + base + lo, l.block, x.cols(), {x.outerStride(), l.low});
      mixed.noalias() = g.unitary * rows;
      rows = mixed;
    }
}

// x <- x G^dagger.
void apply_right_adjoint(Matrix& x, const Gate& g, int n_sites) {
  const GateLayout l(g, n_sites);
  const Matrix ga = g.unitary.adjoint();
  Matrix mixed(x.rows(), l.block);
  for (Eigen::Index base = 0; base < x.cols(); base += l.chunk)
    for (Eigen::Index lo = 0; lo < l.low; ++lo) {
      StridedMap cols(x.data() + (base + lo) * x.outerStride(), x.rows(), l.block, {l.low * x.outerStride(), 1});
      mixed.noalias() = cols * ga;
      cols = mixed;
    }
}

void conjugate(Matrix& x, const std::vector<Gate>& layer, int n_sites) {
  for (const Gate& g : layer) {
    apply_left(x, g, n_sites);
    apply_right_adjoint(x, g, n_sites);
  }
}

Matrix swap_gate() {
  Matrix s = Matrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1;
  s(1, 2) = s(2, 1) = 1;
  return s;
}

void require_unitary(const Matrix& u, const char* what) {
  if ((u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw InvariantError("gate_unitarity", std::string(what) + " is not unitary within 1e-10");
}

void require_region(const NetModel& net, const LatticeRegion& d) {
  if (d.first < 0 || d.last >= net.n_sites || d.first > d.last || d.step < 0 || d.step > net.steps)
    throw PreconditionError("lattice region " + describe(d) + " lies outside the net");
}

const std::array<Matrix, 2>& site_generators() {
  static const std::array<Matrix, 2> g{pauli(1), pauli(3)};
  return g;
}

// [x, sigma on site] with sigma Hermitian, via two local multiplications.
double commutator_with_site(const Matrix& x, const Matrix& sigma, int site, int n_sites) {
  const Gate g{site, 1, sigma};
  Matrix left = x;
  apply_left(left, g, n_sites);
  Matrix right = x;
  apply_right_adjoint(right, g, n_sites);
  return (left - right).norm();
}

struct Probe {
  int step;
  std::vector<int> sites;
};

// Largest commutator between Pauli generators on the two site sets, each in
// its own step picture. The earlier set is moved to the later picture, where
// the later set acts locally.
double max_commutator(const NetModel& net, const Probe& p, const Probe& q) {
  const Probe& early = p.step <= q.step ? p : q;
  const Probe& late = p.step <= q.step ? q : p;
  double worst = 0;
  for (int i : early.sites)
    for (const Matrix& s : site_generators()) {
      const Matrix moved = evolve(net, site_operator(net, s, i), early.step, late.step);
      for (int j : late.sites)
        for (const Matrix& t : site_generators())
          worst = std::max(worst, commutator_with_site(moved, t, j, net.n_sites));
    }
  return worst;
}

LatticeRegion random_region(const NetModel& net, std::mt19937_64& rng) {
  const int max_width = std::min(3, net.n_sites);
  const int width = std::uniform_int_distribution<int>(1, max_width)(rng);
  const int first = std::uniform_int_distribution<int>(0, net.n_sites - width)(rng);
  const int step = std::uniform_int_distribution<int>(0, net.steps)(rng);
  return {step, first, first + width - 1};
}

bool cone_inside(const NetModel& net, const LatticeRegion& inner, const LatticeRegion& outer) {
  return geo::hull_contains(continuum_region(net, outer).null_hull(), continuum_region(net, inner).null_hull(), 0);
}

bool cones_spacelike(const NetModel& net, const LatticeRegion& a, const LatticeRegion& b) {
  return geo::spacelike_separated(continuum_region(net, a), continuum_region(net, b), 0);
}

// A region containing d (nested) or just outside its causal reach (spacelike).
std::optional<LatticeRegion> tight_partner(const NetModel& net, const LatticeRegion& d, bool nested,
                                           std::mt19937_64& rng) {
  const int step = std::uniform_int_distribution<int>(0, net.steps)(rng);
  const int gap = std::abs(step - d.step);
  std::uniform_int_distribution<int> coin(0, 1);
  LatticeRegion out{step, 0, 0};
  if (nested) {
    out.first = d.first - gap - coin(rng);
    out.last = d.last + gap + coin(rng);
  } else {
    const int width = std::uniform_int_distribution<int>(1, 3)(rng);
    if (coin(rng) == 0) {
      out.first = d.last + 1 + gap;
      out.last = out.first + width - 1;
    } else {
      out.last = d.first - 1 - gap;
      out.first = out.last - width + 1;
    }
  }
  if (out.first < 0 || out.last >= net.n_sites) return std::nullopt;
  return out;
}

}  // namespace

GateKind parse_gate_kind(const std::string& name) {
  if (name == "swap") return GateKind::Swap;
  if (name == "random") return GateKind::Random;
  if (name == "given") return GateKind::Given;
  throw ParseError("unknown gate kind '" + name + "' (expected swap, random or given)");
}

const char* to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Swap: return "swap";
    case GateKind::Random: return "random";
    case GateKind::Given: return "given";
  }
  return "unknown";
}

NetModel build_net(int n_sites, GateKind kind, std::uint64_t seed, int steps, const std::optional<Matrix>& given) {
  if (n_sites < min_sites || n_sites > max_sites)
    throw PreconditionError("build_net: n_sites must lie in [" + std::to_string(min_sites) + ", " +
                            std::to_string(max_sites) + "]");
  if (steps < 0) throw PreconditionError("build_net: steps must be non-negative");
  if (kind == GateKind::Given) {
    if (!given || given->rows() != 4 || given->cols() != 4)
      throw PreconditionError("build_net: given gates need one 4 x 4 unitary");
    require_unitary(*given, "given gate");
  }

  NetModel net{n_sites, steps, kind, seed, 1.0, {}};
  for (int layer = 0; layer < steps; ++layer) {
    std::vector<Gate> gates;
    for (int i = layer % 2; i + 1 < n_sites; i += 2) {
      Matrix u;
      switch (kind) {
        case GateKind::Swap: u = swap_gate(); break;
        case GateKind::Given: u = *given; break;
        case GateKind::Random: {
          Rng rng(derive_seed(seed, static_cast<std::uint64_t>(layer * max_sites + i)));
          u = haar_unitary(4, rng);
          break;
        }
      }
      require_unitary(u, "layer gate");
      gates.push_back({i, 2, std::move(u)});
    }
    net.layers.push_back(std::move(gates));
  }
  return net;
}

void insert_oversized_gate(NetModel& net, int layer, int first_site, std::uint64_t seed) {
  if (layer < 0 || layer >= static_cast<int>(net.layers.size()) || first_site < 0 || first_site + 3 > net.n_sites)
    throw PreconditionError("insert_oversized_gate: gate does not fit the net");
  auto& gates = net.layers[static_cast<std::size_t>(layer)];
  std::erase_if(gates, [&](const Gate& g) {
    return g.first_site < first_site + 3 && first_site < g.first_site + g.span;
  });
  Rng rng(seed);
  gates.push_back({first_site, 3, haar_unitary(8, rng)});
}

std::vector<int> LatticeRegion::sites() const {
  std::vector<int> out;
  for (int i = first; i <= last; ++i) out.push_back(i);
  return out;
}

std::string describe(const LatticeRegion& d) {
  std::ostringstream os;
  os << "[" << d.first << "," << d.last << "]@" << d.step;
  return os.str();
}

geo::Region continuum_region(const NetModel& net, const LatticeRegion& d) {
  const double c = net.cell_size;
  const double t = d.step * c;
  const double lo = (d.first - 0.5) * c, hi = (d.last + 0.5) * c;
  return geo::Region::double_cone({t - hi, t - lo}, {t + lo, t + hi});
}

LatticeRegion lattice_region_of(const NetModel& net, const geo::Region& r) {
  const geo::Region done = geo::causal_completion(r);
  const geo::NullBox h = std::get<geo::NullBox>(done.shape());
  const double c = net.cell_size;
  const double wu = (h.u.hi - h.u.lo) / c, wv = (h.v.hi - h.v.lo) / c;
  const double t = (h.u.lo + h.u.hi + h.v.lo + h.v.hi) / (4 * c);
  const double x = (h.v.lo + h.v.hi - h.u.lo - h.u.hi) / (4 * c);
  auto integral = [](double s) { return std::abs(s - std::round(s)) <= 1e-9; };
  const double first = x - (wu - 1) / 2;
  if (std::abs(wu - wv) > 1e-9 || !integral(wu) || !integral(t) || !integral(first))
    throw PreconditionError("off-lattice region: its causal completion is not a lattice double cone");
  const LatticeRegion d{static_cast<int>(std::lround(t)), static_cast<int>(std::lround(first)),
                        static_cast<int>(std::lround(first + wu - 1))};
  require_region(net, d);
  return d;
}

Matrix heisenberg_frame(const NetModel& net, int step) {
  if (step < 0 || step > net.steps) throw PreconditionError("heisenberg_frame: step outside the net");
  Matrix w = Matrix::Identity(net.dim(), net.dim());
  for (int k = 0; k < step; ++k)
    for (const Gate& g : net.layers[static_cast<std::size_t>(k)]) apply_left(w, g, net.n_sites);
  return w.adjoint();
}

LocalAlgebra region_algebra(const NetModel& net, const LatticeRegion& d) {
  require_region(net, d);
  std::optional<Matrix> frame;
  if (d.step > 0) frame = heisenberg_frame(net, d.step);
  LocalAlgebra out{d, MatrixAlgebra::factor(qubit_chain(net.n_sites), d.sites(), std::move(frame)), {}};
  for (int i : d.sites()) out.generators.emplace_back(d.step, i);
  return out;
}

LocalAlgebra region_algebra(const NetModel& net, const geo::Region& r) {
  return region_algebra(net, lattice_region_of(net, r));
}

Matrix evolve(const NetModel& net, Matrix x, int from, int to) {
  if (from < 0 || to > net.steps || from > to) throw PreconditionError("evolve: steps out of order or range");
  for (int k = from; k < to; ++k) conjugate(x, net.layers[static_cast<std::size_t>(k)], net.n_sites);
  return x;
}

Matrix site_operator(const NetModel& net, const Matrix& local, int site) {
  Matrix x = Matrix::Identity(net.dim(), net.dim());
  apply_left(x, Gate{site, 1, local}, net.n_sites);
  return x;
}

double light_cone_leak(const NetModel& net, int site, int k) {
  double worst = 0;
  for (int p = 1; p <= 3; ++p) {
    const Matrix moved = evolve(net, site_operator(net, pauli(p), site), 0, k);
    for (int j = 0; j < net.n_sites; ++j) {
      if (std::abs(j - site) <= k) continue;
      for (int q = 1; q <= 3; ++q) worst = std::max(worst, commutator_with_site(moved, pauli(q), j, net.n_sites));
    }
  }
  return worst;
}

double inclusion_defect(const NetModel& net, const LatticeRegion& inner, const LatticeRegion& outer) {
  require_region(net, inner);
  require_region(net, outer);
  Probe complement{outer.step, {}};
  for (int j = 0; j < net.n_sites; ++j)
    if (j < outer.first || j > outer.last) complement.sites.push_back(j);
  if (complement.sites.empty()) return 0.0;
  return max_commutator(net, {inner.step, inner.sites()}, complement);
}

double commutation_defect(const NetModel& net, const LatticeRegion& d1, const LatticeRegion& d2) {
  require_region(net, d1);
  require_region(net, d2);
  return max_commutator(net, {d1.step, d1.sites()}, {d2.step, d2.sites()});
}

AxiomReport check_axioms(const NetModel& net, int sample_pairs, std::uint64_t seed, double tol) {
  AxiomReport report;
  std::mt19937_64 rng(seed);

  auto primitive = [&](const LatticeRegion& d) {
    ++report.primitive_checked;
    const LocalAlgebra direct = region_algebra(net, d);
    const LocalAlgebra completed = region_algebra(net, geo::causal_completion(continuum_region(net, d)));
    if (completed.region != d || completed.generators != direct.generators)
      report.violations.push_back("primitive causality: " + describe(d) + " and its completion differ");
  };

  for (int p = 0; p < sample_pairs; ++p) {
    const LatticeRegion d1 = random_region(net, rng);
    LatticeRegion d2 = random_region(net, rng);
    // Alternate nested, spacelike and unconstrained pairs. The first two are
    // built as tight as the light cone allows, with a random fallback.
    const int kind = p % 3;
    if (kind < 2) {
      const auto tight = tight_partner(net, d1, kind == 0, rng);
      if (tight) d2 = *tight;
    }
    for (int tries = 0; tries < 50 && kind != 2; ++tries) {
      if (kind == 0 && (cone_inside(net, d1, d2) || cone_inside(net, d2, d1))) break;
      if (kind == 1 && cones_spacelike(net, d1, d2)) break;
      d2 = random_region(net, rng);
    }
    ++report.pairs;
    primitive(d1);
    primitive(d2);

    for (const auto& [inner, outer] : {std::pair{d1, d2}, std::pair{d2, d1}}) {
      if (!cone_inside(net, inner, outer)) continue;
      ++report.isotony_checked;
      const double defect = inclusion_defect(net, inner, outer);
      report.max_isotony_defect = std::max(report.max_isotony_defect, defect);
      if (defect > tol)
        report.violations.push_back("isotony: " + describe(inner) + " inside " + describe(outer) +
                                    " but its algebra is not (defect " + std::to_string(defect) + ")");
    }
    if (cones_spacelike(net, d1, d2)) {
      ++report.einstein_checked;
      const double defect = commutation_defect(net, d1, d2);
      report.max_einstein_defect = std::max(report.max_einstein_defect, defect);
      if (defect > tol)
        report.violations.push_back("einstein causality: " + describe(d1) + " and " + describe(d2) +
                                    " are spacelike but do not commute (defect " + std::to_string(defect) + ")");
    }
  }
  return report;
}

DensityState demo_state(int n_sites, std::uint64_t seed, double mix) {
  if (n_sites < 1 || n_sites > max_sites) throw PreconditionError("demo_state: n_sites out of range");
  if (!(mix > 0 && mix <= 1)) throw PreconditionError("demo_state: mix must lie in (0, 1]");
  const int dim = 1 << n_sites;
  Rng rng(seed);
  const Vector psi = haar_vector(dim, rng);
  const Matrix rho = (1 - mix) * psi * psi.adjoint() + mix * Matrix::Identity(dim, dim) / static_cast<double>(dim);
  Tolerances loose;
  loose.tol_state = 1e-9;
  return DensityState(hermitian_part(rho), loose);
}

const char* to_string(DemoOutcome outcome) {
  switch (outcome) {
    case DemoOutcome::Certified: return "certified";
    case DemoOutcome::NoCorrelatedPair: return "no_correlated_pair";
    case DemoOutcome::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

// Local form of a projection in the picture of its region.
Matrix local_form(const NetModel& net, const LatticeRegion& d, const Matrix& p) {
  Matrix y = p;
  if (d.step > 0) {
    const Matrix f = heisenberg_frame(net, d.step);
    y = f.adjoint() * p * f;
  }
  const std::vector<int> sites = d.sites();
  const TensorSplit split = qubit_chain(net.n_sites);
  return reduce(y, split, sites) / static_cast<double>(net.dim() >> d.width());
}

// Random pair of local projections lifted into A(D1) and A(D2), oriented to
// be positively correlated; nullopt if the draw is uncorrelated.
std::optional<std::pair<Projection, Projection>> draw_pair(const DensityState& phi, const LocalAlgebra& n1,
                                                           const LocalAlgebra& n2, Rng& rng, const Tolerances& tol) {
  auto draw = [&](const LocalAlgebra& n) {
    const int d = 1 << n.region.width();
    const int rank = std::uniform_int_distribution<int>(1, d - 1)(rng);
    const Matrix local = random_projection(d, rank, rng);
    return std::pair{hermitian_part(n.algebra.lift(local)), rank * (phi.dim() / d)};
  };
  const auto [a, ra] = draw(n1);
  auto [b, rb] = draw(n2);
  const Projection pa = Projection::trusted(a, ra);
  Projection pb = Projection::trusted(b, rb);
  double corr = correlation(phi, pa, pb, tol);
  if (corr < 0) {
    pb = pb.complement();
    corr = -corr;
  }
  if (corr <= tol.cc_tol) return std::nullopt;
  return std::pair{pa, pb};
}

}  // namespace

DemoReport weak_rccp_demo(const NetModel& net, const DensityState& phi, const LatticeRegion& d1,
                          const LatticeRegion& d2, std::uint64_t seed, const DemoOptions& options,
                          const Tolerances& tol) {
  if (phi.dim() != net.dim()) throw PreconditionError("weak_rccp_demo: state does not live on the chain");
  if (!phi.faithful()) throw PreconditionError("weak_rccp_demo: state is not faithful");
  require_region(net, d1);
  require_region(net, d2);
  const geo::Region v1 = continuum_region(net, d1), v2 = continuum_region(net, d2);
  if (!geo::spacelike_separated(v1, v2, 0))
    throw PreconditionError("weak_rccp_demo: " + describe(d1) + " and " + describe(d2) + " are not spacelike separated");

  DemoReport report;
  report.d1 = d1;
  report.d2 = d2;
  report.d1_hull = v1.null_hull();
  report.d2_hull = v2.null_hull();

  // Slab below both regions, with its top on a cell-row edge.
  const double c = net.cell_size;
  double top;
  if (options.top) {
    top = *options.top;
  } else {
    const bool first_left = report.d2_hull.u.hi <= report.d1_hull.u.lo;
    const geo::NullBox& left = first_left ? report.d1_hull : report.d2_hull;
    const geo::NullBox& right = first_left ? report.d2_hull : report.d1_hull;
    const double limit = std::min({0.5 * (left.v.hi + right.u.hi), geo::min_time(v1), geo::min_time(v2)});
    top = (std::floor(limit / c - 0.5) + 0.5) * c;
  }
  const int row = static_cast<int>(std::lround(top / c - 0.5));
  if (row < 0 || std::abs(top / c - 0.5 - row) > 1e-9)
    throw PreconditionError("weak_rccp_demo: the slab top must be a cell-row edge at or after the first step");
  report.slab = geo::weak_cc_region(v1, v2, c, top, tol.geo_tol);

  // Snap to the cells of that row that lie inside the slab.
  const geo::Rect slab = std::get<geo::Rect>(report.slab->region.shape());
  const int first = std::max(0, static_cast<int>(std::ceil(slab.x.lo / c + 0.5 - 1e-9)));
  const int last = std::min(net.n_sites - 1, static_cast<int>(std::floor(slab.x.hi / c - 0.5 + 1e-9)));
  if (first > last) throw InternalError("weak_rccp_demo: no lattice cell fits inside the slab");
  report.cause_row = LatticeRegion{row, first, last};
  report.snapped = geo::Region::rect({(row - 0.5) * c, (row + 0.5) * c}, {(first - 0.5) * c, (last + 0.5) * c});
  const geo::Region pasts = geo::Region::unite({geo::blc(v1), geo::blc(v2)});
  report.snapped_inside_pasts = pasts.slice(top).closure_covers({(first - 0.5) * c, (last + 0.5) * c});
  report.snapped_disjoint = geo::Region::intersect({*report.snapped, geo::Region::unite({v1, v2})}).is_empty();
  report.tilde = geo::tilde_regions(v1, v2, *report.snapped);

  const LocalAlgebra n1 = region_algebra(net, d1), n2 = region_algebra(net, d2);
  const LocalAlgebra nv = region_algebra(net, *report.cause_row);
  report.algebra_covers = inclusion_defect(net, d1, *report.cause_row) <= tol.comm_tol &&
                          inclusion_defect(net, d2, *report.cause_row) <= tol.comm_tol;

  auto found = find_correlated_pair(phi, n1.algebra, n2.algebra, tol);
  if (!found) {
    report.outcome = DemoOutcome::NoCorrelatedPair;
    report.note = "no correlated pair of projections in A(D1) x A(D2)";
    return report;
  }

  Rng rng(seed);
  report.outcome = DemoOutcome::Infeasible;
  for (int attempt = 0; attempt < std::max(1, options.attempt_budget); ++attempt) {
    if (attempt > 0) {
      found = draw_pair(phi, n1, n2, rng, tol);
      if (!found) continue;
    }
    report.attempts = attempt + 1;
    const auto& [a, b] = *found;
    const RValue r = reichenbach_r(phi, a, b, tol);
    if (!(r.phi_ab < std::min(r.phi_a, r.phi_b) - tol.cc_tol)) continue;
    try {
      CommonCauseCertificate cert = find_strong_cc(phi, a, b, tol);
      const Projection meet = lattice_meet(a, b, tol);
      report.meet_in_v = nv.algebra.contains(meet.matrix(), tol.tol_alg);
      report.cause_in_v = nv.algebra.contains(cert.cause->matrix(), tol.tol_alg);
      const CommonCauseCertificate again = quantum_verify_cc(phi, a, b, *cert.cause, tol);
      report.independently_verified = again.verified && again.is_strong;
      cert.localization = "row " + std::to_string(row) + ", sites " + std::to_string(first) + ".." +
                          std::to_string(last) + " (" + describe(*report.cause_row) + ")";
      report.a_local = local_form(net, d1, a.matrix());
      report.b_local = local_form(net, d2, b.matrix());
      report.a = a;
      report.b = b;
      report.certificate = std::move(cert);
      report.outcome = DemoOutcome::Certified;
      return report;
    } catch (const InfeasibleError& e) {
      report.note = e.what();
    }
  }
  report.note = "no strong common cause within the attempt budget: " + report.note;
  return report;
}

}  // namespace ccwb::toynet
