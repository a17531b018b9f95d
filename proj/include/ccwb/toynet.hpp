#ifndef CCWB_TOYNET_HPP
#define CCWB_TOYNET_HPP

// A qubit chain with brickwork dynamics, read as a net of local algebras on
// a 1+1 lattice. Site i at step k is the cell centred at (t, x) = (k, i) in
// units of cell_size. A lattice double cone [a, b]@k is the causal completion
// of the base segment x in (a - 1/2, b + 1/2) at t = k, and its algebra is
// the Heisenberg image of the site factors a..b after k steps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccwb/commoncause.hpp"
#include "ccwb/geometry.hpp"
#include "ccwb/qprob.hpp"

namespace ccwb::toynet {

enum class GateKind { Swap, Random, Given };
GateKind parse_gate_kind(const std::string& name);
const char* to_string(GateKind kind);

// Unitary on the contiguous sites first_site .. first_site + span - 1.
struct Gate {
  int first_site = 0;
  int span = 2;
  Matrix unitary;
};

struct NetModel {
  int n_sites = 0;
  int steps = 0;
  GateKind kind = GateKind::Swap;
  std::uint64_t seed = 0;
  double cell_size = 1.0;
  // layers[k] takes step k to step k + 1. Odd layers use bonds (0,1), (2,3), ...
  // and even layers (1,2), (3,4), ...; unpaired edge sites idle.
  std::vector<std::vector<Gate>> layers;

  int dim() const { return 1 << n_sites; }
};

inline constexpr int min_sites = 4;
inline constexpr int max_sites = 10;

NetModel build_net(int n_sites, GateKind kind, std::uint64_t seed, int steps = 4,
                   const std::optional<Matrix>& given = std::nullopt);

// Negative control: replace the gates of `layer` touching sites
// first_site .. first_site + 2 by one random three-site unitary.
void insert_oversized_gate(NetModel& net, int layer, int first_site, std::uint64_t seed);

struct LatticeRegion {
  int step = 0;
  int first = 0;  // sites first .. last
  int last = 0;
  int width() const { return last - first + 1; }
  std::vector<int> sites() const;
  bool operator==(const LatticeRegion&) const = default;
};
std::string describe(const LatticeRegion& d);

// The double cone of a lattice region.
geo::Region continuum_region(const NetModel& net, const LatticeRegion& d);
// Lattice region whose double cone is the causal completion of `r`.
// Throws PreconditionError when the completion is not a lattice double cone.
LatticeRegion lattice_region_of(const NetModel& net, const geo::Region& r);

struct LocalAlgebra {
  LatticeRegion region;
  MatrixAlgebra algebra;
  // (step, site) labels of the generating site algebras.
  std::vector<std::pair<int, int>> generators;
};

// Frame F with A([a,b]@k) = F (M_[a,b] (x) 1) F^dagger.
Matrix heisenberg_frame(const NetModel& net, int step);
LocalAlgebra region_algebra(const NetModel& net, const LatticeRegion& d);
LocalAlgebra region_algebra(const NetModel& net, const geo::Region& r);

// An operator of the step `from` picture rewritten in the step `to` picture
// (to >= from): M x M^dagger with M the layers in between.
Matrix evolve(const NetModel& net, Matrix x, int from, int to);
// Single-site operator (2 x 2) on `site`, as a full matrix.
Matrix site_operator(const NetModel& net, const Matrix& local, int site);

// Largest Frobenius norm of [x_i(k), sigma_j] over Pauli x, sigma and sites
// |j - i| > k, where x_i(k) is the site-i Pauli after k steps.
double light_cone_leak(const NetModel& net, int site, int k);

// Inclusion A(inner) in A(outer), decided by commutation with the commutant of
// A(outer). Returns the largest commutator norm found.
double inclusion_defect(const NetModel& net, const LatticeRegion& inner, const LatticeRegion& outer);
// Largest commutator norm between generators of A(d1) and A(d2).
double commutation_defect(const NetModel& net, const LatticeRegion& d1, const LatticeRegion& d2);

struct AxiomReport {
  int pairs = 0;
  int isotony_checked = 0;
  int einstein_checked = 0;
  int primitive_checked = 0;
  double max_isotony_defect = 0;
  double max_einstein_defect = 0;
  std::vector<std::string> violations;
  bool clean() const { return violations.empty(); }
};

AxiomReport check_axioms(const NetModel& net, int sample_pairs, std::uint64_t seed, double tol = 1e-10);

// (1 - mix) |psi><psi| + mix I / 2^n with a seeded Haar random psi.
DensityState demo_state(int n_sites, std::uint64_t seed, double mix = 0.05);

enum class DemoOutcome { Certified, NoCorrelatedPair, Infeasible };
const char* to_string(DemoOutcome outcome);

struct DemoOptions {
  // Top edge of the slab; defaults to the latest cell-row edge at which the
  // two backward cones meet below both regions.
  std::optional<double> top;
  int attempt_budget = 20;
};

struct DemoReport {
  DemoOutcome outcome = DemoOutcome::NoCorrelatedPair;
  LatticeRegion d1, d2;
  geo::NullBox d1_hull, d2_hull;
  std::optional<geo::WeakCauseRegion> slab;  // continuum construction
  std::optional<LatticeRegion> cause_row;   // its lattice snap: one row of cells
  std::optional<geo::Region> snapped;       // the cells of cause_row as a rectangle
  bool snapped_inside_pasts = false;
  bool snapped_disjoint = false;
  bool algebra_covers = false;  // A(D1) and A(D2) lie in A(V)
  bool meet_in_v = false;
  bool cause_in_v = false;
  std::optional<Projection> a, b;
  Matrix a_local, b_local;  // on the sites of D1 and D2, in their own pictures
  std::optional<CommonCauseCertificate> certificate;
  bool independently_verified = false;
  std::optional<geo::TildeRegions> tilde;
  int attempts = 0;
  std::string note;
};

DemoReport weak_rccp_demo(const NetModel& net, const DensityState& phi, const LatticeRegion& d1,
                          const LatticeRegion& d2, std::uint64_t seed, const DemoOptions& options = {},
                          const Tolerances& tol = {});

}  // namespace ccwb::toynet

#endif  // CCWB_TOYNET_HPP
