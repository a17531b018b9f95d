#ifndef CCWB_COMMONCAUSE_HPP
#define CCWB_COMMONCAUSE_HPP

// Reichenbachian common causes: verification for classical spaces and for
// projections under a state, and synthesis of strong and genuine causes.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccwb/qprob.hpp"

namespace ccwb {

// Atom subset; bit i is atom i + 1.
using Event = std::uint64_t;

class ClassicalSpace {
 public:
  // Throws InvariantError for negative weights, a sum away from 1 by more than
  // 1e-12, no atoms, or more than 64 atoms.
  explicit ClassicalSpace(std::vector<double> weights);

  int size() const noexcept { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  Event full() const noexcept;
  Event complement(Event e) const noexcept { return full() & ~e; }
  // Throws PreconditionError when the event has bits beyond the atom count.
  double prob(Event e) const;
  // Builds an event from 1-based atom labels.
  Event event(const std::vector<int>& atoms) const;

 private:
  std::vector<double> weights_;
};

struct ConditionValues {
  double ab_given_c = 0, a_given_c = 0, b_given_c = 0;
  double ab_given_cperp = 0, a_given_cperp = 0, b_given_cperp = 0;
};

struct CommonCauseCertificate {
  std::optional<Projection> cause;
  std::optional<Event> classical_cause;
  double weight = 0;  // probability of the cause
  ConditionValues conditions;
  double residual_screen_c = 0;
  double residual_screen_cperp = 0;
  double margin_a = 0;
  double margin_b = 0;
  bool is_strong = false;
  bool is_genuine = false;
  bool verified = false;
  std::optional<std::string> localization;
};

CommonCauseCertificate classical_verify_cc(const ClassicalSpace& space, Event a, Event b, Event c,
                                           const Tolerances& tol = {});

std::vector<CommonCauseCertificate> classical_find_cc(const ClassicalSpace& space, Event a, Event b,
                                                      bool exclude_trivial, const Tolerances& tol = {});

struct ClosednessReport {
  int atoms = 0;
  long long correlated_pairs = 0;
  long long covered = 0;
  std::vector<std::pair<Event, Event>> uncovered;
  bool closed() const noexcept { return uncovered.empty(); }
};

// Every unordered pair of logically independent events (all four cells carry
// positive weight) that is positively correlated is checked for a common cause
// outside {A, B, A^B, AvB} and their complements.
ClosednessReport classical_closedness_audit(const ClassicalSpace& space, int audit_cap = 12,
                                            const Tolerances& tol = {});

CommonCauseCertificate quantum_verify_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                         const Projection& c, const Tolerances& tol = {});

struct RValue {
  double r = 0;
  double phi_ab = 0, phi_a = 0, phi_b = 0, phi_avb = 0;
};

RValue reichenbach_r(const DensityState& phi, const Projection& a, const Projection& b,
                     const Tolerances& tol = {});
RValue reichenbach_r(double phi_a, double phi_b, double phi_ab, double phi_avb, const Tolerances& tol = {});

// Subprojection C <= P (C != P when strict) with phi(C) = r.
Projection synthesize_subprojection(const DensityState& phi, const Projection& p, double r, bool strict,
                                    const Tolerances& tol = {});

CommonCauseCertificate find_strong_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                      const Tolerances& tol = {});

struct MultipleCauses {
  std::vector<CommonCauseCertificate> causes;
  bool shortfall = false;   // fewer than requested were found
  bool infeasible = false;  // no strict subprojection of A^B has the right weight
};

MultipleCauses find_multiple_strong_cc(const DensityState& phi, const Projection& a, const Projection& b,
                                       int count, std::uint64_t seed, const Tolerances& tol = {});

// Best effort; nullopt is not a proof that no genuine cause exists.
std::optional<CommonCauseCertificate> search_genuine_cc(const DensityState& phi, const Projection& a,
                                                        const Projection& b, int budget, std::uint64_t seed,
                                                        const Tolerances& tol = {});

}  // namespace ccwb

#endif  // CCWB_COMMONCAUSE_HPP
