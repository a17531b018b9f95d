#ifndef CCWB_TOLERANCES_HPP
#define CCWB_TOLERANCES_HPP

#include <map>
#include <string>

namespace ccwb {

// Numerical thresholds shared by every module. Defaults are sized for
// double-precision dense eigensolvers on dimensions up to a few hundred.
struct Tolerances {
  double tol_herm = 1e-10;      // |X - X^dagger| entrywise
  double tol_state = 1e-10;     // trace and positivity of density matrices
  double tol_proj = 1e-9;       // idempotence, spectrum in {0, 1}, order relations
  double meet_tol = 1e-8;       // eigenvalue-2 window of A + B
  double comm_tol = 1e-9;       // commutator norm treated as zero
  double faithful_eps = 1e-10;  // minimum eigenvalue of a faithful state
  double tol_alg = 1e-8;        // algebra closure / membership
  double product_tol = 1e-9;    // product-state sweep
  double cc_tol = 1e-9;         // screening residuals and strict margins
  double synth_tol = 1e-10;     // phi(C) target accuracy
  double bell_tol = 1e-6;       // beta > 1 + bell_tol means Bell correlated
  double geo_tol = 1e-9;        // null-separation threshold and region shrink

  // Key/value view used by reports and --tol-override.
  std::map<std::string, double> as_map() const;
  // Throws ParseError for an unknown key.
  void set(const std::string& key, double value);
};

}  // namespace ccwb

#endif  // CCWB_TOLERANCES_HPP
