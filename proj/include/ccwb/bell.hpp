#ifndef CCWB_BELL_HPP
#define CCWB_BELL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccwb/qprob.hpp"

namespace ccwb {

struct BellOptions {
  int restarts = 20;
  int max_iterations = 500;
  double min_gain = 1e-12;
};

struct BellReport {
  double beta = 1.0;
  std::vector<HermitianOperator> optimizers;  // X1, X2 in N1; Y1, Y2 in N2
  int iterations = 0;                         // of the best restart
  bool converged = false;
  int best_restart = 0;
  std::vector<double> history;  // objective after each half-step of the best restart
};

// (1/2) Re phi(X1 (Y1 + Y2) + X2 (Y1 - Y2)).
double chsh_objective(const DensityState& phi, const Matrix& x1, const Matrix& x2, const Matrix& y1,
                      const Matrix& y2);

// See-saw lower bound on the Bell correlation. Restart 0 starts from the
// identity, so the result is never below 1.
BellReport bell_correlation(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                            std::uint64_t seed, const BellOptions& options = {}, const Tolerances& tol = {});

// Closed form for two qubits: max(1, sqrt of the two largest eigenvalues of
// T^T T), T_ij = phi(sigma_i (x) sigma_j).
double two_qubit_chsh_oracle(const DensityState& phi);

bool is_bell_correlated(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                        std::uint64_t seed = 0, const Tolerances& tol = {});

// A positively correlated pair of projections A in N1, B in N2, or nullopt
// when every pair of spectral projections of the two bases is uncorrelated.
std::optional<std::pair<Projection, Projection>> find_correlated_pair(const DensityState& phi,
                                                                      const MatrixAlgebra& n1,
                                                                      const MatrixAlgebra& n2,
                                                                      const Tolerances& tol = {});

enum class Ensemble { Pure, Mixed, Product };
Ensemble parse_ensemble(const std::string& name);
const char* to_string(Ensemble e);

struct BellSample {
  int n = 0;
  int correlated = 0;
  double fraction = 0;
  double max_beta = 0;
  std::vector<double> betas;
};

// Two-party split {d1, d2}; N1 and N2 are the two tensor factors.
BellSample sample_bell_fraction(const std::vector<int>& split, Ensemble ensemble, int n, std::uint64_t seed,
                                const BellOptions& options = {}, const Tolerances& tol = {});
BellSample sample_bell_fraction(const std::vector<int>& split, const std::vector<DensityState>& states,
                                std::uint64_t seed, const BellOptions& options = {}, const Tolerances& tol = {});

// w * singlet + (1 - w) * I / 4.
Matrix werner_density(double w);

}  // namespace ccwb

#endif  // CCWB_BELL_HPP
