#include "ccwb/bell.hpp"

#include <array>
#include <cmath>

namespace ccwb {

namespace {

using Quad = std::array<Matrix, 4>;

double objective(const Matrix& rho, const Quad& ops) {
  const Matrix w = ops[0] * (ops[2] + ops[3]) + ops[1] * (ops[2] - ops[3]);
  return 0.5 * rho.cwiseProduct(w.transpose()).sum().real();
}

// sign(E(h)) for the conditional expectation E onto the algebra. For factor
// algebras the sign is taken on the local block so the result stays exactly
// of the form U (K (x) 1) U^dagger.
Matrix unit_ball_maximizer(const MatrixAlgebra& alg, const Matrix& h) {
  if (alg.is_factor()) {
    const Matrix y = alg.frame() ? Matrix(alg.frame()->adjoint() * h * (*alg.frame())) : h;
    const int d = alg.split()->dim_of(alg.acting());
    const Matrix local = reduce(y, *alg.split(), alg.acting()) / static_cast<double>(alg.dim() / d);
    return alg.lift(sign_of(hermitian_part(local)));
  }
  return sign_of(hermitian_part(alg.expectation(h)));
}

Matrix random_dichotomic(const MatrixAlgebra& alg, Rng& rng) {
  return unit_ball_maximizer(alg, hermitian_part(ginibre(alg.dim(), alg.dim(), rng)));
}

struct Run {
  double value = 0;
  Quad ops;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

Run seesaw(const Matrix& rho, const MatrixAlgebra& n1, const MatrixAlgebra& n2, Quad ops, const BellOptions& options) {
  Run run;
  double value = objective(rho, ops);
  run.history.push_back(value);
  for (int it = 0; it < options.max_iterations; ++it) {
    const double before = value;
    ops[0] = unit_ball_maximizer(n1, (ops[2] + ops[3]) * rho);
    ops[1] = unit_ball_maximizer(n1, (ops[2] - ops[3]) * rho);
    run.history.push_back(objective(rho, ops));
    ops[2] = unit_ball_maximizer(n2, rho * (ops[0] + ops[1]));
    ops[3] = unit_ball_maximizer(n2, rho * (ops[0] - ops[1]));
    value = objective(rho, ops);
    run.history.push_back(value);
    run.iterations = it + 1;
    if (value - before < options.min_gain) {
      run.converged = true;
      break;
    }
  }
  run.value = value;
  run.ops = std::move(ops);
  return run;
}

void require_commuting_algebras(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                                const Tolerances& tol, const char* what) {
  if (phi.dim() != n1.dim() || n1.dim() != n2.dim())
    throw PreconditionError(std::string(what) + ": dimension mismatch");
  if (!algebras_commute(n1, n2, tol.comm_tol))
    throw PreconditionError(std::string(what) + ": algebras do not commute");
}

std::vector<Matrix> spectral_projections(const Matrix& h) {
  const Eigh e = eigh(h);
  std::vector<Matrix> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= e.values.size(); ++k) {
    if (k == e.values.size() || e.values(k - 1) - e.values(k) > 1e-9) {
      const Matrix cols = e.vectors.middleCols(start, k - start);
      if (k - start < e.values.size()) out.push_back(cols * cols.adjoint());
      start = k;
    }
  }
  return out;
}

std::vector<Matrix> candidate_projections(const MatrixAlgebra& alg) {
  std::vector<Matrix> out;
  for (const Matrix& h : alg.hermitian_basis())
    for (Matrix& p : spectral_projections(h)) out.push_back(std::move(p));
  return out;
}

}  // namespace

double chsh_objective(const DensityState& phi, const Matrix& x1, const Matrix& x2, const Matrix& y1,
                      const Matrix& y2) {
  return objective(phi.rho(), Quad{x1, x2, y1, y2});
}

BellReport bell_correlation(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                            std::uint64_t seed, const BellOptions& options, const Tolerances& tol) {
  require_commuting_algebras(phi, n1, n2, tol, "bell_correlation");

  const auto reduced = reduce_factor_pair(phi, n1, n2);
  const Matrix& rho = reduced ? reduced->state.rho() : phi.rho();
  const MatrixAlgebra& a1 = reduced ? reduced->n1 : n1;
  const MatrixAlgebra& a2 = reduced ? reduced->n2 : n2;
  const int dim = static_cast<int>(rho.rows());

  Run best;
  BellReport report;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Quad start;
    if (r == 0) {
      start.fill(Matrix::Identity(dim, dim));
    } else {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
      start = {random_dichotomic(a1, rng), random_dichotomic(a1, rng), random_dichotomic(a2, rng),
               random_dichotomic(a2, rng)};
    }
    Run run = seesaw(rho, a1, a2, std::move(start), options);
    if (r == 0 || run.value > best.value) {
      best = std::move(run);
      report.best_restart = r;
    }
  }

  report.beta = best.value;
  report.iterations = best.iterations;
  report.converged = best.converged;
  report.history = std::move(best.history);
  for (const Matrix& op : best.ops) {
    const Matrix full = reduced ? lift_reduced(op, n1, reduced->support) : op;
    report.optimizers.emplace_back(hermitian_part(full), tol);
  }
  if (report.beta > std::sqrt(2.0) + 1e-9)
    throw InternalError("bell_correlation: objective exceeds the Tsirelson bound");
  return report;
}

double two_qubit_chsh_oracle(const DensityState& phi) {
  if (phi.dim() != 4) throw PreconditionError("two_qubit_chsh_oracle: state must live on 2 (x) 2");
  Eigen::Matrix3d t;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) t(i - 1, j - 1) = phi.eval(kron(pauli(i), pauli(j)));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  return std::max(1.0, std::sqrt(std::max(0.0, ev(2) + ev(1))));
}

bool is_bell_correlated(const DensityState& phi, const MatrixAlgebra& n1, const MatrixAlgebra& n2,
                        std::uint64_t seed, const Tolerances& tol) {
  return bell_correlation(phi, n1, n2, seed, {}, tol).beta > 1.0 + tol.bell_tol;
}

std::optional<std::pair<Projection, Projection>> find_correlated_pair(const DensityState& phi,
                                                                      const MatrixAlgebra& n1,
                                                                      const MatrixAlgebra& n2,
                                                                      const Tolerances& tol) {
  require_commuting_algebras(phi, n1, n2, tol, "find_correlated_pair");
  const auto reduced = reduce_factor_pair(phi, n1, n2);
  const DensityState& state = reduced ? reduced->state : phi;
  const auto left = candidate_projections(reduced ? reduced->n1 : n1);
  const auto right = candidate_projections(reduced ? reduced->n2 : n2);

  double best = tol.product_tol;
  const Matrix* best_a = nullptr;
  const Matrix* best_b = nullptr;
  double best_corr = 0;
  for (const Matrix& a : left) {
    const Matrix ra = state.rho() * a;
    const double pa = ra.trace().real();
    for (const Matrix& b : right) {
      const double corr = ra.cwiseProduct(b.transpose()).sum().real() - pa * state.eval(b);
      if (std::abs(corr) > best) {
        best = std::abs(corr);
        best_a = &a;
        best_b = &b;
        best_corr = corr;
      }
    }
  }
  if (best_a == nullptr) return std::nullopt;

  const int d = static_cast<int>(best_a->rows());
  Matrix a = *best_a;
  Matrix b = *best_b;
  // phi(A (1 - B)) - phi(A) phi(1 - B) = -(phi(AB) - phi(A) phi(B)).
  if (best_corr < 0) b = Matrix::Identity(d, d) - b;
  auto finish = [&](const Matrix& p) {
    const int rank = static_cast<int>(std::lround(p.trace().real()));
    if (!reduced) return Projection::trusted(p, rank);
    return Projection::trusted(lift_reduced(p, n1, reduced->support), rank * (n1.dim() / d));
  };
  return std::make_pair(finish(a), finish(b));
}

Ensemble parse_ensemble(const std::string& name) {
  if (name == "pure") return Ensemble::Pure;
  if (name == "mixed") return Ensemble::Mixed;
  if (name == "product") return Ensemble::Product;
  throw ParseError("unknown ensemble '" + name + "' (expected pure, mixed or product)");
}

const char* to_string(Ensemble e) {
  switch (e) {
    case Ensemble::Pure: return "pure";
    case Ensemble::Mixed: return "mixed";
    case Ensemble::Product: return "product";
  }
  return "unknown";
}

BellSample sample_bell_fraction(const std::vector<int>& split, const std::vector<DensityState>& states,
                                std::uint64_t seed, const BellOptions& options, const Tolerances& tol) {
  if (split.size() != 2 || split[0] < 2 || split[1] < 2)
    throw PreconditionError("sample_bell_fraction: split must name two factors of dimension >= 2");
  if (states.empty()) throw PreconditionError("sample_bell_fraction: need at least one state");
  const TensorSplit ts{split};
  const auto n1 = MatrixAlgebra::factor(ts, {0});
  const auto n2 = MatrixAlgebra::factor(ts, {1});
  const bool qubits = split[0] == 2 && split[1] == 2;

  BellSample out;
  out.n = static_cast<int>(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].dim() != ts.total_dim()) throw PreconditionError("sample_bell_fraction: state dimension mismatch");
    const double beta = qubits ? two_qubit_chsh_oracle(states[i])
                               : bell_correlation(states[i], n1, n2, derive_seed(seed, i), options, tol).beta;
    out.betas.push_back(beta);
    out.max_beta = std::max(out.max_beta, beta);
    if (beta > 1.0 + tol.bell_tol) ++out.correlated;
  }
  out.fraction = static_cast<double>(out.correlated) / out.n;
  if (out.max_beta > std::sqrt(2.0) + 1e-9)
    throw InternalError("sample_bell_fraction: sampled value exceeds the Tsirelson bound");
  return out;
}

BellSample sample_bell_fraction(const std::vector<int>& split, Ensemble ensemble, int n, std::uint64_t seed,
                                const BellOptions& options, const Tolerances& tol) {
  if (n < 1) throw PreconditionError("sample_bell_fraction: n must be at least 1");
  if (split.size() != 2) throw PreconditionError("sample_bell_fraction: split must name two factors");
  const int d1 = split[0], d2 = split[1];
  Rng rng(seed);
  std::vector<DensityState> states;
  states.reserve(static_cast<std::size_t>(n));
  Tolerances loose = tol;
  loose.tol_state = std::max(tol.tol_state, 1e-9);
  for (int i = 0; i < n; ++i) {
    Matrix rho;
    switch (ensemble) {
      case Ensemble::Pure: {
        const Vector psi = haar_vector(d1 * d2, rng);
        rho = psi * psi.adjoint();
        break;
      }
      case Ensemble::Mixed: rho = random_density(d1 * d2, rng); break;
      case Ensemble::Product: {
        const Matrix left = random_density(d1, rng);
        rho = kron(left, random_density(d2, rng));
        break;
      }
    }
    states.emplace_back(hermitian_part(rho), loose);
  }
  return sample_bell_fraction(split, states, seed, options, tol);
}

Matrix werner_density(double w) {
  return w * singlet_density() + (1.0 - w) * Matrix::Identity(4, 4) / 4.0;
}

}  // namespace ccwb
