#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zapsa/common.hpp"
#include "zapsa/mdp.hpp"

namespace zapsa::cov {

struct GainSpec {
  enum class Kind { Scalar, Matrix, Optimal };
  Kind kind = Kind::Optimal;
  double g = 1.0;
  Matrix G;

  static GainSpec scalar(double g);
  static GainSpec matrix(Matrix G);
  static GainSpec optimal();
};

enum class Verdict { Finite, Infinite, Undetermined };
const char* verdict_name(Verdict v);

struct CovarianceReport {
  Matrix A;
  Matrix sigma_delta;
  GainSpec gain;
  std::optional<Matrix> sigma_theta;  // absent unless the verdict is Finite
  Spectrum spectrum_ga;               // eigenvalues of G A
  Verdict verdict = Verdict::Undetermined;
};

// Stationary pmf of the state-action pair chain under the behavior policy,
// checked strictly positive.
Vector stationary_pair_pmf(const mdp::FiniteMDP& m, const mdp::Policy& behavior);

// Q*, its greedy policy, and the per-state optimality margin; throws
// NonUniqueOptimalPolicy when the margin drops below 1e-9.
struct OptimalSolution {
  Vector q_star;
  mdp::Policy policy;
  double margin;
};
OptimalSolution solve_unique_optimal(const mdp::FiniteMDP& m);

// Linearization of tabular Q-learning at the optimum:
// A = -Pi [I - beta P S_phi*].
Matrix linearization_A(const mdp::FiniteMDP& m, const mdp::Policy& behavior);

// Exact martingale-difference noise covariance at theta*: diagonal with
// entries beta^2 varpi(x,u) Var_{x' ~ P_u(x,.)}[h*(x')].
Matrix sigma_delta_tabular(const mdp::FiniteMDP& m, const mdp::Policy& behavior);

// Batch-means estimate (1/M) sum_m S_T S_T^T / T over disjoint length-T
// batches of noise samples.
Matrix sigma_delta_batchmeans(const std::vector<Vector>& noise, int batch_length);

// Verdict and covariance for the linearization pair (A, Sigma_Delta) under a
// gain. Finite iff every eigenvalue of GA has real part < -1/2; otherwise
// infinite when the noise excites some offending eigenvector, else
// undetermined.
CovarianceReport asymptotic_cov(const Matrix& A, const Matrix& sigma_delta, const GainSpec& gain);

struct SweepRow {
  double g;
  Verdict verdict;
  double trace;  // NaN unless finite
};
struct SweepResult {
  double g_star;  // max_i -1/(2 Re lambda_i(A))
  std::vector<SweepRow> rows;
};
SweepResult scalar_gain_sweep(const Matrix& A, const Matrix& sigma_delta,
                              std::span<const double> grid);

// Certificate that A has an eigenvalue with real part >= -(1-beta) max varpi:
// Perron-Frobenius eigenpair of -A^-1 = (1-beta)^-1 T Pi^-1 with
// T = (1-beta)[I - beta P S_phi*]^-1, obtained by power iteration.
struct PfCertificate {
  double lambda_pf;
  Vector eigenvector;      // normalized to unit 1-norm
  double lambda_a;         // -1/lambda_pf, eigenvalue of A
  double bound;            // -(1-beta) max varpi
  bool eigenvector_positive;
  bool bound_satisfied;    // lambda_a >= bound
};
PfCertificate pf_certificate(const mdp::FiniteMDP& m, const mdp::Policy& behavior);

}  // namespace zapsa::cov
